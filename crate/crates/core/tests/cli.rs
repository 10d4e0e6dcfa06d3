use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zvmcmc"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn shipped_configs_validate() {
    for name in ["probit_banknote", "logit_banknote", "garch_demgbp", "toys", "gamma_boundary"] {
        let path = config(name);
        let out = run(&["validate", "--config", path.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: "));
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let probit = config("probit_banknote");
    let out = run(&["validate", "--config", probit.to_str().unwrap(), "--set", "data=\"missing.csv\""]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.csv"), "{}", stderr(&out));

    let toys = config("toys");
    let out = run(&["validate", "--config", toys.to_str().unwrap(), "--degrees", "1,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degree 4"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  \"model\": \n}\n").unwrap();
    let out = run(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    let out = run(&["validate", "--config", toys.to_str().unwrap(), "--set", "no_such_key=1"]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

fn study_without_timing(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("study.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value.as_object_mut().unwrap().remove("timing");
    let config = value["config"].as_object_mut().unwrap();
    config.remove("out");
    config.remove("threads");
    value
}

#[test]
fn single_replication_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let toys = config("toys");
    let started = Instant::now();
    let out = run(&[
        "run",
        "--config",
        toys.to_str().unwrap(),
        "--replications",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(started.elapsed().as_secs_f64() < 5.0);
    let study = study_without_timing(dir.path());
    assert_eq!(study["replications"].as_array().unwrap().len(), 1);
    assert!(study["summary"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(csv.starts_with("replication,observable,method,degree,estimate"));
}

#[test]
fn reruns_are_identical_across_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let gamma = config("gamma_boundary");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = run(&[
            "run",
            "--config",
            gamma.to_str().unwrap(),
            "--replications",
            "6",
            "--threads",
            threads,
            "--keep-chains",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(study_without_timing(a.path()), study_without_timing(b.path()));
    let chain = |d: &Path| std::fs::read(d.join("chains/rep0003_eval.csv")).unwrap();
    assert_eq!(chain(a.path()), chain(b.path()));
}

#[test]
fn diagnose_flags_gamma_boundary_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let gamma = config("gamma_boundary");
    let out = run(&[
        "diagnose",
        "--config",
        gamma.to_str().unwrap(),
        "--set",
        "reference_length=200000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap())
            .unwrap();
    assert!(!report["flags"].as_array().unwrap().is_empty());
}

#[test]
fn version_prints_the_package_version() {
    let out = run(&["version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}
