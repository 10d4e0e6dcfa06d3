use std::fs;

use proptest::prelude::*;
use zvmcmc::data_io::{
    export_chain, export_study, import_chain, load_design_matrix, load_prices, prices_to_returns,
    write_design_matrix, write_prices, PriceSeries,
};
use zvmcmc::diagnostics::serde_inf;
use zvmcmc::samplers::{run_chain, tuned_config, ProposalShape, SamplerKind};
use zvmcmc::{Error, TargetModel};

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn load_message(path: &std::path::Path) -> String {
    match load_design_matrix(path, true, None) {
        Err(e @ Error::Load { .. }) => e.to_string(),
        other => panic!("expected a load error, got {other:?}"),
    }
}

#[test]
fn loads_two_hundred_rows_with_intercept() {
    let (rows, y) = zvmcmc::data_io::synthetic::banknote_like(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("notes.csv");
    let names = zvmcmc::data_io::synthetic::BANKNOTE_COLUMNS;
    write_design_matrix(&path, &names, &rows, &y).unwrap();

    let data = load_design_matrix(&path, true, None).unwrap();
    assert_eq!(data.n(), 200);
    assert_eq!(data.dimension(), names.len() + 1);
    assert!(data.rows().all(|(x, _)| x[0] == 1.0));

    let picked: Vec<String> = names[..2].iter().rev().map(|s| s.to_string()).collect();
    let sub = load_design_matrix(&path, false, Some(&picked)).unwrap();
    assert_eq!(sub.dimension(), 2);
    assert_eq!(sub.row(0), &[rows[0][1], rows[0][0]]);
}

#[test]
fn minimal_file_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "tiny.csv", "x,y\n-1,0\n1,1\n");
    let data = load_design_matrix(&path, false, None).unwrap();
    assert_eq!(data.n(), 2);
    assert_eq!(data.row(0), &[-1.0]);
    assert_eq!(data.response(), &[false, true]);
}

#[test]
fn bad_files_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let msg = load_message(&write(&dir, "y2.csv", "a,b,y\n1,2,0\n3,4,2\n"));
    assert!(msg.contains("line 3") && msg.contains("0 or 1"), "{msg}");

    let msg = load_message(&write(&dir, "text.csv", "a,b,y\n1,2,0\n3,abc,1\n"));
    assert!(msg.contains("line 3") && msg.contains("`b`") && msg.contains("abc"), "{msg}");

    let msg = load_message(&write(&dir, "noy.csv", "a,b\n1,2\n"));
    assert!(msg.contains("`y`"), "{msg}");

    let msg = load_message(&write(&dir, "zero.csv", "a,b,y\n0,0,1\n"));
    assert!(msg.contains("line 2"), "{msg}");

    let missing = dir.path().join("absent.csv");
    let err = load_design_matrix(&missing, true, None).unwrap_err();
    assert!(err.to_string().contains("absent.csv"), "{err}");
}

#[test]
fn chain_round_trip_is_bit_identical() {
    let model = TargetModel::gamma(2.5, 0.7).unwrap();
    let kind = SamplerKind::RandomWalk;
    let cfg = tuned_config(&model, kind, ProposalShape::Independent, 100, 400, 3).unwrap();
    let chain = run_chain(&model, kind, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.csv");
    export_chain(&chain, &path).unwrap();
    let back = import_chain(&path, model.tag()).unwrap();
    assert_eq!(back.len(), chain.len());
    for i in 0..chain.len() {
        assert_eq!(back.draw(i), chain.draw(i));
        assert_eq!(back.gradient(i), chain.gradient(i));
    }
    assert!((back.accept_rate - chain.accept_rate).abs() <= 1.0 / chain.len() as f64);

    let header = fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("iter,beta_1,grad_1\n"));
    let broken = write(&dir, "broken.csv", "iter,beta_1,grad_1\n0,1.0,zz\n");
    assert!(import_chain(&broken, "gamma").unwrap_err().to_string().contains("line 2"));
}

#[test]
fn study_export_writes_json() {
    #[derive(serde::Serialize)]
    struct Row {
        #[serde(with = "serde_inf")]
        ratio: f64,
    }
    let dir = tempfile::tempdir().unwrap();
    let empty: Vec<Row> = Vec::new();
    export_study(&empty, dir.path().join("empty.json")).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("empty.json")).unwrap().trim(), "[]");

    let rows = vec![Row { ratio: f64::INFINITY }, Row { ratio: 2.5 }];
    export_study(&rows, dir.path().join("rows.json")).unwrap();
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rows.json")).unwrap()).unwrap();
    assert_eq!(value[0]["ratio"], "inf");
    assert_eq!(value[1]["ratio"], 2.5);
}

#[test]
fn price_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let series = zvmcmc::data_io::synthetic::demgbp_like(1).unwrap();
    let path = dir.path().join("prices.csv");
    write_prices(&path, &series).unwrap();
    let back = load_prices(&path).unwrap();
    assert_eq!(back.dates(), series.dates());
    assert_eq!(back.prices(), series.prices());

    let bad = write(&dir, "neg.csv", "date,price\n2000-01-03,1.0\n2000-01-04,-2.0\n");
    assert!(load_prices(&bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn returns_reconstruct_prices(start in 0.1f64..100.0, steps in prop::collection::vec(-0.05f64..0.05, 2..60)) {
        let mut prices = vec![start];
        for s in &steps {
            prices.push(prices.last().unwrap() * (1.0 + s));
        }
        let dates: Vec<String> = (0..prices.len()).map(|i| format!("d{i:04}")).collect();
        prop_assume!(steps.iter().any(|s| s.abs() > 1e-9));
        let series = PriceSeries::new(dates, prices.clone()).unwrap();
        let returns = prices_to_returns(&series).unwrap();
        prop_assert_eq!(returns.returns().len(), steps.len());
        let mut p = start;
        for (r, expected) in returns.returns().iter().zip(&prices[1..]) {
            p *= 1.0 + r;
            prop_assert!((p - expected).abs() <= 1e-12 * expected);
        }
    }
}
