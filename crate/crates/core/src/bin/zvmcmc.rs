use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use zvmcmc::data_io::export_study;
use zvmcmc::experiment::{self, ExperimentConfig};
use zvmcmc::Error;

#[derive(Parser)]
#[command(name = "zvmcmc", about = "Zero-variance control variates for MCMC output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replicated fit/evaluate study and write study.json and study.csv.
    Run(ConfigArgs),
    /// Run one long chain and write diagnostics.json.
    Diagnose(ConfigArgs),
    /// Parse the config and load its data without sampling.
    Validate(ConfigArgs),
    /// Print the version.
    Version,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (flat JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Base seed; replication r uses base+2r (fit) and base+2r+1 (eval).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    replications: Option<usize>,
    /// Polynomial degrees of the control variates.
    #[arg(long, value_name = "1,2,3", value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    /// Fit and evaluate on the same chain.
    #[arg(long)]
    single_chain: bool,
    /// Worker threads for the replications; results do not depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Prepend a column of ones to the design matrix.
    #[arg(long)]
    add_intercept: bool,
    /// Write every fit and eval chain under `chains/`.
    #[arg(long)]
    keep_chains: bool,
    /// Override any config field, e.g. `--set eval_length=10000`. Values are
    /// parsed as JSON, falling back to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let usage = |e: Error| Failure::Usage(e.to_string());
        let file = ExperimentConfig::from_file(&self.config).map_err(usage)?;
        let base_dir = file.base_dir.clone();
        let mut value = serde_json::to_value(&file).expect("config serializes");
        let fields = value.as_object_mut().expect("config is an object");
        let mut set = |key: &str, v: Value| {
            fields.insert(key.to_string(), v);
        };
        if let Some(s) = self.seed {
            set("seed", s.into());
        }
        if let Some(o) = &self.out {
            set("out", o.display().to_string().into());
        }
        if let Some(r) = self.replications {
            set("replications", r.into());
        }
        if let Some(d) = &self.degrees {
            set("degrees", d.clone().into());
        }
        if self.single_chain {
            set("single_chain", true.into());
        }
        if let Some(t) = self.threads {
            set("threads", t.into());
        }
        if self.add_intercept {
            set("add_intercept", true.into());
        }
        if self.keep_chains {
            set("keep_chains", true.into());
        }
        for o in &self.overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {o:?}")))?;
            let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set(key.trim(), v);
        }
        let mut config: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| Failure::Usage(format!("config error after overrides: {e}")))?;
        config.base_dir = base_dir;
        config.validate().map_err(usage)?;
        // load the data up front so missing files are usage errors
        config.build_model().map_err(usage)?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let runtime = |e: Error| Failure::Runtime(e.to_string());
    match cli.command {
        Command::Version => {
            println!("zvmcmc {}", env!("CARGO_PKG_VERSION"));
        }
        Command::Validate(args) => {
            let config = args.load()?;
            let summary = experiment::validate(&config).map_err(|e| Failure::Usage(e.to_string()))?;
            println!(
                "ok: {} model, dimension {}, data: {}",
                summary.model.kind, summary.model.dimension, summary.model.data_source
            );
            for (p, k) in summary.degrees.iter().zip(&summary.basis_sizes) {
                println!("  degree {p}: {k} control variates");
            }
        }
        Command::Run(args) => {
            let config = args.load()?;
            let outcome = experiment::run(&config).map_err(runtime)?;
            experiment::write_outputs(&outcome, &config.out).map_err(runtime)?;
            let report = &outcome.report;
            println!(
                "{} replications ({} failed), sampler {}",
                report.replications.len(),
                report.failed_replications,
                report.sampler.kind
            );
            println!("{:<10} {:>6} {:>14} {:>28} {:>14}", "observable", "degree", "ratio", "95% interval", "batch-means");
            for row in &report.summary {
                let interval = row
                    .ratio
                    .interval
                    .map_or("-".to_string(), |(lo, hi)| format!("[{lo:.4e}, {hi:.4e}]"));
                println!(
                    "{:<10} {:>6} {:>14.4e} {:>28} {:>14.4e}",
                    row.observable.to_string(),
                    row.ratio.degree,
                    row.ratio.ratio,
                    interval,
                    row.batch_means_ratio_median
                );
            }
            for (p, r) in &report.timing.zv_over_ordinary {
                println!("time ZV/ordinary, degree {p}: {r:.2}");
            }
            println!("wrote {}", config.out.join("study.json").display());
        }
        Command::Diagnose(args) => {
            let config = args.load()?;
            let report = experiment::diagnose(&config).map_err(runtime)?;
            std::fs::create_dir_all(&config.out)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", config.out.display())))?;
            let path = config.out.join("diagnostics.json");
            export_study(&report, &path).map_err(runtime)?;
            println!("chain of {} draws, acceptance {:.3}", report.chain_length, report.accept_rate);
            for (j, (m, se)) in report.linnik.estimate.iter().zip(&report.linnik.std_error).enumerate() {
                println!("Linnik x{}: {m:.6e} (se {se:.2e})", j + 1);
            }
            if report.flags.is_empty() {
                println!("no advisory flags");
            }
            for f in &report.flags {
                println!("advisory: {f}");
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
