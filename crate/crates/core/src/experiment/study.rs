use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ModelKind};
use crate::data_io::{export_chain, export_study};
use crate::diagnostics::{
    batch_means_asvar, serde_inf, variance_ratio, ArmTimings, RatioReport, ReplicationStudy,
};
use crate::error::{Error, Result};
use crate::models::TargetModel;
use crate::samplers::{run_chain, ChainOutput, SamplerConfig, SamplerKind};
use crate::zv::{zv_estimate_many, Observable, Protocol, ZvOptions};

/// Batches per evaluation chain for the per-chain (batch-means) ratios.
const PER_CHAIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub kind: ModelKind,
    pub dimension: usize,
    pub data_source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerSummary {
    pub kind: SamplerKind,
    pub init: Vec<f64>,
    pub proposal_sd: Option<Vec<f64>>,
    pub proposal_correlation: Option<Vec<f64>>,
    pub burn_in: usize,
    pub fit_length: usize,
    pub eval_length: usize,
    pub protocol: Protocol,
}

/// Coefficient-fit flags of one degree, pooled over observables.
#[derive(Debug, Clone, Serialize)]
pub struct FitNote {
    pub ridge_applied: bool,
    pub all_degenerate: bool,
    pub dropped_columns: Vec<usize>,
    #[serde(with = "serde_inf")]
    pub max_condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub fit_seed: u64,
    pub eval_seed: u64,
    pub error: Option<String>,
    pub fit_accept_rate: Option<f64>,
    pub eval_accept_rate: Option<f64>,
    pub ordinary: Vec<f64>,
    pub zv: BTreeMap<usize, Vec<f64>>,
    pub fits: BTreeMap<usize, FitNote>,
    /// Per observable: batch-means asymptotic variance of `f` over that of `f̃`
    /// on the evaluation chain.
    pub batch_means_ratio: BTreeMap<usize, Vec<RatioValue>>,
}

/// A float that serializes infinities as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RatioValue(#[serde(with = "serde_inf")] pub f64);

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub observable: Observable,
    #[serde(flatten)]
    pub ratio: RatioReport,
    /// Median over replications of the per-chain batch-means ratio.
    #[serde(with = "serde_inf")]
    pub batch_means_ratio_median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub total_secs: f64,
    pub mean_ordinary_secs: f64,
    pub mean_zv_secs: BTreeMap<usize, f64>,
    /// Mean ZV time over mean ordinary time, per degree.
    pub zv_over_ordinary: BTreeMap<usize, f64>,
    pub per_replication: Vec<ArmTimings>,
}

/// Everything `run` writes to `study.json`. All fields except `timing` are a
/// deterministic function of the config.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub config: ExperimentConfig,
    pub model: ModelSummary,
    pub sampler: SamplerSummary,
    pub observables: Vec<Observable>,
    pub replications: Vec<ReplicationRecord>,
    pub summary: Vec<SummaryRow>,
    pub failed_replications: usize,
    /// Set when some replications failed and the summary uses the rest.
    pub partial: bool,
    pub timing: TimingReport,
}

impl StudyReport {
    pub fn row(&self, observable: usize, degree: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.ratio.parameter == observable && r.ratio.degree == degree)
    }

    /// The report as JSON without wall-clock timings and without the
    /// `threads` and `out` settings, which do not affect any estimate.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("timing");
            if let Some(config) = map.get_mut("config").and_then(|c| c.as_object_mut()) {
                config.remove("threads");
                config.remove("out");
            }
        }
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

pub struct StudyOutcome {
    pub report: StudyReport,
    pub study: Option<ReplicationStudy>,
    /// `(fit, eval)` chains per replication, kept only with `keep_chains`.
    pub chains: Vec<(usize, Option<ChainOutput>, ChainOutput)>,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    model: &'a TargetModel,
    kind: SamplerKind,
    base: SamplerConfig,
    observables: Vec<Observable>,
    options: Vec<ZvOptions>,
}

struct Replication {
    record: ReplicationRecord,
    timings: ArmTimings,
    chains: Option<(Option<ChainOutput>, ChainOutput)>,
}

fn sampler_for(ctx: &Context, length: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        length,
        seed,
        ..ctx.base.clone()
    }
}

fn run_replication(ctx: &Context, index: usize) -> Replication {
    let fit_seed = ctx.config.seed.wrapping_add(2 * index as u64);
    let eval_seed = fit_seed.wrapping_add(1);
    let mut record = ReplicationRecord {
        index,
        fit_seed,
        eval_seed,
        error: None,
        fit_accept_rate: None,
        eval_accept_rate: None,
        ordinary: Vec::new(),
        zv: BTreeMap::new(),
        fits: BTreeMap::new(),
        batch_means_ratio: BTreeMap::new(),
    };
    let mut timings = ArmTimings::default();
    let mut chains = None;
    if let Err(e) = replicate(ctx, &mut record, &mut timings, &mut chains) {
        record.error = Some(e.to_string());
    }
    Replication {
        record,
        timings,
        chains,
    }
}

fn replicate(
    ctx: &Context,
    record: &mut ReplicationRecord,
    timings: &mut ArmTimings,
    chains: &mut Option<(Option<ChainOutput>, ChainOutput)>,
) -> Result<()> {
    let single = ctx.config.single_chain;
    let (fit_chain, fit_secs) = if single {
        (None, 0.0)
    } else {
        let t = Instant::now();
        let c = run_chain(
            ctx.model,
            ctx.kind,
            &sampler_for(ctx, ctx.config.fit_length, record.fit_seed),
        )?;
        record.fit_accept_rate = Some(c.accept_rate);
        (Some(c), t.elapsed().as_secs_f64())
    };

    let t = Instant::now();
    let eval_chain = run_chain(
        ctx.model,
        ctx.kind,
        &sampler_for(ctx, ctx.config.eval_length, record.eval_seed),
    )?;
    let f_values: Vec<Vec<f64>> = ctx.observables.iter().map(|o| o.values(&eval_chain)).collect();
    record.ordinary = f_values
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let eval_secs = t.elapsed().as_secs_f64();
    record.eval_accept_rate = Some(eval_chain.accept_rate);
    timings.ordinary_secs = eval_secs;

    for options in &ctx.options {
        let t = Instant::now();
        let (fit_on, eval_on) = match &fit_chain {
            Some(fc) => (fc, Some(&eval_chain)),
            None => (&eval_chain, None),
        };
        let estimates = zv_estimate_many(ctx.model, &ctx.observables, fit_on, eval_on, options)?;
        let cv_secs = t.elapsed().as_secs_f64();
        timings.zv_secs.insert(options.degree, fit_secs + eval_secs + cv_secs);

        let mut note = FitNote {
            ridge_applied: false,
            all_degenerate: true,
            dropped_columns: Vec::new(),
            max_condition: 0.0,
        };
        let mut per_chain = Vec::with_capacity(estimates.len());
        for (est, f) in estimates.iter().zip(&f_values) {
            note.ridge_applied |= est.fit.ridge_applied;
            note.all_degenerate &= est.fit.all_degenerate;
            note.max_condition = note.max_condition.max(est.fit.condition_estimate);
            for &c in &est.fit.dropped_columns {
                if !note.dropped_columns.contains(&c) {
                    note.dropped_columns.push(c);
                }
            }
            let ord = batch_means_asvar(f, PER_CHAIN_BATCHES)?;
            let zv = batch_means_asvar(&est.ftilde, PER_CHAIN_BATCHES)?;
            per_chain.push(RatioValue(if zv > 0.0 { ord / zv } else { f64::INFINITY }));
        }
        note.dropped_columns.sort_unstable();
        record
            .zv
            .insert(options.degree, estimates.iter().map(|e| e.estimate).collect());
        record.fits.insert(options.degree, note);
        record.batch_means_ratio.insert(options.degree, per_chain);
    }
    if ctx.config.keep_chains {
        *chains = Some((fit_chain, eval_chain));
    }
    Ok(())
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 || xs[n / 2 - 1].is_infinite() || xs[n / 2].is_infinite() {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs the two-stage replication study described by `config`.
pub fn run(config: &ExperimentConfig) -> Result<StudyOutcome> {
    let started = Instant::now();
    let model = config.build_model()?;
    let kind = config.sampler_kind(&model);
    let base = config.sampler_config(&model, kind, config.fit_length)?;
    let exclusions = config.exclusions_for(&model);
    let options: Vec<ZvOptions> = config
        .degrees
        .iter()
        .map(|&p| ZvOptions {
            standardize: config.standardize,
            fit: config.fit_options(),
            ..ZvOptions::new(p, exclusions.clone())
        })
        .collect();
    let observables = config.observables_for(&model);
    let ctx = Context {
        config,
        model: &model,
        kind,
        base,
        observables: observables.clone(),
        options,
    };

    let threads = config
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Setup(format!("cannot start worker pool: {e}")))?;
    // collect() keeps replication order regardless of scheduling
    let results: Vec<Replication> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(&ctx, r))
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    let mut per_replication = Vec::with_capacity(results.len());
    let mut chains = Vec::new();
    for rep in results {
        if let Some((fit, eval)) = rep.chains {
            chains.push((rep.record.index, fit, eval));
        }
        records.push(rep.record);
        per_replication.push(rep.timings);
    }
    let ok: Vec<usize> = (0..records.len()).filter(|&i| records[i].error.is_none()).collect();
    let failed = records.len() - ok.len();

    let study = if ok.len() >= 2 {
        let zv = config
            .degrees
            .iter()
            .map(|&p| (p, ok.iter().map(|&i| records[i].zv[&p].clone()).collect()))
            .collect();
        Some(ReplicationStudy::new(
            ok.iter().map(|&i| records[i].ordinary.clone()).collect(),
            zv,
            ok.iter().map(|&i| records[i].fit_seed).collect(),
            ok.iter().map(|&i| per_replication[i].clone()).collect(),
        )?)
    } else {
        None
    };

    let mut summary = Vec::new();
    if let Some(study) = &study {
        for &p in &config.degrees {
            for (k, o) in observables.iter().enumerate() {
                let boot_seed = config.seed.wrapping_add(1_000_000 + 10 * k as u64 + p as u64);
                let ratio = variance_ratio(study, k, p, config.bootstrap_resamples, boot_seed)?;
                let per_chain = ok
                    .iter()
                    .map(|&i| records[i].batch_means_ratio[&p][k].0)
                    .collect();
                summary.push(SummaryRow {
                    observable: *o,
                    ratio,
                    batch_means_ratio_median: median(per_chain),
                });
            }
        }
    }

    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let mean_ordinary_secs = mean(ok.iter().map(|&i| per_replication[i].ordinary_secs).collect());
    let mean_zv_secs: BTreeMap<usize, f64> = config
        .degrees
        .iter()
        .map(|&p| (p, mean(ok.iter().map(|&i| per_replication[i].zv_secs[&p]).collect())))
        .collect();
    let zv_over_ordinary = mean_zv_secs
        .iter()
        .map(|(&p, &s)| (p, s / mean_ordinary_secs))
        .collect();

    let report = StudyReport {
        config: config.clone(),
        model: ModelSummary {
            kind: config.model,
            dimension: model.dimension(),
            data_source: config.data_source(),
        },
        sampler: SamplerSummary {
            kind,
            init: ctx.base.init.to_vec(),
            proposal_sd: ctx.base.proposal_sd.clone(),
            proposal_correlation: ctx.base.proposal_correlation.clone(),
            burn_in: config.burn_in,
            fit_length: config.fit_length,
            eval_length: config.eval_length,
            protocol: if config.single_chain {
                Protocol::SingleChain
            } else {
                Protocol::TwoChain
            },
        },
        observables,
        replications: records,
        summary,
        failed_replications: failed,
        partial: failed > 0,
        timing: TimingReport {
            total_secs: started.elapsed().as_secs_f64(),
            mean_ordinary_secs,
            mean_zv_secs,
            zv_over_ordinary,
            per_replication,
        },
    };
    Ok(StudyOutcome {
        report,
        study,
        chains,
    })
}

/// Writes `study.json`, `study.csv` and, if kept, `chains/` under `dir`.
pub fn write_outputs(outcome: &StudyOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    export_study(&outcome.report, dir.join("study.json"))?;
    write_study_csv(&outcome.report, &dir.join("study.csv"))?;
    if !outcome.chains.is_empty() {
        let chain_dir = dir.join("chains");
        std::fs::create_dir_all(&chain_dir).map_err(|e| Error::io(&chain_dir, e))?;
        for (r, fit, eval) in &outcome.chains {
            if let Some(fit) = fit {
                export_chain(fit, chain_dir.join(format!("rep{r:04}_fit.csv")))?;
            }
            export_chain(eval, chain_dir.join(format!("rep{r:04}_eval.csv")))?;
        }
    }
    Ok(())
}

/// One row per replication × observable × method.
fn write_study_csv(report: &StudyReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::load(path, e.to_string()))?;
    let csv_err = |e: csv::Error| Error::load(path, e.to_string());
    w.write_record(["replication", "observable", "method", "degree", "estimate"])
        .map_err(csv_err)?;
    for rec in report.replications.iter().filter(|r| r.error.is_none()) {
        for (k, o) in report.observables.iter().enumerate() {
            let name = o.to_string();
            w.write_record([
                rec.index.to_string(),
                name.clone(),
                "ordinary".into(),
                String::new(),
                format!("{:.16e}", rec.ordinary[k]),
            ])
            .map_err(csv_err)?;
            for (p, values) in &rec.zv {
                w.write_record([
                    rec.index.to_string(),
                    name.clone(),
                    "zv".into(),
                    p.to_string(),
                    format!("{:.16e}", values[k]),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
