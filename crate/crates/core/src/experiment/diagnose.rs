use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::study::ModelSummary;
use crate::diagnostics::{
    cv_zero_mean_test, linnik_estimate, moment_diagnostic, reference_from_chain, LinnikReport,
    ReferenceReport, StabilityCheck, ZeroMeanColumn, DEFAULT_DELTA,
};
use crate::error::Result;
use crate::samplers::{run_chain, SamplerKind};
use crate::zv::{eval_control_variates, eval_control_variates_standardized, monomial_basis, Monomial, Standardization};

#[derive(Debug, Clone, Serialize)]
pub struct MomentColumn {
    pub monomial: Monomial,
    #[serde(flatten)]
    pub check: StabilityCheck,
}

/// Output of `diagnose`: one long ordinary chain and every diagnostic on it.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub config: ExperimentConfig,
    pub model: ModelSummary,
    pub sampler: SamplerKind,
    pub chain_length: usize,
    pub accept_rate: f64,
    pub zero_mean: BTreeMap<usize, Vec<ZeroMeanColumn>>,
    pub linnik: LinnikReport,
    pub delta: f64,
    /// Stability of `|z_j|^(2+δ)`, the moments of the full degree-1 control
    /// variates `z = -1/2 ∇ ln π`.
    pub moments: Vec<MomentColumn>,
    pub reference: ReferenceReport,
    /// Human-readable advisory flags; never an error.
    pub flags: Vec<String>,
}

/// Runs one chain of `reference_length` draws and applies the zero-mean,
/// Linnik, moment-stability and reference-interval diagnostics.
pub fn diagnose(config: &ExperimentConfig) -> Result<DiagnosticsReport> {
    let model = config.build_model()?;
    let kind = config.sampler_kind(&model);
    let sampler = config.sampler_config(&model, kind, config.reference_length)?;
    let chain = run_chain(&model, kind, &sampler)?;
    let exclusions = config.exclusions_for(&model);
    let standardization = if config.standardize {
        Standardization::from_chain(&chain, exclusions.is_empty())
    } else {
        Standardization::identity(model.dimension())
    };

    let mut flags = Vec::new();
    let mut zero_mean = BTreeMap::new();
    for &p in &config.degrees {
        let basis = monomial_basis(model.dimension(), p, &exclusions)?;
        let cv = eval_control_variates_standardized(&chain, &basis, &standardization)?;
        let columns = cv_zero_mean_test(&cv)?;
        for c in &columns {
            if let Some(z) = c.z.filter(|z| z.abs() >= 4.0) {
                flags.push(format!("degree {p}: control variate {:?} has zero-mean z = {z:.2}", c.monomial));
            }
        }
        zero_mean.insert(p, columns);
    }

    let linnik = linnik_estimate(&chain)?;
    for (j, s) in linnik.stability.iter().enumerate() {
        if s.divergent {
            flags.push(format!("Linnik functional of coordinate {} looks infinite", j + 1));
        }
    }

    // the gradient columns themselves, whether or not the study excludes them
    let basis = monomial_basis(model.dimension(), 1, &[])?;
    let cv = eval_control_variates(&chain, &basis)?;
    let moments: Vec<MomentColumn> = basis
        .active()
        .cloned()
        .zip(moment_diagnostic(&cv, DEFAULT_DELTA)?)
        .map(|(monomial, check)| MomentColumn { monomial, check })
        .collect();
    for m in &moments {
        if m.check.divergent {
            flags.push(format!(
                "moment of order {} of control variate {:?} looks infinite",
                2.0 + DEFAULT_DELTA,
                m.monomial
            ));
        }
    }
    drop(cv);

    let reference = reference_from_chain(&chain, &config.observables_for(&model), kind)?;
    Ok(DiagnosticsReport {
        config: config.clone(),
        model: ModelSummary {
            kind: config.model,
            dimension: model.dimension(),
            data_source: config.data_source(),
        },
        sampler: kind,
        chain_length: chain.len(),
        accept_rate: chain.accept_rate,
        zero_mean,
        linnik,
        delta: DEFAULT_DELTA,
        moments,
        reference,
        flags,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub model: ModelSummary,
    pub sampler: SamplerKind,
    pub degrees: Vec<usize>,
    /// Number of control variates per degree.
    pub basis_sizes: Vec<usize>,
}

/// Parses the config and loads its data without sampling.
pub fn validate(config: &ExperimentConfig) -> Result<ValidationSummary> {
    let model = config.build_model()?;
    let exclusions = config.exclusions_for(&model);
    let basis_sizes = config
        .degrees
        .iter()
        .map(|&p| monomial_basis(model.dimension(), p, &exclusions).map(|b| b.len()))
        .collect::<Result<_>>()?;
    Ok(ValidationSummary {
        model: ModelSummary {
            kind: config.model,
            dimension: model.dimension(),
            data_source: config.data_source(),
        },
        sampler: config.sampler_kind(&model),
        degrees: config.degrees.clone(),
        basis_sizes,
    })
}
