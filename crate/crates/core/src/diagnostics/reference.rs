use serde::Serialize;

use super::asvar::{batch_means_asvar, sample_mean};
use crate::error::{Error, Result};
use crate::models::TargetModel;
use crate::samplers::{run_chain, tuned_config, ChainOutput, ProposalShape, SamplerKind};
use crate::special::norm_quantile;
use crate::zv::Observable;

const REFERENCE_BURN_IN: usize = 1000;
const REFERENCE_BATCHES: usize = 50;

/// Ordinary MCMC estimates from one long chain, with batch-means 95% intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceReport {
    pub observables: Vec<Observable>,
    pub point: Vec<f64>,
    pub std_error: Vec<f64>,
    pub ci95: Vec<(f64, f64)>,
    pub length: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub accept_rate: f64,
}

impl ReferenceReport {
    pub fn contains(&self, k: usize, value: f64) -> bool {
        let (lo, hi) = self.ci95[k];
        lo <= value && value <= hi
    }
}

/// Runs the model's default sampler, with its default proposal, for `length` draws after 1000 burn-in and
/// reports the chain average of each observable.
pub fn long_chain_reference(
    model: &TargetModel,
    observables: &[Observable],
    length: usize,
    seed: u64,
) -> Result<ReferenceReport> {
    if length < 100_000 {
        return Err(Error::InsufficientSample(format!(
            "a reference chain needs at least 1e5 draws, got {length}"
        )));
    }
    let kind = SamplerKind::default_for(model);
    let config = tuned_config(model, kind, ProposalShape::default(), REFERENCE_BURN_IN, length, seed)?;
    let chain = run_chain(model, kind, &config)?;
    reference_from_chain(&chain, observables, kind)
}

/// [`long_chain_reference`] on an existing chain.
pub fn reference_from_chain(
    chain: &ChainOutput,
    observables: &[Observable],
    sampler: SamplerKind,
) -> Result<ReferenceReport> {
    let z = norm_quantile(0.975);
    let mut point = Vec::new();
    let mut std_error = Vec::new();
    let mut ci95 = Vec::new();
    for o in observables {
        let values = o.values(chain);
        let m = sample_mean(&values);
        let se = (batch_means_asvar(&values, REFERENCE_BATCHES)? / values.len() as f64).sqrt();
        point.push(m);
        std_error.push(se);
        ci95.push((m - z * se, m + z * se));
    }
    Ok(ReferenceReport {
        observables: observables.to_vec(),
        point,
        std_error,
        ci95,
        length: chain.len(),
        seed: chain.seed_used,
        sampler,
        accept_rate: chain.accept_rate,
    })
}
