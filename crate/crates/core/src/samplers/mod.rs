//! Markov chain samplers.
//!
//! Every sampler run owns a single [`ChainRng`] stream seeded from
//! [`SamplerConfig::seed`]; independent replications use `base_seed + index`.
//! Gradients of the log target are evaluated once per retained draw and stored
//! alongside it, so control variates can be built later without touching the
//! model again.

mod gibbs;
mod metropolis;
mod truncnorm;
mod tuning;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use gibbs::gibbs_probit;
pub use metropolis::rw_metropolis;
pub use truncnorm::truncated_normal_draw;
pub use tuning::{
    default_init, default_proposal_sd, find_mode, laplace_proposal, laplace_scales, ProposalShape,
    PILOT_STEPS,
};

use crate::error::{Error, Result};
use crate::models::{ParamVector, TargetModel};

/// The generator family used for every stream in the crate.
pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Albert–Chib data augmentation; probit only.
    Gibbs,
    RandomWalk,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerKind::Gibbs => "gibbs",
            SamplerKind::RandomWalk => "random_walk",
        })
    }
}

impl SamplerKind {
    /// Gibbs for probit, random-walk Metropolis for everything else.
    pub fn default_for(model: &TargetModel) -> Self {
        match model {
            TargetModel::Probit(_) => SamplerKind::Gibbs,
            _ => SamplerKind::RandomWalk,
        }
    }
}

/// Runs the chosen sampler on `model`.
pub fn run_chain(model: &TargetModel, kind: SamplerKind, config: &SamplerConfig) -> Result<ChainOutput> {
    match (kind, model) {
        (SamplerKind::Gibbs, TargetModel::Probit(data)) => gibbs_probit(data, config),
        (SamplerKind::Gibbs, _) => Err(Error::Setup(format!(
            "the Gibbs sampler is only available for probit, not {}",
            model.tag()
        ))),
        (SamplerKind::RandomWalk, _) => rw_metropolis(model, config),
    }
}

/// Sampler settings with the default starting point and, for random-walk
/// chains, a proposal of the requested shape tuned at that point.
pub fn tuned_config(
    model: &TargetModel,
    kind: SamplerKind,
    shape: ProposalShape,
    burn_in: usize,
    length: usize,
    seed: u64,
) -> Result<SamplerConfig> {
    let init = default_init(model)?;
    let mut config = SamplerConfig::new(burn_in, length, seed, ParamVector::new(init.clone())?);
    if kind == SamplerKind::RandomWalk {
        match shape {
            ProposalShape::Independent => {
                config.proposal_sd = Some(default_proposal_sd(model, &init)?);
            }
            ProposalShape::Laplace => {
                let (sd, corr) = laplace_proposal(model, &init)?;
                config.proposal_sd = Some(sd);
                config.proposal_correlation = corr;
            }
        }
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub length: usize,
    pub seed: u64,
    /// Per-coordinate random-walk scale. Ignored by the Gibbs sampler.
    pub proposal_sd: Option<Vec<f64>>,
    /// Row-major lower Cholesky factor of the correlation matrix of the
    /// random-walk increments; independent increments when absent.
    #[serde(default)]
    pub proposal_correlation: Option<Vec<f64>>,
    pub init: ParamVector,
}

impl SamplerConfig {
    pub fn new(burn_in: usize, length: usize, seed: u64, init: ParamVector) -> Self {
        SamplerConfig {
            burn_in,
            length,
            seed,
            proposal_sd: None,
            proposal_correlation: None,
            init,
        }
    }

    pub fn with_proposal_sd(mut self, proposal_sd: Vec<f64>) -> Self {
        self.proposal_sd = Some(proposal_sd);
        self
    }

    fn validate(&self, model: &TargetModel) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Setup("chain length must be >= 1".into()));
        }
        if self.init.len() != model.dimension() {
            return Err(Error::Setup(format!(
                "init has dimension {}, model {} has dimension {}",
                self.init.len(),
                model.tag(),
                model.dimension()
            )));
        }
        if !model.in_support(&self.init) {
            return Err(Error::Domain(format!(
                "initial state {:?} is outside the {} support",
                &*self.init,
                model.tag()
            )));
        }
        Ok(())
    }
}

/// Retained draws of one chain, with the gradient of `ln π` at each draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    dim: usize,
    draws: Vec<f64>,
    gradients: Vec<f64>,
    pub accept_rate: f64,
    /// Acceptance rate of the pre-burn-in pilot (random-walk chains only).
    pub pilot_accept_rate: Option<f64>,
    pub seed_used: u64,
    pub model_tag: String,
}

impl ChainOutput {
    /// Assembles a chain from row-major draw and gradient buffers.
    pub fn from_parts(
        dim: usize,
        draws: Vec<f64>,
        gradients: Vec<f64>,
        accept_rate: f64,
        seed_used: u64,
        model_tag: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 || !draws.len().is_multiple_of(dim) || draws.len() != gradients.len() {
            return Err(Error::Setup(format!(
                "chain buffers do not match dimension {dim}: {} draws, {} gradients",
                draws.len(),
                gradients.len()
            )));
        }
        if !(0.0..=1.0).contains(&accept_rate) {
            return Err(Error::Setup(format!("accept rate {accept_rate} outside [0, 1]")));
        }
        Ok(ChainOutput {
            dim,
            draws,
            gradients,
            accept_rate,
            pilot_accept_rate: None,
            seed_used,
            model_tag: model_tag.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn gradient(&self, i: usize) -> &[f64] {
        &self.gradients[i * self.dim..(i + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.draws.chunks_exact(self.dim)
    }

    pub fn gradients(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.gradients.chunks_exact(self.dim)
    }

    /// Trace of coordinate `j`.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.draws().map(|x| x[j]).collect()
    }
}

/// Accumulates retained draws and their gradients.
struct ChainBuilder {
    dim: usize,
    draws: Vec<f64>,
    gradients: Vec<f64>,
}

impl ChainBuilder {
    fn with_capacity(dim: usize, length: usize) -> Self {
        ChainBuilder {
            dim,
            draws: Vec::with_capacity(dim * length),
            gradients: Vec::with_capacity(dim * length),
        }
    }

    fn push(&mut self, draw: &[f64], gradient: &[f64]) {
        debug_assert_eq!(draw.len(), self.dim);
        self.draws.extend_from_slice(draw);
        self.gradients.extend_from_slice(gradient);
    }

    fn finish(self, accept_rate: f64, seed: u64, tag: &str) -> ChainOutput {
        ChainOutput {
            dim: self.dim,
            draws: self.draws,
            gradients: self.gradients,
            accept_rate,
            pilot_accept_rate: None,
            seed_used: seed,
            model_tag: tag.to_string(),
        }
    }
}
