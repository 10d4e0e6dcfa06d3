use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{chain_rng, ChainBuilder, ChainOutput, SamplerConfig, PILOT_STEPS};
use crate::error::{Error, Result};
use crate::models::TargetModel;

struct Walker<'a> {
    model: &'a TargetModel,
    scale: &'a [f64],
    /// Row-major lower Cholesky factor of the increment correlation matrix.
    correlation: Option<&'a [f64]>,
    noise: Vec<f64>,
    state: Vec<f64>,
    log_density: f64,
    proposal: Vec<f64>,
}

impl Walker<'_> {
    /// One random-walk step; returns whether the proposal was accepted.
    fn step<R: Rng>(&mut self, rng: &mut R) -> Result<bool> {
        for e in self.noise.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let d = self.state.len();
        for j in 0..d {
            let eps = match self.correlation {
                Some(l) => (0..=j).map(|k| l[j * d + k] * self.noise[k]).sum(),
                None => self.noise[j],
            };
            self.proposal[j] = self.state[j] + self.scale[j] * eps;
        }
        let u: f64 = rng.sample(Open01);
        if !self.model.in_support(&self.proposal) {
            return Ok(false);
        }
        let lp = self.model.log_density(&self.proposal)?;
        if !lp.is_finite() {
            return Err(Error::NonFinite {
                state: self.proposal.clone(),
            });
        }
        if u.ln() < lp - self.log_density {
            std::mem::swap(&mut self.state, &mut self.proposal);
            self.log_density = lp;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Random-walk Metropolis–Hastings with Gaussian increments.
///
/// Increment `j` has standard deviation `proposal_sd[j]`; increments are
/// independent unless [`SamplerConfig::proposal_correlation`] is set.
/// Proposals outside the model support are rejected. A fixed pilot of
/// [`PILOT_STEPS`] steps runs before burn-in; its acceptance rate is reported
/// in [`ChainOutput::pilot_accept_rate`] and nothing is adapted from it.
pub fn rw_metropolis(model: &TargetModel, config: &SamplerConfig) -> Result<ChainOutput> {
    config.validate(model)?;
    let d = model.dimension();
    let scale = config
        .proposal_sd
        .as_deref()
        .ok_or_else(|| Error::Setup("random-walk Metropolis needs proposal_sd".into()))?;
    if scale.len() != d || scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::Setup(format!(
            "proposal_sd must hold {d} positive finite entries, got {scale:?}"
        )));
    }
    let correlation = config.proposal_correlation.as_deref();
    if let Some(l) = correlation {
        check_correlation_factor(l, d)?;
    }
    let log_density = model.log_density(&config.init)?;
    if !log_density.is_finite() {
        return Err(Error::NonFinite {
            state: config.init.to_vec(),
        });
    }

    let mut rng = chain_rng(config.seed);
    let mut walker = Walker {
        model,
        scale,
        correlation,
        noise: vec![0.0; d],
        state: config.init.to_vec(),
        log_density,
        proposal: vec![0.0; d],
    };

    let mut pilot_accepted = 0usize;
    for _ in 0..PILOT_STEPS {
        pilot_accepted += walker.step(&mut rng)? as usize;
    }
    for _ in 0..config.burn_in {
        walker.step(&mut rng)?;
    }

    let mut chain = ChainBuilder::with_capacity(d, config.length);
    let mut gradient = model.grad_log_density(&walker.state)?;
    let mut accepted = 0usize;
    for _ in 0..config.length {
        if walker.step(&mut rng)? {
            accepted += 1;
            model.grad_log_density_into(&walker.state, &mut gradient)?;
        }
        chain.push(&walker.state, &gradient);
    }

    let mut out = chain.finish(
        accepted as f64 / config.length as f64,
        config.seed,
        model.tag(),
    );
    out.pilot_accept_rate = Some(pilot_accepted as f64 / PILOT_STEPS as f64);
    Ok(out)
}

fn check_correlation_factor(l: &[f64], d: usize) -> Result<()> {
    let bad = |why: &str| Err(Error::Setup(format!("proposal_correlation {why}")));
    if l.len() != d * d {
        return bad(&format!("must hold {} entries, got {}", d * d, l.len()));
    }
    for j in 0..d {
        let row = &l[j * d..(j + 1) * d];
        if row[j + 1..].iter().any(|v| *v != 0.0) || !(row[j] > 0.0) {
            return bad("must be lower triangular with a positive diagonal");
        }
        let norm: f64 = row.iter().map(|v| v * v).sum();
        if !((norm - 1.0).abs() < 1e-8) {
            return bad(&format!("row {} must have unit norm, got {norm}", j + 1));
        }
    }
    Ok(())
}
