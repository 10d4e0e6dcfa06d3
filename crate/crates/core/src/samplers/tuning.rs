//! Starting points and fixed proposal scales.
//!
//! Random-walk proposals are set once, before sampling, and never adapted.
//! Independent increments get `2.4/√d` times a rough per-coordinate posterior
//! scale; for the regression and GARCH posteriors that scale is the
//! conditional standard deviation `1/√(-H_jj)` of a Laplace approximation at
//! the mode. Laplace-shaped increments use `(2.4²/d)·(-H)⁻¹` as their
//! covariance, which lets the walk move along strongly correlated ridges.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::TargetModel;

/// Steps of the acceptance-rate pilot run before burn-in.
pub const PILOT_STEPS: usize = 500;

const MAX_NEWTON_ITERS: usize = 200;

/// How random-walk increments are shaped by the tuning step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProposalShape {
    /// Independent increments with per-coordinate scales.
    Independent,
    /// Increments correlated like the Laplace approximation at the start
    /// point. The toy targets fall back to independent increments.
    #[default]
    Laplace,
}

/// Per-coordinate scales and the correlation factor of a random walk whose
/// increment covariance is `(2.4²/d)·(-H)⁻¹`, `H` the Hessian of `ln π` at
/// `at`. Falls back to [`default_proposal_sd`] with independent increments for
/// the toy targets.
pub fn laplace_proposal(model: &TargetModel, at: &[f64]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if matches!(
        model,
        TargetModel::Gaussian { .. } | TargetModel::Exponential { .. } | TargetModel::Gamma { .. }
    ) {
        return Ok((default_proposal_sd(model, at)?, None));
    }
    let d = at.len();
    let neg_h = -fd_hessian(model, at)?;
    let cov = neg_h
        .cholesky()
        .ok_or_else(|| {
            Error::Setup(format!("log density is not locally concave at {at:?}"))
        })?
        .inverse();
    let marginal: Vec<f64> = (0..d).map(|j| cov[(j, j)].sqrt()).collect();
    let corr = DMatrix::from_fn(d, d, |i, j| cov[(i, j)] / (marginal[i] * marginal[j]));
    let factor = corr
        .cholesky()
        .ok_or_else(|| Error::Setup("Laplace correlation matrix is not positive definite".into()))?
        .l();
    let mut rows = vec![0.0; d * d];
    for i in 0..d {
        let norm = (0..=i).map(|k| factor[(i, k)].powi(2)).sum::<f64>().sqrt();
        for k in 0..=i {
            rows[i * d + k] = factor[(i, k)] / norm;
        }
    }
    let step = 2.4 / (d as f64).sqrt();
    Ok((marginal.iter().map(|s| step * s).collect(), Some(rows)))
}

/// A point in the support from which chains start: the mean for the toy
/// targets, the posterior mode otherwise.
pub fn default_init(model: &TargetModel) -> Result<Vec<f64>> {
    match model {
        TargetModel::Gaussian { mean, .. } => Ok(mean.clone()),
        TargetModel::Exponential { rate } => Ok(vec![1.0 / rate]),
        TargetModel::Gamma { shape, scale } => Ok(vec![shape * scale]),
        TargetModel::Probit(data) | TargetModel::Logit(data) => {
            find_mode(model, &vec![0.0; data.dimension()])
        }
        TargetModel::Garch(garch) => {
            let h0 = garch.series().h0();
            find_mode(model, &[0.1 * h0, 0.1, 0.8])
        }
    }
}

/// `2.4/√d` times a rough posterior scale per coordinate, evaluated around `at`.
pub fn default_proposal_sd(model: &TargetModel, at: &[f64]) -> Result<Vec<f64>> {
    let d = model.dimension() as f64;
    let scales = match model {
        TargetModel::Gaussian { var, .. } => var.iter().map(|v| v.sqrt()).collect(),
        TargetModel::Exponential { rate } => vec![1.0 / rate],
        TargetModel::Gamma { shape, scale } => vec![shape.sqrt() * scale],
        _ => laplace_scales(model, at)?,
    };
    Ok(scales.into_iter().map(|s| 2.4 / d.sqrt() * s).collect())
}

/// Conditional standard deviations `1/√(-H_jj)` of the Laplace approximation at `at`.
pub fn laplace_scales(model: &TargetModel, at: &[f64]) -> Result<Vec<f64>> {
    let hessian = fd_hessian(model, at)?;
    (0..at.len())
        .map(|j| {
            let h = hessian[(j, j)];
            if h < 0.0 && h.is_finite() {
                Ok(1.0 / (-h).sqrt())
            } else {
                Err(Error::Setup(format!(
                    "log density is not locally concave in coordinate {j} at {at:?}"
                )))
            }
        })
        .collect()
}

fn fd_step(x: f64) -> f64 {
    if x != 0.0 {
        1e-5 * x.abs()
    } else {
        1e-5
    }
}

/// Central differences of the analytic gradient, symmetrized.
fn fd_hessian(model: &TargetModel, at: &[f64]) -> Result<DMatrix<f64>> {
    let d = at.len();
    let mut h = DMatrix::zeros(d, d);
    let mut probe = at.to_vec();
    for k in 0..d {
        let step = fd_step(at[k]);
        probe[k] = at[k] + step;
        let up = model.grad_log_density(&probe)?;
        probe[k] = at[k] - step;
        let down = model.grad_log_density(&probe)?;
        probe[k] = at[k];
        for j in 0..d {
            h[(j, k)] = (up[j] - down[j]) / (2.0 * step);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Damped Newton ascent on the log density, starting from `start`.
///
/// Falls back to a diagonally scaled gradient step where the Hessian is not
/// negative definite, and backtracks to stay inside the support.
pub fn find_mode(model: &TargetModel, start: &[f64]) -> Result<Vec<f64>> {
    let mut x = start.to_vec();
    let mut lp = model.log_density(&x)?;
    for _ in 0..MAX_NEWTON_ITERS {
        let g = model.grad_log_density(&x)?;
        let h = fd_hessian(model, &x)?;
        let neg_h = -&h;
        let direction: Vec<f64> = match neg_h.clone().cholesky() {
            Some(chol) => chol
                .solve(&nalgebra::DVector::from_column_slice(&g))
                .iter()
                .copied()
                .collect(),
            None => (0..g.len())
                .map(|j| g[j] / h[(j, j)].abs().max(f64::MIN_POSITIVE))
                .collect(),
        };

        let mut t = 1.0;
        let mut improved = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&direction).map(|(a, b)| a + t * b).collect();
            if model.in_interior(&cand) {
                let lc = model.log_density(&cand)?;
                if lc.is_finite() && lc >= lp {
                    improved = Some((cand, lc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, lc)) = improved else { break };
        let gain = lc - lp;
        x = cand;
        lp = lc;
        if gain <= 1e-12 * (1.0 + lp.abs()) && t == 1.0 {
            break;
        }
    }
    Ok(x)
}
