//! Target distributions.
//!
//! Each target exposes an unnormalized log density, its analytic gradient and a
//! support predicate. Additive constants are dropped from log densities, always
//! the same ones for a given target.

mod binary;
mod garch;

use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use binary::BinaryRegressionData;
pub use garch::{garch_h_derivatives, garch_variance_path, GarchModel, GarchPrior, ReturnsSeries};

use crate::error::{Error, Result};
use crate::special::{inv_mills, log_norm_cdf};

/// A point of the parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "parameter component {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(ParamVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ParamVector::new(values)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Vec<f64> {
        p.0
    }
}

#[derive(Debug, Clone)]
pub enum TargetModel {
    /// Independent normal coordinates, `N(mean_j, var_j)`.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// `λ e^{-λx}` on `(0, ∞)`.
    Exponential { rate: f64 },
    /// Shape–scale gamma, `x^{α-1} e^{-x/θ}` on `(0, ∞)`.
    Gamma { shape: f64, scale: f64 },
    /// Probit regression with a flat prior.
    Probit(Arc<BinaryRegressionData>),
    /// Logit regression with a flat prior.
    Logit(Arc<BinaryRegressionData>),
    Garch(Arc<GarchModel>),
}

impl TargetModel {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        Self::gaussian_diag(vec![mean], vec![var])
    }

    pub fn gaussian_diag(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != var.len() {
            return Err(Error::Setup(format!(
                "gaussian needs matching nonempty mean/var vectors (got {} and {})",
                mean.len(),
                var.len()
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) || var.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(
                "gaussian needs finite means and positive finite variances".into(),
            ));
        }
        Ok(TargetModel::Gaussian { mean, var })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(TargetModel::Exponential { rate })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "gamma needs shape > 0 and scale > 0, got ({shape}, {scale})"
            )));
        }
        Ok(TargetModel::Gamma { shape, scale })
    }

    pub fn probit(data: BinaryRegressionData) -> Self {
        TargetModel::Probit(Arc::new(data))
    }

    pub fn logit(data: BinaryRegressionData) -> Self {
        TargetModel::Logit(Arc::new(data))
    }

    pub fn garch(series: ReturnsSeries, prior: GarchPrior) -> Self {
        TargetModel::Garch(Arc::new(GarchModel::new(series, prior)))
    }

    pub fn dimension(&self) -> usize {
        match self {
            TargetModel::Gaussian { mean, .. } => mean.len(),
            TargetModel::Exponential { .. } | TargetModel::Gamma { .. } => 1,
            TargetModel::Probit(data) | TargetModel::Logit(data) => data.dimension(),
            TargetModel::Garch(_) => 3,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            TargetModel::Gaussian { .. } => "gaussian",
            TargetModel::Exponential { .. } => "exponential",
            TargetModel::Gamma { .. } => "gamma",
            TargetModel::Probit(_) => "probit",
            TargetModel::Logit(_) => "logit",
            TargetModel::Garch(_) => "garch",
        }
    }

    fn check_dimension(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.dimension() {
            return Err(Error::Setup(format!(
                "{} model has dimension {}, got a point of dimension {}",
                self.tag(),
                self.dimension(),
                beta.len()
            )));
        }
        Ok(())
    }

    /// Names the first violated support constraint, if any.
    fn support_violation(&self, beta: &[f64]) -> Option<String> {
        if let Some(i) = beta.iter().position(|v| !v.is_finite()) {
            return Some(format!("component {i} is not finite"));
        }
        match self {
            TargetModel::Exponential { .. } | TargetModel::Gamma { .. } if beta[0] <= 0.0 => {
                Some(format!("x > 0 violated (x = {})", beta[0]))
            }
            TargetModel::Garch(_) => garch::support_violation(beta),
            _ => None,
        }
    }

    pub fn in_support(&self, beta: &[f64]) -> bool {
        beta.len() == self.dimension() && self.support_violation(beta).is_none()
    }

    /// Support membership with every boundary excluded: the points where the
    /// analytic gradient is defined.
    pub fn in_interior(&self, beta: &[f64]) -> bool {
        self.in_support(beta)
            && match self {
                TargetModel::Garch(_) => beta.iter().all(|w| *w > 0.0),
                _ => true,
            }
    }

    /// Log density, or `-∞` outside the support. Used by the samplers, where a
    /// proposal outside the support is simply rejected.
    pub fn log_density_or_neg_inf(&self, beta: &[f64]) -> f64 {
        if !self.in_support(beta) {
            return f64::NEG_INFINITY;
        }
        self.log_density_unchecked(beta)
    }

    pub fn log_density(&self, beta: &[f64]) -> Result<f64> {
        self.check_dimension(beta)?;
        if let Some(v) = self.support_violation(beta) {
            return Err(Error::Domain(format!("{}: {v}", self.tag())));
        }
        Ok(self.log_density_unchecked(beta))
    }

    fn log_density_unchecked(&self, beta: &[f64]) -> f64 {
        match self {
            TargetModel::Gaussian { mean, var } => {
                -0.5 * beta
                    .iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((x, m), v)| (x - m) * (x - m) / v)
                    .sum::<f64>()
            }
            TargetModel::Exponential { rate } => -rate * beta[0],
            TargetModel::Gamma { shape, scale } => (shape - 1.0) * beta[0].ln() - beta[0] / scale,
            TargetModel::Probit(data) => data
                .rows()
                .map(|(x, y)| {
                    let eta = dot(x, beta);
                    if y {
                        log_norm_cdf(eta)
                    } else {
                        log_norm_cdf(-eta)
                    }
                })
                .sum(),
            TargetModel::Logit(data) => data
                .rows()
                .map(|(x, y)| {
                    let eta = dot(x, beta);
                    (if y { eta } else { 0.0 }) - softplus(eta)
                })
                .sum(),
            TargetModel::Garch(model) => model.log_posterior(beta),
        }
    }

    /// Analytic `∇ ln π(β)`. Requires `β` strictly inside the support.
    pub fn grad_log_density(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension()];
        self.grad_log_density_into(beta, &mut out)?;
        Ok(out)
    }

    pub fn grad_log_density_into(&self, beta: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dimension(beta)?;
        if let Some(v) = self.support_violation(beta) {
            return Err(Error::Domain(format!("{}: {v}", self.tag())));
        }
        if let TargetModel::Garch(_) = self {
            if let Some(i) = beta.iter().position(|w| *w <= 0.0) {
                return Err(Error::Domain(format!(
                    "garch: gradient needs an interior point, omega_{} = {} is on the boundary",
                    i + 1,
                    beta[i]
                )));
            }
        }
        out.iter_mut().for_each(|g| *g = 0.0);
        match self {
            TargetModel::Gaussian { mean, var } => {
                for j in 0..beta.len() {
                    out[j] = (mean[j] - beta[j]) / var[j];
                }
            }
            TargetModel::Exponential { rate } => out[0] = -rate,
            TargetModel::Gamma { shape, scale } => out[0] = (shape - 1.0) / beta[0] - 1.0 / scale,
            TargetModel::Probit(data) => {
                for (x, y) in data.rows() {
                    let eta = dot(x, beta);
                    let w = if y { inv_mills(eta) } else { -inv_mills(-eta) };
                    axpy(w, x, out);
                }
            }
            TargetModel::Logit(data) => {
                for (x, y) in data.rows() {
                    let eta = dot(x, beta);
                    let w = (if y { 1.0 } else { 0.0 }) - logistic(eta);
                    axpy(w, x, out);
                }
            }
            TargetModel::Garch(model) => {
                let g = model.grad_log_posterior(beta);
                out.copy_from_slice(&g);
            }
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(w: f64, x: &[f64], out: &mut [f64]) {
    for (o, xi) in out.iter_mut().zip(x) {
        *o += w * xi;
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
