use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::control_variates::ControlVariateMatrix;
use crate::error::{Error, Result};

/// Which sample moments enter the coefficient solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentConvention {
    /// Sample covariances: the least-squares fit of `f` on the control
    /// variates with an intercept. Exactly equivariant under `f -> c·f + b`.
    #[default]
    Centered,
    /// Non-centered moments `E[ggᵀ]`, `E[gf]`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub convention: MomentConvention,
    /// A column is dropped when its variance is below this fraction of its mean square.
    pub degenerate_tol: f64,
    /// Condition number of the scaled moment matrix above which a ridge is added.
    pub ridge_condition: f64,
    /// Ridge size relative to `trace/K` of the scaled moment matrix.
    pub ridge_factor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            convention: MomentConvention::Centered,
            degenerate_tol: 1e-12,
            ridge_condition: 1e10,
            ridge_factor: 1e-10,
        }
    }
}

/// Fitted control-variate coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ZVFit {
    /// One per column of the control-variate matrix; zero for dropped columns.
    pub coefficients: Vec<f64>,
    pub sigma_gg: DMatrix<f64>,
    pub sigma_gf: Vec<f64>,
    /// Condition number of the column-scaled moment matrix of the kept columns.
    pub condition_estimate: f64,
    pub dropped_columns: Vec<usize>,
    pub ridge_applied: bool,
    /// Set when every column was degenerate and the fit is empty.
    pub all_degenerate: bool,
    pub convention: MomentConvention,
}

impl ZVFit {
    /// The identity fit: every coefficient zero.
    pub fn zero(k: usize) -> Self {
        ZVFit {
            coefficients: vec![0.0; k],
            sigma_gg: DMatrix::zeros(k, k),
            sigma_gf: vec![0.0; k],
            condition_estimate: 1.0,
            dropped_columns: Vec::new(),
            ridge_applied: false,
            all_degenerate: false,
            convention: MomentConvention::Centered,
        }
    }
}

pub fn fit_coefficients(cv: &ControlVariateMatrix, f_values: &[f64]) -> Result<ZVFit> {
    fit_coefficients_with(cv, f_values, &FitOptions::default())
}

/// Variance-minimising coefficients `c = -Σ_gg⁻¹ σ_gf`.
///
/// Degenerate (numerically constant) columns are dropped first. The remaining
/// system is scaled to unit diagonal and solved through its eigendecomposition;
/// when the condition number exceeds `ridge_condition` a ridge is added.
pub fn fit_coefficients_with(
    cv: &ControlVariateMatrix,
    f_values: &[f64],
    options: &FitOptions,
) -> Result<ZVFit> {
    let g = &cv.values;
    let (n, k) = (g.nrows(), g.ncols());
    if f_values.len() != n {
        return Err(Error::Setup(format!(
            "{} observable values for {n} control-variate rows",
            f_values.len()
        )));
    }
    if n == 0 {
        return Err(Error::InsufficientSample("empty chain".into()));
    }
    let nf = n as f64;
    let g_mean: Vec<f64> = (0..k).map(|c| g.column(c).sum() / nf).collect();
    let f_mean = f_values.iter().sum::<f64>() / nf;

    let (gc, fc): (DMatrix<f64>, Vec<f64>) = match options.convention {
        MomentConvention::Centered => (
            DMatrix::from_fn(n, k, |i, c| g[(i, c)] - g_mean[c]),
            f_values.iter().map(|f| f - f_mean).collect(),
        ),
        MomentConvention::Raw => (g.clone(), f_values.to_vec()),
    };
    let sigma_gg = (gc.transpose() * &gc) / nf;
    let sigma_gf: Vec<f64> = (gc.transpose() * DVector::from_column_slice(&fc))
        .iter()
        .map(|v| v / nf)
        .collect();

    let mut dropped = Vec::new();
    for c in 0..k {
        let col = g.column(c);
        let mean_sq = col.iter().map(|v| v * v).sum::<f64>() / nf;
        let var = col.iter().map(|v| (v - g_mean[c]).powi(2)).sum::<f64>() / nf;
        if !(var > options.degenerate_tol * mean_sq) {
            dropped.push(c);
        }
    }
    let kept: Vec<usize> = (0..k).filter(|c| !dropped.contains(c)).collect();

    let mut fit = ZVFit {
        coefficients: vec![0.0; k],
        sigma_gg,
        sigma_gf,
        condition_estimate: 1.0,
        dropped_columns: dropped,
        ridge_applied: false,
        all_degenerate: kept.is_empty(),
        convention: options.convention,
    };
    if kept.is_empty() {
        return Ok(fit);
    }
    if n <= kept.len() {
        return Err(Error::InsufficientSample(format!(
            "{n} draws for {} control variates; need more draws than control variates",
            kept.len()
        )));
    }

    let m = kept.len();
    let inv_sd: Vec<f64> = kept.iter().map(|&c| 1.0 / fit.sigma_gg[(c, c)].sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |a, b| {
        fit.sigma_gg[(kept[a], kept[b])] * inv_sd[a] * inv_sd[b]
    });
    let rhs = DVector::from_fn(m, |a, _| fit.sigma_gf[kept[a]] * inv_sd[a]);

    let eig = SymmetricEigen::new(scaled);
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    fit.condition_estimate = if lmin > 0.0 { (lmax / lmin).max(1.0) } else { f64::INFINITY };
    let ridge = if fit.condition_estimate > options.ridge_condition {
        fit.ridge_applied = true;
        // trace of the unit-diagonal matrix is m
        options.ridge_factor * eig.eigenvalues.sum() / m as f64
    } else {
        0.0
    };
    let proj = eig.eigenvectors.transpose() * rhs;
    let mut y = DVector::zeros(m);
    for (idx, lambda) in eig.eigenvalues.iter().enumerate() {
        let denom = lambda.max(0.0) + ridge;
        if denom > 0.0 {
            y += eig.eigenvectors.column(idx) * (proj[idx] / denom);
        }
    }
    for (a, &c) in kept.iter().enumerate() {
        fit.coefficients[c] = -y[a] * inv_sd[a];
    }
    if fit.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Setup("coefficient solve produced non-finite values".into()));
    }
    Ok(fit)
}

/// `f~_i = f_i + Σ_k c_k g_k(x^i)`.
pub fn renormalize(f_values: &[f64], cv: &ControlVariateMatrix, fit: &ZVFit) -> Result<Vec<f64>> {
    if f_values.len() != cv.n_draws() || fit.coefficients.len() != cv.n_columns() {
        return Err(Error::Setup(format!(
            "renormalize: {} values, {}×{} control variates, {} coefficients",
            f_values.len(),
            cv.n_draws(),
            cv.n_columns(),
            fit.coefficients.len()
        )));
    }
    let coef = DVector::from_column_slice(&fit.coefficients);
    let shift = &cv.values * coef;
    Ok(f_values.iter().zip(shift.iter()).map(|(f, s)| f + s).collect())
}
