use serde::Serialize;

use super::asvar::{batch_means_asvar, sample_mean, sample_variance};
use crate::error::{Error, Result};
use crate::samplers::ChainOutput;
use crate::zv::{ControlVariateMatrix, Monomial};

/// Exponent `2 + δ` used by [`moment_diagnostic`] unless told otherwise.
pub const DEFAULT_DELTA: f64 = 0.5;

const ZERO_MEAN_BATCHES: usize = 50;
const CHECKPOINTS: usize = 200;
const FIRST_CHECKPOINT: usize = 10;
const DEGENERATE_TOL: f64 = 1e-12;

/// Whether the running mean of a series has settled.
///
/// The running mean is recorded at log-spaced checkpoints from draw 10 to the
/// end. A series is flagged divergent when the largest running mean over the
/// second half of the series exceeds twice the median of the checkpoint
/// values. Meant for nonnegative series (squared gradients, absolute moments):
/// an infinite expectation shows up as rare huge terms that keep lifting the
/// running mean. Advisory only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCheck {
    pub final_mean: f64,
    pub second_half_max: f64,
    pub checkpoint_median: f64,
    pub divergent: bool,
    /// `(n, running mean after n draws)`.
    pub trace: Vec<(usize, f64)>,
}

pub fn running_mean_stability(values: &[f64]) -> StabilityCheck {
    let n = values.len();
    let checkpoints = log_checkpoints(n);
    let mut trace = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut sum = 0.0;
    let mut second_half_max = f64::NEG_INFINITY;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        let m = sum / (i + 1) as f64;
        if 2 * (i + 1) >= n {
            second_half_max = second_half_max.max(m);
        }
        if next.peek() == Some(&&(i + 1)) {
            trace.push((i + 1, m));
            next.next();
        }
    }
    let mut at_checkpoints: Vec<f64> = trace.iter().map(|(_, m)| *m).collect();
    at_checkpoints.sort_by(f64::total_cmp);
    let checkpoint_median = median_sorted(&at_checkpoints);
    StabilityCheck {
        final_mean: if n > 0 { sum / n as f64 } else { f64::NAN },
        second_half_max,
        checkpoint_median,
        divergent: second_half_max > 2.0 * checkpoint_median,
        trace,
    }
}

fn log_checkpoints(n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let first = FIRST_CHECKPOINT.min(n);
    let (lo, hi) = ((first as f64).ln(), (n as f64).ln());
    let mut points: Vec<usize> = (0..CHECKPOINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (CHECKPOINTS - 1) as f64).exp().round() as usize)
        .map(|c| c.clamp(first, n))
        .collect();
    points.dedup();
    points
}

fn median_sorted(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => xs[n / 2],
        n => 0.5 * (xs[n / 2 - 1] + xs[n / 2]),
    }
}

/// Zero-mean check for one control-variate column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroMeanColumn {
    pub monomial: Monomial,
    pub mean: f64,
    /// `mean / (asymptotic sd / √N)`; `None` for a degenerate column.
    pub z: Option<f64>,
    /// Constant column: the test does not apply.
    pub degenerate: bool,
}

/// Per-column z-scores of the control-variate means on the ordered chain,
/// with batch-means (50 batches) standard errors.
pub fn cv_zero_mean_test(cv: &ControlVariateMatrix) -> Result<Vec<ZeroMeanColumn>> {
    let n = cv.n_draws();
    if n < 1000 {
        return Err(Error::InsufficientSample(format!(
            "zero-mean test needs at least 1000 draws, got {n}"
        )));
    }
    let monomials: Vec<&Monomial> = cv.basis.active().collect();
    (0..cv.n_columns())
        .map(|k| {
            let col = cv.column(k);
            let mean = sample_mean(&col);
            let var = sample_variance(&col);
            let asvar = batch_means_asvar(&col, ZERO_MEAN_BATCHES)?;
            let degenerate = !(var > DEGENERATE_TOL * mean * mean) || !(asvar > 0.0);
            Ok(ZeroMeanColumn {
                monomial: monomials[k].clone(),
                mean,
                z: (!degenerate).then(|| mean / (asvar / n as f64).sqrt()),
                degenerate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinnikReport {
    /// Sample mean of `(∂ ln π/∂x_j)²` per coordinate.
    pub estimate: Vec<f64>,
    /// Batch-means standard error of each estimate.
    pub std_error: Vec<f64>,
    pub stability: Vec<StabilityCheck>,
}

impl LinnikReport {
    pub fn any_divergent(&self) -> bool {
        self.stability.iter().any(|s| s.divergent)
    }
}

/// Estimates the Linnik functional `E_π[(∂ ln π/∂x_j)²]` from the cached gradients.
pub fn linnik_estimate(chain: &ChainOutput) -> Result<LinnikReport> {
    let d = chain.dimension();
    let mut estimate = Vec::with_capacity(d);
    let mut std_error = Vec::with_capacity(d);
    let mut stability = Vec::with_capacity(d);
    for j in 0..d {
        let sq: Vec<f64> = chain.gradients().map(|g| g[j] * g[j]).collect();
        estimate.push(sample_mean(&sq));
        std_error.push((batch_means_asvar(&sq, ZERO_MEAN_BATCHES)? / sq.len() as f64).sqrt());
        stability.push(running_mean_stability(&sq));
    }
    Ok(LinnikReport {
        estimate,
        std_error,
        stability,
    })
}

/// Running-mean stability of `|g_k|^(2+δ)` for every control-variate column.
pub fn moment_diagnostic(cv: &ControlVariateMatrix, delta: f64) -> Result<Vec<StabilityCheck>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Setup(format!("delta must be positive, got {delta}")));
    }
    Ok((0..cv.n_columns())
        .map(|k| {
            let powered: Vec<f64> = cv.column(k).iter().map(|g| g.abs().powf(2.0 + delta)).collect();
            running_mean_stability(&powered)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_are_log_spaced_and_bounded() {
        let c = log_checkpoints(1_000_000);
        assert_eq!(c[0], 10);
        assert_eq!(*c.last().unwrap(), 1_000_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_checkpoints(5), vec![5]);
    }

    #[test]
    fn constant_series_is_stable() {
        let s = running_mean_stability(&[1.0; 5000]);
        assert!(!s.divergent);
        assert_eq!(s.final_mean, 1.0);
    }

    #[test]
    fn late_spike_is_flagged() {
        let mut xs = vec![1.0; 10_000];
        xs[7000] = 1e5;
        assert!(running_mean_stability(&xs).divergent);
    }
}
