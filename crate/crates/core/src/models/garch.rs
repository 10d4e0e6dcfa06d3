//! Normal GARCH(1,1) posterior.
//!
//! Index convention: the observed returns are `r_1..r_T` (`returns[0..T]`),
//! `r_0 := 0`, and the variance path is seeded by `h_0`, so
//!
//! ```text
//! h_1 = ω1 + ω3·h_0
//! h_t = ω1 + ω3·h_{t-1} + ω2·r_{t-1}²      t = 2..T
//! ```
//!
//! The likelihood runs over `t = 1..T`. With this seed `∂h_t/∂ω1 = (1 - ω3^t)/(1 - ω3)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsSeries {
    returns: Vec<f64>,
    h0: f64,
}

impl ReturnsSeries {
    pub fn new(returns: Vec<f64>, h0: f64) -> Result<Self> {
        if returns.len() < 2 {
            return Err(Error::Setup(format!(
                "returns series needs T >= 2, got {}",
                returns.len()
            )));
        }
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::Setup(format!("return {i} is not finite")));
        }
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(Error::DegenerateData(format!(
                "pre-sample variance h0 must be > 0, got {h0}"
            )));
        }
        Ok(ReturnsSeries { returns, h0 })
    }

    /// Seeds `h0` with the sample variance of the returns.
    pub fn from_returns(returns: Vec<f64>) -> Result<Self> {
        let h0 = sample_variance(&returns);
        ReturnsSeries::new(returns, h0)
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Standard deviations of the independent normal priors on `ω`, truncated to
/// the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchPrior {
    prior_sd: [f64; 3],
}

impl GarchPrior {
    pub fn new(prior_sd: [f64; 3]) -> Result<Self> {
        if prior_sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Domain(format!(
                "GARCH prior sds must be positive and finite, got {prior_sd:?}"
            )));
        }
        Ok(GarchPrior { prior_sd })
    }

    pub fn prior_sd(&self) -> [f64; 3] {
        self.prior_sd
    }
}

impl Default for GarchPrior {
    fn default() -> Self {
        GarchPrior {
            prior_sd: [1000.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchModel {
    series: ReturnsSeries,
    prior: GarchPrior,
}

pub(crate) fn support_violation(omega: &[f64]) -> Option<String> {
    if omega[0] <= 0.0 {
        Some(format!("omega_1 > 0 violated (omega_1 = {})", omega[0]))
    } else if omega[1] < 0.0 {
        Some(format!("omega_2 >= 0 violated (omega_2 = {})", omega[1]))
    } else if omega[2] < 0.0 {
        Some(format!("omega_3 >= 0 violated (omega_3 = {})", omega[2]))
    } else {
        None
    }
}

impl GarchModel {
    pub fn new(series: ReturnsSeries, prior: GarchPrior) -> Self {
        GarchModel { series, prior }
    }

    pub fn series(&self) -> &ReturnsSeries {
        &self.series
    }

    pub fn prior(&self) -> &GarchPrior {
        &self.prior
    }

    fn log_prior(&self, omega: &[f64]) -> f64 {
        -0.5 * omega
            .iter()
            .zip(self.prior.prior_sd)
            .map(|(w, s)| (w / s) * (w / s))
            .sum::<f64>()
    }

    pub(crate) fn log_posterior(&self, omega: &[f64]) -> f64 {
        let [w1, w2, w3] = [omega[0], omega[1], omega[2]];
        let r = &self.series.returns;
        let mut h = w1 + w3 * self.series.h0;
        let mut acc = h.ln() + r[0] * r[0] / h;
        for t in 1..r.len() {
            h = w1 + w3 * h + w2 * r[t - 1] * r[t - 1];
            acc += h.ln() + r[t] * r[t] / h;
        }
        self.log_prior(omega) - 0.5 * acc
    }

    pub(crate) fn grad_log_posterior(&self, omega: &[f64]) -> [f64; 3] {
        let [w1, w2, w3] = [omega[0], omega[1], omega[2]];
        let r = &self.series.returns;
        let mut h = w1 + w3 * self.series.h0;
        let mut dh = [1.0, 0.0, self.series.h0];
        let mut acc = [0.0; 3];
        for t in 0..r.len() {
            if t > 0 {
                let r2 = r[t - 1] * r[t - 1];
                dh = [1.0 + w3 * dh[0], r2 + w3 * dh[1], h + w3 * dh[2]];
                h = w1 + w3 * h + w2 * r2;
            }
            let weight = 1.0 / h - r[t] * r[t] / (h * h);
            for i in 0..3 {
                acc[i] += weight * dh[i];
            }
        }
        let sd = self.prior.prior_sd;
        std::array::from_fn(|i| -omega[i] / (sd[i] * sd[i]) - 0.5 * acc[i])
    }
}

fn check_omega(omega: &[f64]) -> Result<()> {
    if omega.len() != 3 {
        return Err(Error::Setup(format!(
            "GARCH(1,1) has 3 parameters, got {}",
            omega.len()
        )));
    }
    match support_violation(omega) {
        Some(v) => Err(Error::Domain(format!("garch: {v}"))),
        None => Ok(()),
    }
}

/// `h_1..h_T` for the given parameters.
pub fn garch_variance_path(series: &ReturnsSeries, omega: &[f64]) -> Result<Vec<f64>> {
    check_omega(omega)?;
    let [w1, w2, w3] = [omega[0], omega[1], omega[2]];
    let r = series.returns();
    let mut path = Vec::with_capacity(r.len());
    let mut h = w1 + w3 * series.h0();
    path.push(h);
    for t in 1..r.len() {
        h = w1 + w3 * h + w2 * r[t - 1] * r[t - 1];
        path.push(h);
    }
    Ok(path)
}

/// `∂h_t/∂ω_i` for `t = 1..T`, `i = 1..3`.
pub fn garch_h_derivatives(series: &ReturnsSeries, omega: &[f64]) -> Result<Vec<[f64; 3]>> {
    let path = garch_variance_path(series, omega)?;
    let w3 = omega[2];
    let r = series.returns();
    let mut out = Vec::with_capacity(r.len());
    let mut dh = [1.0, 0.0, series.h0()];
    out.push(dh);
    for t in 1..r.len() {
        dh = [
            1.0 + w3 * dh[0],
            r[t - 1] * r[t - 1] + w3 * dh[1],
            path[t - 1] + w3 * dh[2],
        ];
        out.push(dh);
    }
    Ok(out)
}
