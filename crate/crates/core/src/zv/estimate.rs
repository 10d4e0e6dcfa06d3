use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::basis::{monomial_basis, Monomial};
use super::control_variates::{eval_control_variates_standardized, ControlVariateMatrix, Standardization};
use super::fit::{fit_coefficients_with, renormalize, FitOptions, ZVFit};
use crate::error::{Error, Result};
use crate::models::TargetModel;
use crate::samplers::ChainOutput;

/// Observables supported by the experiment runner: coordinate projections and
/// two fixed transforms of a coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    /// `x_k` (0-based index; written `x1`, `x2`, ...).
    Coordinate(usize),
    /// `x_k²`, written `x1^2`.
    Square(usize),
    /// `exp(x_k)`, written `exp(x1)`.
    Exp(usize),
}

impl Observable {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Observable::Coordinate(k) => x[k],
            Observable::Square(k) => x[k] * x[k],
            Observable::Exp(k) => x[k].exp(),
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            Observable::Coordinate(k) | Observable::Square(k) | Observable::Exp(k) => k,
        }
    }

    pub fn values(&self, chain: &ChainOutput) -> Vec<f64> {
        chain.draws().map(|x| self.eval(x)).collect()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Observable::Coordinate(k) => write!(f, "x{}", k + 1),
            Observable::Square(k) => write!(f, "x{}^2", k + 1),
            Observable::Exp(k) => write!(f, "exp(x{})", k + 1),
        }
    }
}

fn parse_coordinate(s: &str) -> Option<usize> {
    let idx: usize = s.strip_prefix('x')?.parse().ok()?;
    idx.checked_sub(1)
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = if let Some(inner) = s.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
            parse_coordinate(inner).map(Observable::Exp)
        } else if let Some(base) = s.strip_suffix("^2") {
            parse_coordinate(base).map(Observable::Square)
        } else {
            parse_coordinate(s).map(Observable::Coordinate)
        };
        parsed.ok_or_else(|| {
            Error::Config(format!(
                "unknown observable {s:?}; expected xK, xK^2 or exp(xK) with K >= 1"
            ))
        })
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

/// Exclusions needed for unbiasedness on targets whose density does not vanish
/// at the boundary of the support: the pure linear monomial on the half-line
/// targets. The other targets use the full basis.
pub fn default_exclusions(model: &TargetModel) -> Vec<Monomial> {
    match model {
        TargetModel::Exponential { .. } | TargetModel::Gamma { .. } => vec![vec![1]],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Coefficients fitted on one chain, applied to an independent one.
    TwoChain,
    /// Fit and evaluation on the same chain.
    SingleChain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvOptions {
    pub degree: usize,
    pub exclusions: Vec<Monomial>,
    /// Evaluate monomials in coordinates standardized on the fit chain.
    pub standardize: bool,
    pub fit: FitOptions,
}

impl ZvOptions {
    pub fn new(degree: usize, exclusions: Vec<Monomial>) -> Self {
        ZvOptions {
            degree,
            exclusions,
            standardize: true,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvEstimate {
    pub estimate: f64,
    /// Plain chain average of `f` over the evaluation chain.
    pub ordinary: f64,
    pub fit: ZVFit,
    pub ftilde: Vec<f64>,
    pub protocol: Protocol,
}

/// Control variates on the fit chain and the evaluation chain.
struct Prepared {
    fit_cv: ControlVariateMatrix,
    eval_cv: Option<ControlVariateMatrix>,
}

fn prepare(
    model: &TargetModel,
    fit_chain: &ChainOutput,
    eval_chain: Option<&ChainOutput>,
    options: &ZvOptions,
) -> Result<Prepared> {
    let d = model.dimension();
    for chain in std::iter::once(fit_chain).chain(eval_chain) {
        if chain.dimension() != d || chain.model_tag != model.tag() {
            return Err(Error::Setup(format!(
                "chain ({}, dimension {}) does not target the {} model of dimension {d}",
                chain.model_tag,
                chain.dimension(),
                model.tag()
            )));
        }
    }
    let basis = monomial_basis(d, options.degree, &options.exclusions)?;
    let standardization = if options.standardize {
        Standardization::from_chain(fit_chain, options.exclusions.is_empty())
    } else {
        Standardization::identity(d)
    };
    let fit_cv = eval_control_variates_standardized(fit_chain, &basis, &standardization)?;
    let eval_cv = eval_chain
        .map(|c| eval_control_variates_standardized(c, &basis, &standardization))
        .transpose()?;
    Ok(Prepared { fit_cv, eval_cv })
}

/// Zero-variance estimate of `E_π[f]`.
///
/// Coefficients are fitted on `fit_chain`; the renormalized observable is then
/// averaged over `eval_chain`, or over `fit_chain` itself when `eval_chain` is
/// `None` (single-chain protocol).
pub fn zv_estimate<F: Fn(&[f64]) -> f64>(
    model: &TargetModel,
    f: F,
    fit_chain: &ChainOutput,
    eval_chain: Option<&ChainOutput>,
    options: &ZvOptions,
) -> Result<ZvEstimate> {
    let prepared = prepare(model, fit_chain, eval_chain, options)?;
    estimate_one(&prepared, &f, fit_chain, eval_chain, options)
}

/// [`zv_estimate`] for several observables, sharing the control-variate matrices.
pub fn zv_estimate_many(
    model: &TargetModel,
    observables: &[Observable],
    fit_chain: &ChainOutput,
    eval_chain: Option<&ChainOutput>,
    options: &ZvOptions,
) -> Result<Vec<ZvEstimate>> {
    let prepared = prepare(model, fit_chain, eval_chain, options)?;
    observables
        .iter()
        .map(|o| estimate_one(&prepared, &|x: &[f64]| o.eval(x), fit_chain, eval_chain, options))
        .collect()
}

fn estimate_one(
    prepared: &Prepared,
    f: &dyn Fn(&[f64]) -> f64,
    fit_chain: &ChainOutput,
    eval_chain: Option<&ChainOutput>,
    options: &ZvOptions,
) -> Result<ZvEstimate> {
    let f_fit: Vec<f64> = fit_chain.draws().map(f).collect();
    let fit = fit_coefficients_with(&prepared.fit_cv, &f_fit, &options.fit)?;
    let (f_eval, cv_eval, protocol) = match (eval_chain, &prepared.eval_cv) {
        (Some(chain), Some(cv)) => (chain.draws().map(f).collect(), cv, Protocol::TwoChain),
        _ => (f_fit, &prepared.fit_cv, Protocol::SingleChain),
    };
    let ftilde = renormalize(&f_eval, cv_eval, &fit)?;
    let n = ftilde.len() as f64;
    Ok(ZvEstimate {
        estimate: ftilde.iter().sum::<f64>() / n,
        ordinary: f_eval.iter().sum::<f64>() / n,
        fit,
        ftilde,
        protocol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_round_trip() {
        for s in ["x1", "x12^2", "exp(x3)"] {
            let o: Observable = s.parse().unwrap();
            assert_eq!(o.to_string(), s);
        }
        assert!("x0".parse::<Observable>().is_err());
        assert!("y1".parse::<Observable>().is_err());
        assert_eq!(Observable::Square(1).eval(&[3.0, -2.0]), 4.0);
    }
}
