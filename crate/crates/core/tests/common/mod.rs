//! Numerical oracles shared by the integration tests: adaptive quadrature,
//! finite differences, and small fixtures.
#![allow(dead_code)]

use zvmcmc::models::{BinaryRegressionData, GarchPrior, ReturnsSeries};
use zvmcmc::samplers::ChainOutput;
use zvmcmc::zv::{eval_control_variates, MonomialBasis};
use zvmcmc::TargetModel;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // fixed panels first, so an integrand that happens to vanish at the
    // coarsest nodes cannot stop the refinement early
    const PANELS: usize = 64;
    let width = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == PANELS { b } else { lo + width };
            let m = 0.5 * (lo + hi);
            let (fa, fm, fb) = (f(lo), f(m), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 50)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Central-difference gradient with Richardson extrapolation (steps `h`, `h/2`).
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = rel_step * x[j].abs().max(1e-3);
            let mut central = |h: f64| {
                probe[j] = x[j] + h;
                let up = f(&probe);
                probe[j] = x[j] - h;
                let down = f(&probe);
                probe[j] = x[j];
                (up - down) / (2.0 * h)
            };
            let d1 = central(h);
            let d2 = central(0.5 * h);
            (4.0 * d2 - d1) / 3.0
        })
        .collect()
}

/// Control variates evaluated at a single point.
pub fn cv_at(model: &TargetModel, basis: &MonomialBasis, x: &[f64]) -> Vec<f64> {
    let g = model.grad_log_density(x).unwrap();
    let chain = ChainOutput::from_parts(x.len(), x.to_vec(), g, 1.0, 0, model.tag()).unwrap();
    let cv = eval_control_variates(&chain, basis).unwrap();
    (0..cv.n_columns()).map(|k| cv.values[(0, k)]).collect()
}

/// A chain of i.i.d. draws with the model's gradients attached.
pub fn chain_from_draws(model: &TargetModel, draws: &[f64]) -> ChainOutput {
    let d = model.dimension();
    let grads: Vec<f64> = draws
        .chunks(d)
        .flat_map(|x| model.grad_log_density(x).unwrap())
        .collect();
    ChainOutput::from_parts(d, draws.to_vec(), grads, 1.0, 0, model.tag()).unwrap()
}

/// Seeded banknote-like probit/logit data.
pub fn banknote() -> BinaryRegressionData {
    let (rows, y) = zvmcmc::data_io::synthetic::banknote_like(1988);
    BinaryRegressionData::new(rows, y).unwrap()
}

/// GARCH target on synthetic returns rescaled to percent, so every
/// parameter and gradient component is of order one.
pub fn garch_percent() -> TargetModel {
    let prices = zvmcmc::data_io::synthetic::demgbp_like(1985).unwrap();
    let returns = zvmcmc::data_io::prices_to_returns(&prices).unwrap();
    let pct: Vec<f64> = returns.returns().iter().map(|r| 100.0 * r).collect();
    TargetModel::garch(ReturnsSeries::from_returns(pct).unwrap(), GarchPrior::default())
}
