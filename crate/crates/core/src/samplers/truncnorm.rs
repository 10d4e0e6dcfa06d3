use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_quantile};

/// Standardized bounds beyond which the inverse-CDF route is abandoned for
/// rejection sampling.
const TAIL_START: f64 = 5.0;

/// One exact draw from `N(mean, sd²)` restricted to `(lower, upper)`.
///
/// Either bound may be infinite. Inside `±5` standard deviations the draw is by
/// inverse CDF, evaluated on the side of zero where the probabilities keep full
/// relative precision; in the far tails it uses rejection from a translated
/// exponential (or a uniform, for very narrow tail intervals).
pub fn truncated_normal_draw<R: Rng + ?Sized>(
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(sd.is_finite() && sd > 0.0) || !mean.is_finite() {
        return Err(Error::Domain(format!(
            "truncated normal needs finite mean and sd > 0, got ({mean}, {sd})"
        )));
    }
    if lower.is_nan() || upper.is_nan() || lower >= upper {
        return Err(Error::Domain(format!(
            "truncated normal needs lower < upper, got ({lower}, {upper})"
        )));
    }
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    let x = standard_truncated(a, b, rng);
    Ok((mean + sd * x).clamp(lower, upper))
}

fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= TAIL_START {
        return right_tail(a, b, rng);
    }
    if b <= -TAIL_START {
        return -right_tail(-b, -a, rng);
    }
    let u: f64 = rng.sample(Open01);
    let x = if a >= 0.0 {
        // upper-tail probabilities are accurate here
        let (pa, pb) = (norm_cdf(-a), norm_cdf(-b));
        -norm_quantile(pb + u * (pa - pb))
    } else {
        let (pa, pb) = (norm_cdf(a), norm_cdf(b));
        norm_quantile(pa + u * (pb - pa))
    };
    x.clamp(a, b)
}

/// Standard normal restricted to `(a, b)` with `a >= 5`.
fn right_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a < 2.0 / a {
        // narrow interval: uniform proposal, acceptance >= e^{-2}
        loop {
            let u: f64 = rng.sample(Open01);
            let x = a + u * (b - a);
            let v: f64 = rng.sample(Open01);
            if v.ln() <= -0.5 * (x * x - a * a) {
                return x;
            }
        }
    }
    // Robert (1995): exponential proposal with the optimal rate
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let x = a + e / rate;
        if x >= b {
            continue;
        }
        let v: f64 = rng.sample(Open01);
        if v.ln() <= -0.5 * (x - rate) * (x - rate) {
            return x;
        }
    }
}
