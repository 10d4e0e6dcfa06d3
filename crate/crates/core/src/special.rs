//! Standard normal helpers with tail-safe evaluation.

use statrs::function::erf::{erfc, erfc_inv};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `Φ` is evaluated through its asymptotic series.
const LOWER_TAIL_CUTOFF: f64 = -37.0;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸`, the bracket in `Φ(x) ≈ φ(x)/(-x) · (...)`.
fn lower_tail_series(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    1.0 - inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - 105.0 * inv2)))
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x >= LOWER_TAIL_CUTOFF {
        norm_cdf(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI - (-x).ln() + lower_tail_series(x).ln()
    }
}

/// Inverse Mills ratio `φ(x)/Φ(x)`.
pub fn inv_mills(x: f64) -> f64 {
    if x >= LOWER_TAIL_CUTOFF {
        norm_pdf(x) / norm_cdf(x)
    } else {
        -x / lower_tail_series(x)
    }
}

/// `Φ⁻¹(p)` for `p` in `(0, 1)`.
pub fn norm_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_at_zero_is_half() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((log_norm_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((inv_mills(0.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tail_branches_join_continuously() {
        let x = LOWER_TAIL_CUTOFF;
        let direct = norm_cdf(x).ln();
        let series = -0.5 * x * x - LN_SQRT_2PI - (-x).ln() + lower_tail_series(x).ln();
        assert!((direct - series).abs() / direct.abs() < 1e-12);
        let direct = norm_pdf(x) / norm_cdf(x);
        assert!((direct - -x / lower_tail_series(x)).abs() / direct < 1e-9);
        assert!(log_norm_cdf(-1e3).is_finite());
        assert!(inv_mills(-1e3) > 999.0);
    }

    #[test]
    fn quantile_matches_reference_values() {
        let known = [
            (1e-10, -6.361_340_902_404_056),
            (0.01, -2.326_347_874_040_841),
            (0.9, 1.281_551_565_544_600_5),
            (0.975, 1.959_963_984_540_054),
        ];
        for (p, q) in known {
            assert!((norm_quantile(p) - q).abs() < 1e-13 * q.abs(), "p={p}");
        }
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            assert!((norm_cdf(norm_quantile(p)) - p).abs() <= 1e-10 * p.min(1.0 - p), "p={p}");
        }
    }
}
