use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::MonomialBasis;
use crate::error::{Error, Result};
use crate::samplers::ChainOutput;

/// `z = -1/2 ∇ ln π`.
pub fn control_variate_z(gradient: &[f64]) -> Vec<f64> {
    gradient.iter().map(|g| -0.5 * g).collect()
}

/// Affine change of coordinates `u_j = (x_j - center_j) / scale_j` in which the
/// monomials are evaluated.
///
/// Polynomials of degree `<= p` in `u` span the same space as polynomials of
/// degree `<= p` in `x`, so the fitted renormalized function is unchanged; only
/// the conditioning of the moment matrix improves. Centering mixes lower-degree
/// terms into each monomial and must stay off when monomials are excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn identity(d: usize) -> Self {
        Standardization {
            center: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    /// Per-coordinate mean (when `center` is set) and standard deviation of the chain.
    pub fn from_chain(chain: &ChainOutput, center: bool) -> Self {
        let d = chain.dimension();
        let n = chain.len() as f64;
        let mut mean = vec![0.0; d];
        for x in chain.draws() {
            for j in 0..d {
                mean[j] += x[j] / n;
            }
        }
        let mut var = vec![0.0; d];
        for x in chain.draws() {
            for j in 0..d {
                var[j] += (x[j] - mean[j]) * (x[j] - mean[j]) / n;
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(v, m)| {
                let s = v.sqrt();
                if s.is_finite() && s > 0.0 {
                    s
                } else if *m != 0.0 {
                    m.abs()
                } else {
                    1.0
                }
            })
            .collect();
        Standardization {
            center: if center { mean } else { vec![0.0; d] },
            scale,
        }
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// Control variates evaluated along a chain: row `i`, column `k` holds `g_k(x^i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVariateMatrix {
    pub values: DMatrix<f64>,
    pub basis: MonomialBasis,
    pub standardization: Standardization,
}

impl ControlVariateMatrix {
    pub fn n_draws(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.column(k).iter().copied().collect()
    }
}

/// Control variates of the raw monomials `x^α`.
pub fn eval_control_variates(
    chain: &ChainOutput,
    basis: &MonomialBasis,
) -> Result<ControlVariateMatrix> {
    eval_control_variates_standardized(chain, basis, &Standardization::identity(chain.dimension()))
}

/// Control variates of the monomials `u^α` in standardized coordinates.
pub fn eval_control_variates_standardized(
    chain: &ChainOutput,
    basis: &MonomialBasis,
    standardization: &Standardization,
) -> Result<ControlVariateMatrix> {
    let d = chain.dimension();
    if basis.dimension() != d || standardization.dimension() != d {
        return Err(Error::Setup(format!(
            "chain dimension {d} does not match basis dimension {} / standardization dimension {}",
            basis.dimension(),
            standardization.dimension()
        )));
    }
    let active: Vec<&Vec<u8>> = basis.active().collect();
    let n = chain.len();
    let p = basis.degree();
    let mut values = DMatrix::zeros(n, active.len());
    // powers[j * (p + 1) + e] = u_j^e
    let mut powers = vec![1.0; d * (p + 1)];
    let mut z = vec![0.0; d];

    for i in 0..n {
        let x = chain.draw(i);
        for (zj, g) in z.iter_mut().zip(chain.gradient(i)) {
            *zj = -0.5 * g;
        }
        for j in 0..d {
            let u = (x[j] - standardization.center[j]) / standardization.scale[j];
            for e in 1..=p {
                powers[j * (p + 1) + e] = powers[j * (p + 1) + e - 1] * u;
            }
        }
        for (k, alpha) in active.iter().enumerate() {
            let mut g = 0.0;
            for j in 0..d {
                let a = alpha[j] as usize;
                if a == 0 {
                    continue;
                }
                let mut rest = 1.0;
                for (l, &al) in alpha.iter().enumerate() {
                    if l != j {
                        rest *= powers[l * (p + 1) + al as usize];
                    }
                }
                let s = standardization.scale[j];
                let first = a as f64 * powers[j * (p + 1) + a - 1] * rest / s;
                g += first * z[j];
                if a >= 2 {
                    let second = (a * (a - 1)) as f64 * powers[j * (p + 1) + a - 2] * rest / (s * s);
                    g -= 0.5 * second;
                }
            }
            values[(i, k)] = g;
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Setup("control variates contain non-finite values".into()));
    }
    Ok(ControlVariateMatrix {
        values,
        basis: basis.clone(),
        standardization: standardization.clone(),
    })
}
