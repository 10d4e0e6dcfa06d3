//! Zero-variance control variates.
//!
//! For a monomial `m` the control variate is
//! `g(x) = -1/2 Δm(x) + ∇m(x) · z(x)` with `z = -1/2 ∇ ln π(x)`. Under the
//! boundary conditions that make it unbiased, `E_π[g] = 0`, so adding any linear
//! combination of the `g_k` to an observable leaves its mean unchanged. The
//! coefficients are fitted to minimise the variance of the sum.

mod basis;
mod control_variates;
mod estimate;
mod fit;

pub use basis::{monomial_basis, Monomial, MonomialBasis, MAX_DEGREE};
pub use control_variates::{
    control_variate_z, eval_control_variates, eval_control_variates_standardized,
    ControlVariateMatrix, Standardization,
};
pub use estimate::{
    default_exclusions, zv_estimate, zv_estimate_many, Observable, Protocol, ZvEstimate,
    ZvOptions,
};
pub use fit::{fit_coefficients, fit_coefficients_with, renormalize, FitOptions, MomentConvention, ZVFit};
