//! Zero-variance MCMC.
//!
//! Markov chain output is post-processed with control variates built from the
//! gradient of the log target. For a polynomial trial function `P` the
//! renormalized observable
//!
//! ```text
//! f~(x) = f(x) - 1/2 ΔP(x) + ∇P(x) · z(x),    z = -1/2 ∇ ln π(x)
//! ```
//!
//! has the same expectation as `f` under `π` and, with coefficients chosen to
//! minimise its variance, a much smaller variance. The crate ships the targets
//! (toy densities, probit, logit, GARCH(1,1)), the samplers that produce the
//! chains, the control-variate engine, and diagnostics used to measure the
//! variance reduction.

// `!(x > t)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_io;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod models;
pub mod samplers;
pub mod special;
pub mod zv;

pub use error::{Error, Result};
pub use models::{ParamVector, TargetModel};
pub use samplers::{ChainOutput, SamplerConfig};
