//! Variance-reduction and convergence diagnostics.

mod asvar;
mod checks;
mod ratio;
mod reference;

pub use asvar::{batch_means_asvar, sample_mean, sample_variance};
pub use checks::{
    cv_zero_mean_test, linnik_estimate, moment_diagnostic, running_mean_stability, LinnikReport,
    StabilityCheck, ZeroMeanColumn, DEFAULT_DELTA,
};
pub use ratio::{
    serde_inf, variance_ratio, ArmTimings, RatioReport, ReplicationStudy, BOOTSTRAP_RESAMPLES,
};
pub use reference::{long_chain_reference, reference_from_chain, ReferenceReport};
