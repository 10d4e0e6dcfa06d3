//! The experiment runner behind the command-line tool: configuration, the
//! replicated two-stage study, long-chain diagnostics and config validation.

mod config;
mod diagnose;
mod study;

pub use config::{ExperimentConfig, ModelKind};
pub use diagnose::{diagnose, validate, DiagnosticsReport, ValidationSummary};
pub use study::{
    run, write_outputs, FitNote, ModelSummary, RatioValue, ReplicationRecord, SamplerSummary,
    StudyOutcome, StudyReport, SummaryRow, TimingReport,
};
