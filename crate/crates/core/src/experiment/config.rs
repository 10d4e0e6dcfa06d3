use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data_io::{self, synthetic};
use crate::error::{Error, Result};
use crate::models::{GarchPrior, TargetModel};
use crate::samplers::{tuned_config, ProposalShape, SamplerConfig, SamplerKind};
use crate::zv::{default_exclusions, FitOptions, Monomial, MomentConvention, Observable, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gaussian,
    Exponential,
    Gamma,
    Probit,
    Logit,
    Garch,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Exponential => "exponential",
            ModelKind::Gamma => "gamma",
            ModelKind::Probit => "probit",
            ModelKind::Logit => "logit",
            ModelKind::Garch => "garch",
        })
    }
}

fn default_seed() -> u64 {
    20_100_101
}
fn default_synthetic_seed() -> u64 {
    1988
}
fn default_burn_in() -> usize {
    1000
}
fn default_length() -> usize {
    2000
}
fn default_degrees() -> Vec<usize> {
    vec![1, 2]
}
fn default_replications() -> usize {
    100
}
fn default_resamples() -> usize {
    crate::diagnostics::BOOTSTRAP_RESAMPLES
}
fn default_reference_length() -> usize {
    1_000_000
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}
fn default_prior_sd() -> [f64; 3] {
    GarchPrior::default().prior_sd()
}

/// A complete experiment description, read from one flat JSON object.
///
/// Every field except `model` has a default; data files are optional and a
/// seeded synthetic dataset is used when `data` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Free-text notes; ignored by every subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: ModelKind,

    /// Design CSV (probit, logit) or `date,price` CSV (garch). Relative paths
    /// are resolved against the directory of the config file.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default = "default_synthetic_seed")]
    pub synthetic_seed: u64,
    /// Regressor columns to use, in order; all non-`y` columns when absent.
    #[serde(default)]
    pub columns: Option<Vec<String>>,
    #[serde(default)]
    pub add_intercept: bool,

    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    #[serde(default)]
    pub variance: Option<Vec<f64>>,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub shape: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default = "default_prior_sd")]
    pub garch_prior_sd: [f64; 3],

    /// Defaults to Gibbs for probit and random-walk Metropolis otherwise.
    #[serde(default)]
    pub sampler: Option<SamplerKind>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_length")]
    pub fit_length: usize,
    #[serde(default = "default_length")]
    pub eval_length: usize,
    /// Shape of the tuned random-walk proposal.
    #[serde(default)]
    pub proposal_shape: ProposalShape,
    /// Random-walk scales with independent increments; replaces the tuned
    /// proposal when present.
    #[serde(default)]
    pub proposal_sd: Option<Vec<f64>>,
    #[serde(default = "default_seed")]
    pub seed: u64,

    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
    /// Monomials left out of every basis; the model's default when absent.
    #[serde(default)]
    pub exclusions: Option<Vec<Monomial>>,
    #[serde(default)]
    pub single_chain: bool,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub moment_convention: MomentConvention,
    /// Coordinate projections `x1..xd` when absent.
    #[serde(default)]
    pub observables: Option<Vec<Observable>>,

    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "default_reference_length")]
    pub reference_length: usize,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub keep_chains: bool,

    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A config with every default, for `model`.
    pub fn for_model(model: ModelKind) -> Self {
        serde_json::from_value(serde_json::json!({ "model": model }))
            .expect("defaults always deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e))))?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Checks the invariants that do not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::Config("degrees must not be empty".into()));
        }
        if let Some(&p) = self.degrees.iter().find(|&&p| !(1..=MAX_DEGREE).contains(&p)) {
            return Err(Error::UnsupportedDegree(p));
        }
        for (name, len) in [("fit_length", self.fit_length), ("eval_length", self.eval_length)] {
            if len < 100 {
                return Err(Error::Config(format!("{name} must be at least 100, got {len}")));
            }
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.sampler == Some(SamplerKind::Gibbs) && self.model != ModelKind::Probit {
            return Err(Error::Config("the gibbs sampler is only available for probit".into()));
        }
        Ok(())
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Where the data came from, for the report.
    pub fn data_source(&self) -> String {
        match (&self.data, self.model) {
            (Some(p), _) => self.resolve(p).display().to_string(),
            (None, ModelKind::Probit | ModelKind::Logit) => {
                format!("synthetic banknote-like, seed {}", self.synthetic_seed)
            }
            (None, ModelKind::Garch) => format!("synthetic DEM/GBP-like, seed {}", self.synthetic_seed),
            (None, _) => "analytic".into(),
        }
    }

    /// Loads the data and builds the target.
    pub fn build_model(&self) -> Result<TargetModel> {
        self.validate()?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("{} model needs `{name}`", self.model)))
        };
        let model = match self.model {
            ModelKind::Gaussian => {
                let mean = self.mean.clone().unwrap_or_else(|| vec![0.0]);
                let var = self.variance.clone().unwrap_or_else(|| vec![1.0; mean.len()]);
                TargetModel::gaussian_diag(mean, var)?
            }
            ModelKind::Exponential => TargetModel::exponential(need(self.rate, "rate")?)?,
            ModelKind::Gamma => {
                TargetModel::gamma(need(self.shape, "shape")?, self.scale.unwrap_or(1.0))?
            }
            ModelKind::Probit | ModelKind::Logit => {
                let data = match &self.data {
                    Some(p) => data_io::load_design_matrix(
                        self.resolve(p),
                        self.add_intercept,
                        self.columns.as_deref(),
                    )?,
                    None => {
                        let (rows, y) = synthetic::banknote_like(self.synthetic_seed);
                        let data = crate::models::BinaryRegressionData::new(rows, y)?;
                        if self.add_intercept {
                            data.with_intercept()?
                        } else {
                            data
                        }
                    }
                };
                if self.model == ModelKind::Probit {
                    TargetModel::probit(data)
                } else {
                    TargetModel::logit(data)
                }
            }
            ModelKind::Garch => {
                let prices = match &self.data {
                    Some(p) => data_io::load_prices(self.resolve(p))?,
                    None => synthetic::demgbp_like(self.synthetic_seed)?,
                };
                let returns = data_io::prices_to_returns(&prices)?;
                TargetModel::garch(returns, GarchPrior::new(self.garch_prior_sd)?)
            }
        };
        if let Some(obs) = &self.observables {
            if let Some(o) = obs.iter().find(|o| o.index() >= model.dimension()) {
                return Err(Error::Config(format!(
                    "observable {o} refers past the model dimension {}",
                    model.dimension()
                )));
            }
        }
        if let Some(sd) = &self.proposal_sd {
            if sd.len() != model.dimension() || sd.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(Error::Config(format!(
                    "proposal_sd needs {} positive entries",
                    model.dimension()
                )));
            }
        }
        Ok(model)
    }

    pub fn sampler_kind(&self, model: &TargetModel) -> SamplerKind {
        self.sampler.unwrap_or_else(|| SamplerKind::default_for(model))
    }

    /// Sampler settings for a chain of `length` draws seeded with the base seed.
    pub fn sampler_config(
        &self,
        model: &TargetModel,
        kind: SamplerKind,
        length: usize,
    ) -> Result<SamplerConfig> {
        let mut config = tuned_config(model, kind, self.proposal_shape, self.burn_in, length, self.seed)?;
        if let Some(sd) = &self.proposal_sd {
            config.proposal_sd = Some(sd.clone());
            config.proposal_correlation = None;
        }
        Ok(config)
    }

    pub fn observables_for(&self, model: &TargetModel) -> Vec<Observable> {
        self.observables
            .clone()
            .unwrap_or_else(|| (0..model.dimension()).map(Observable::Coordinate).collect())
    }

    pub fn exclusions_for(&self, model: &TargetModel) -> Vec<Monomial> {
        self.exclusions.clone().unwrap_or_else(|| default_exclusions(model))
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            convention: self.moment_convention,
            ..FitOptions::default()
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"model": "probit"}"#).unwrap();
        assert_eq!(c.burn_in, 1000);
        assert_eq!(c.degrees, vec![1, 2]);
        assert_eq!(c.replications, 100);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = ExperimentConfig::from_json("{\n  \"model\": \"probit\",\n  \"burn_in\": x\n}")
            .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_field_and_degree_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"model": "probit", "burnin": 5}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"model": "probit", "degrees": [1, 4]}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::UnsupportedDegree(4))));
    }
}
