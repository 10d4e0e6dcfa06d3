use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::asvar::{sample_mean, sample_variance};
use crate::error::{Error, Result};
use crate::samplers::chain_rng;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Minimum number of replications for a bootstrap interval.
const MIN_INTERVAL_REPLICATIONS: usize = 20;

/// Wall-clock seconds spent by each arm of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ArmTimings {
    /// Evaluation chain plus the plain average.
    pub ordinary_secs: f64,
    /// Per degree: every chain the ZV estimate needs plus the coefficient fit
    /// and renormalization.
    pub zv_secs: BTreeMap<usize, f64>,
}

/// Ordinary and zero-variance estimates from `R` independent replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStudy {
    /// `ordinary[r][k]`: plain chain average of observable `k` in replication `r`.
    pub ordinary: Vec<Vec<f64>>,
    /// `zv[degree][r][k]`.
    pub zv: BTreeMap<usize, Vec<Vec<f64>>>,
    pub seeds: Vec<u64>,
    pub timings: Vec<ArmTimings>,
}

impl ReplicationStudy {
    pub fn new(
        ordinary: Vec<Vec<f64>>,
        zv: BTreeMap<usize, Vec<Vec<f64>>>,
        seeds: Vec<u64>,
        timings: Vec<ArmTimings>,
    ) -> Result<Self> {
        let r = ordinary.len();
        if r < 2 {
            return Err(Error::InsufficientSample(format!(
                "a replication study needs at least 2 replications, got {r}"
            )));
        }
        let width = ordinary[0].len();
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == r && rows.iter().all(|row| row.len() == width);
        if !rows_ok(&ordinary) || !zv.values().all(rows_ok) || seeds.len() != r || timings.len() != r {
            return Err(Error::Setup(
                "replication arrays must all have R rows of equal width".into(),
            ));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Setup("replication seeds must be pairwise distinct".into()));
        }
        Ok(ReplicationStudy {
            ordinary,
            zv,
            seeds,
            timings,
        })
    }

    pub fn replications(&self) -> usize {
        self.ordinary.len()
    }

    pub fn parameters(&self) -> usize {
        self.ordinary[0].len()
    }
}

/// Serializes a float, writing infinities as the strings `"inf"` / `"-inf"`
/// and NaN as `null`.
pub mod serde_inf {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }
}

/// Variance-reduction ratio of one parameter at one degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub parameter: usize,
    pub degree: usize,
    pub ordinary_mean: f64,
    pub zv_mean: f64,
    pub ordinary_variance: f64,
    pub zv_variance: f64,
    #[serde(with = "serde_inf")]
    pub ratio: f64,
    /// Set when the ZV variance is numerically zero and `ratio` is the `+∞` sentinel.
    pub infinite: bool,
    /// Paired percentile bootstrap 95% interval; absent when `R < 20`.
    #[serde(serialize_with = "interval_inf")]
    pub interval: Option<(f64, f64)>,
    pub method: String,
}

fn interval_inf<S: serde::Serializer>(v: &Option<(f64, f64)>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    match v {
        None => s.serialize_none(),
        Some((lo, hi)) => {
            struct F(f64);
            impl Serialize for F {
                fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    serde_inf::serialize(&self.0, s)
                }
            }
            let mut t = s.serialize_tuple(2)?;
            t.serialize_element(&F(*lo))?;
            t.serialize_element(&F(*hi))?;
            t.end()
        }
    }
}

/// `Var(ZV estimates)` is treated as zero below this fraction of the squared
/// mean (relative spread of about 1e-13, rounding noise).
const ZERO_VARIANCE_REL: f64 = 1e-26;

fn ratio_of(ordinary: &[f64], zv: &[f64]) -> (f64, bool) {
    let vo = sample_variance(ordinary);
    let vz = sample_variance(zv);
    let m = sample_mean(zv);
    let floor = ZERO_VARIANCE_REL * m * m;
    if vz <= floor || vz == 0.0 {
        (f64::INFINITY, true)
    } else {
        (vo / vz, false)
    }
}

/// Across-replication variance ratio `Var(ordinary)/Var(ZV)` for `parameter`
/// at `degree`, with a paired percentile bootstrap interval.
pub fn variance_ratio(
    study: &ReplicationStudy,
    parameter: usize,
    degree: usize,
    resamples: usize,
    seed: u64,
) -> Result<RatioReport> {
    if parameter >= study.parameters() {
        return Err(Error::Setup(format!(
            "parameter {parameter} out of range for a study of {} parameters",
            study.parameters()
        )));
    }
    let zv_rows = study
        .zv
        .get(&degree)
        .ok_or_else(|| Error::Setup(format!("the study has no degree-{degree} estimates")))?;
    let ordinary: Vec<f64> = study.ordinary.iter().map(|row| row[parameter]).collect();
    let zv: Vec<f64> = zv_rows.iter().map(|row| row[parameter]).collect();
    let (ratio, infinite) = ratio_of(&ordinary, &zv);

    let r = ordinary.len();
    let interval = (r >= MIN_INTERVAL_REPLICATIONS && resamples > 0).then(|| {
        let mut rng = chain_rng(seed);
        let mut ratios = Vec::with_capacity(resamples);
        let mut o = vec![0.0; r];
        let mut z = vec![0.0; r];
        for _ in 0..resamples {
            for i in 0..r {
                let pick = rng.random_range(0..r);
                o[i] = ordinary[pick];
                z[i] = zv[pick];
            }
            ratios.push(ratio_of(&o, &z).0);
        }
        ratios.sort_by(f64::total_cmp);
        let lo = percentile(&ratios, 0.025);
        let hi = percentile(&ratios, 0.975);
        // keep the point inside its own interval
        (lo.min(ratio), hi.max(ratio))
    });

    Ok(RatioReport {
        parameter,
        degree,
        ordinary_mean: sample_mean(&ordinary),
        zv_mean: sample_mean(&zv),
        ordinary_variance: sample_variance(&ordinary),
        zv_variance: sample_variance(&zv),
        ratio,
        infinite,
        interval,
        method: format!("paired percentile bootstrap, {resamples} resamples, seed {seed}"),
    })
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 >= sorted.len() || frac == 0.0 {
        return sorted[i.min(sorted.len() - 1)];
    }
    let (a, b) = (sorted[i], sorted[i + 1]);
    if a.is_infinite() || b.is_infinite() {
        return if frac < 0.5 { a } else { b };
    }
    a + frac * (b - a)
}
