//! Compression-rate and fraction sweeps with per-stage timings.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::planted::generate_planted;
use crate::alignment::{align_with_compression, alternate_minimize, AlignmentConfig, AlignmentReport};
use crate::compression::{Budget, Method};
use crate::error::{AlignError, Result};
use crate::pointset::WeightedPointSet;

/// A method column of the report: uncompressed alignment or one of the
/// compression methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentMethod {
    Original,
    Compressed(Method),
}

impl ExperimentMethod {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentMethod::Original => "original",
            ExperimentMethod::Compressed(m) => m.as_str(),
        }
    }
}

impl FromStr for ExperimentMethod {
    type Err = AlignError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "original" {
            Ok(ExperimentMethod::Original)
        } else {
            s.parse().map(ExperimentMethod::Compressed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    Files { a: PathBuf, b: PathBuf },
    Planted { n: usize, d: usize, intrinsic_dim: usize, noise: f64, outlier_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub methods: Vec<String>,
    pub rates: Vec<f64>,
    pub fractions: Vec<f64>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub alignment: AlignmentConfig,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| AlignError::InvalidInput(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(AlignError::InvalidInput("trials must be at least 1".into()));
        }
        if self.methods.is_empty() || self.rates.is_empty() || self.fractions.is_empty() {
            return Err(AlignError::InvalidInput("methods, rates and fractions must be non-empty".into()));
        }
        if let Some(r) = self.rates.iter().chain(&self.fractions).find(|x| !(**x > 0.0 && **x <= 1.0)) {
            return Err(AlignError::InvalidInput(format!("rates and fractions must lie in (0, 1], got {r}")));
        }
        self.parsed_methods()?;
        self.alignment.validate()
    }

    pub fn parsed_methods(&self) -> Result<Vec<ExperimentMethod>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }
}

/// One `(method, gamma, lambda, trial)` measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub method: String,
    pub gamma: f64,
    pub lambda: f64,
    pub trial: usize,
    pub k: usize,
    pub distance: f64,
    pub t_compress: f64,
    pub t_align: f64,
    pub t_finalflow: f64,
    pub t_total: f64,
    pub normalized_time: f64,
}

/// Trial averages for one `(method, gamma, lambda)` cell. `trial` holds the
/// number of successful trials averaged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub method: String,
    pub gamma: f64,
    pub lambda: f64,
    pub trial: usize,
    pub distance: f64,
    pub t_compress: f64,
    pub t_align: f64,
    pub t_finalflow: f64,
    pub t_total: f64,
    pub normalized_time: f64,
    #[serde(skip)]
    pub distance_std: f64,
    #[serde(skip)]
    pub t_total_std: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialRecord>,
    /// Failed cells as `(method, gamma, lambda, trial, message)`.
    pub failures: Vec<(String, f64, f64, usize, String)>,
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("csv row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

impl ExperimentReport {
    /// `method,gamma,lambda,trial,distance,t_compress,t_align,t_finalflow,t_total,normalized_time`
    pub fn to_csv(&self) -> String {
        to_csv(&self.cells)
    }

    /// Per-trial rows (with `k`) instead of averages.
    pub fn trials_csv(&self) -> String {
        to_csv(&self.trials)
    }

    pub fn cell(&self, method: &str, gamma: f64, lambda: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.gamma == gamma && c.lambda == lambda)
    }
}

/// SplitMix64 finalizer; spreads `(seed, index)` into independent seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `round(gamma * (n1 + n2) / 2)`, at least 1.
pub fn centers_for_rate(gamma: f64, n1: usize, n2: usize) -> usize {
    ((gamma * (n1 + n2) as f64 / 2.0).round() as usize).max(1)
}

fn load_instance(src: &InstanceSource, seed: u64) -> Result<(WeightedPointSet, WeightedPointSet)> {
    match src {
        InstanceSource::Files { a, b } => Ok((WeightedPointSet::load(a)?, WeightedPointSet::load(b)?)),
        InstanceSource::Planted { n, d, intrinsic_dim, noise, outlier_fraction } => {
            let p = generate_planted(*n, *d, *intrinsic_dim, *noise, *outlier_fraction, seed)?;
            Ok((p.a, p.b))
        }
    }
}

struct Measured {
    distance: f64,
    t_compress: f64,
    t_align: f64,
    t_finalflow: f64,
}

impl Measured {
    fn total(&self) -> f64 {
        self.t_compress + self.t_align + self.t_finalflow
    }
}

fn measure(report: &AlignmentReport) -> Measured {
    let t = report.timings;
    Measured { distance: report.final_distance, t_compress: t.compress, t_align: t.align_loop, t_finalflow: t.final_flow + t.compose }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every `(method, gamma, lambda, trial)` cell.
///
/// Each trial uses its own instance (for generated sources) and its own
/// seed, both derived from the master seed and the trial index, so all
/// methods within a trial see the same data. The uncompressed run does not
/// depend on `gamma`; it is solved once per `(lambda, trial)`, repeated on
/// every `gamma` row, and serves as the denominator of `normalized_time`
/// (left `NaN` when `original` is not among the methods). A cell that fails
/// is recorded in `failures` and skipped.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let with_original = methods.contains(&ExperimentMethod::Original);
    let mut report = ExperimentReport::default();

    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, trial as u64);
        let (a, b) = load_instance(&cfg.instance, trial_seed)?;
        if trial == 0 {
            warm_up(&a, &b, &cfg.alignment);
        }
        for &lambda in &cfg.fractions {
            let align_cfg = AlignmentConfig { fraction: lambda, seed: trial_seed, ..cfg.alignment.clone() };
            let original = if with_original {
                let clock = Instant::now();
                match alternate_minimize(&a, &b, &align_cfg) {
                    Ok(r) => {
                        let mut m = measure(&r);
                        m.t_align = clock.elapsed().as_secs_f64();
                        Some(m)
                    }
                    Err(e) => {
                        report.failures.push(("original".into(), f64::NAN, lambda, trial, e.to_string()));
                        None
                    }
                }
            } else {
                None
            };
            let base_time = original.as_ref().map_or(f64::NAN, Measured::total);
            for &gamma in &cfg.rates {
                let k = centers_for_rate(gamma, a.len(), b.len());
                for &method in &methods {
                    let result = match method {
                        ExperimentMethod::Original => match &original {
                            Some(m) => Ok(Measured { ..*m }),
                            None => continue,
                        },
                        ExperimentMethod::Compressed(m) => {
                            align_with_compression(&a, &b, m, Budget::Centers(k), &align_cfg).map(|r| measure(&r))
                        }
                    };
                    match result {
                        Ok(m) => report.trials.push(TrialRecord {
                            method: method.name().into(),
                            gamma,
                            lambda,
                            trial,
                            k,
                            distance: m.distance,
                            t_compress: m.t_compress,
                            t_align: m.t_align,
                            t_finalflow: m.t_finalflow,
                            t_total: m.total(),
                            normalized_time: if method == ExperimentMethod::Original { 1.0 } else { m.total() / base_time },
                        }),
                        Err(e) => report.failures.push((method.name().into(), gamma, lambda, trial, e.to_string())),
                    }
                }
            }
        }
    }

    for &lambda in &cfg.fractions {
        for &gamma in &cfg.rates {
            for &method in &methods {
                let rows: Vec<&TrialRecord> = report
                    .trials
                    .iter()
                    .filter(|t| t.method == method.name() && t.gamma == gamma && t.lambda == lambda)
                    .collect();
                let col = |f: fn(&TrialRecord) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
                let (distance, distance_std) = mean_std(&col(|r| r.distance));
                let (t_total, t_total_std) = mean_std(&col(|r| r.t_total));
                report.cells.push(CellSummary {
                    method: method.name().into(),
                    gamma,
                    lambda,
                    trial: rows.len(),
                    distance,
                    t_compress: mean_std(&col(|r| r.t_compress)).0,
                    t_align: mean_std(&col(|r| r.t_align)).0,
                    t_finalflow: mean_std(&col(|r| r.t_finalflow)).0,
                    t_total,
                    normalized_time: if method == ExperimentMethod::Original {
                        1.0
                    } else {
                        mean_std(&col(|r| r.normalized_time)).0
                    },
                    distance_std,
                    t_total_std,
                });
            }
        }
    }
    Ok(report)
}

/// A small untimed alignment so thread pools and allocators are warm
/// before the first measurement.
fn warm_up(a: &WeightedPointSet, b: &WeightedPointSet, cfg: &AlignmentConfig) {
    let take = |p: &WeightedPointSet| {
        let n = p.len().min(32);
        WeightedPointSet::from_flat(p.dim(), p.coords()[..n * p.dim()].to_vec(), vec![1.0; n])
    };
    if let (Ok(a), Ok(b)) = (take(a), take(b)) {
        let cfg = AlignmentConfig { max_rounds: 1, restarts: 0, ..cfg.clone() };
        let _ = alternate_minimize(&a, &b, &cfg);
    }
}
