use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::procrustes::weighted_procrustes;
use crate::compression::{compress, Budget, Method};
use crate::error::{AlignError, Result};
use crate::plan::TransportPlan;
use crate::pointset::WeightedPointSet;
use crate::transform::{compose_sequence, RigidTransform, SerializedTransform};
use crate::transport::{fractional_wasserstein, TransportConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    /// Upper bound on transform updates.
    pub max_rounds: usize,
    /// Stop once a round lowers the distance by less than this fraction.
    pub objective_tolerance: f64,
    pub fraction: f64,
    pub transport: TransportConfig,
    /// Extra starts from random orthogonal transforms besides the identity.
    pub restarts: usize,
    pub seed: u64,
    /// Forbid reflections in the transform updates.
    pub rotation_only: bool,
    /// Also start from the transform matching the principal axes of the two
    /// sets, with axis signs fixed by the third moments.
    pub principal_axes_start: bool,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            max_rounds: 20,
            objective_tolerance: 1e-6,
            fraction: 1.0,
            transport: TransportConfig::default(),
            restarts: 0,
            seed: 0,
            rotation_only: false,
            principal_axes_start: true,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(AlignError::InvalidInput("max_rounds must be at least 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(AlignError::InvalidInput(format!("fraction must lie in (0, 1], got {}", self.fraction)));
        }
        if !(self.objective_tolerance >= 0.0) {
            return Err(AlignError::InvalidInput("objective_tolerance must be nonnegative".into()));
        }
        self.transport.validate()
    }
}

/// Distance after a transform update and the size of that update,
/// `sqrt(|R - I|_F^2 + |v|^2)`. The first entry is the starting transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub distance: f64,
    pub update_norm: f64,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub compress: f64,
    pub align_loop: f64,
    pub final_flow: f64,
    pub compose: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.compress + self.align_loop + self.final_flow + self.compose
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionInfo {
    pub method: String,
    pub k_a: usize,
    pub k_b: usize,
    pub radius_a: f64,
    pub radius_b: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct AlignmentReport {
    /// Maps `B` onto `A`.
    pub transform: RigidTransform,
    /// Flow between `A` and the transformed `B`.
    pub plan: TransportPlan,
    pub final_distance: f64,
    pub fraction: f64,
    /// Per-round history of the winning start.
    pub history: Vec<Round>,
    /// Index of the winning start; 0 is the identity.
    pub start: usize,
    /// History of every start, in start order.
    pub start_histories: Vec<Vec<Round>>,
    /// Per-round transforms of the winning start, first applied first.
    pub steps: Vec<RigidTransform>,
    pub timings: Timings,
    pub compression: Option<CompressionInfo>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    transform: SerializedTransform,
    final_distance: f64,
    fraction: f64,
    rounds: usize,
    start: usize,
    history: &'a [Round],
    #[serde(skip_serializing_if = "Option::is_none")]
    compression: Option<&'a CompressionInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<&'a Timings>,
}

impl AlignmentReport {
    /// Pretty JSON. Timings are optional because they are the only part of
    /// a report that differs between identical runs.
    pub fn to_json(&self, with_timings: bool) -> String {
        let doc = ReportJson {
            transform: self.transform.to_serialized(),
            final_distance: self.final_distance,
            fraction: self.fraction,
            rounds: self.history.len() - 1,
            start: self.start,
            history: &self.history,
            compression: self.compression.as_ref(),
            timings: with_timings.then_some(&self.timings),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }
}

fn update_norm(t: &RigidTransform) -> f64 {
    let d = t.dim();
    let r = (&t.rotation - DMatrix::<f64>::identity(d, d)).norm_squared();
    (r + t.translation.norm_squared()).sqrt()
}

struct Run {
    steps: Vec<RigidTransform>,
    transform: RigidTransform,
    plan: TransportPlan,
    history: Vec<Round>,
}

fn run_from(a: &WeightedPointSet, b: &WeightedPointSet, start: RigidTransform, cfg: &AlignmentConfig) -> Result<Run> {
    let solve = |t: &RigidTransform| fractional_wasserstein(a, &t.apply(b)?, cfg.fraction, &cfg.transport);
    let mut plan = solve(&start)?;
    let mut history = vec![Round { distance: plan.normalized_distance, update_norm: update_norm(&start) }];
    let mut steps = vec![start.clone()];
    let mut transform = start;
    for round in 1..=cfg.max_rounds {
        let prev = plan.normalized_distance;
        if !prev.is_finite() {
            return Err(AlignError::NonFinite { round });
        }
        if prev <= 0.0 {
            break;
        }
        let moved = transform.apply(b)?;
        let step = weighted_procrustes(a, &moved, &plan, cfg.rotation_only)?;
        steps.push(step);
        let next = compose_sequence(&steps)?;
        let next_plan = solve(&next)?;
        let d = next_plan.normalized_distance;
        if !d.is_finite() {
            return Err(AlignError::NonFinite { round });
        }
        history.push(Round { distance: d, update_norm: update_norm(steps.last().unwrap()) });
        transform = next;
        plan = next_plan;
        if (prev - d) / prev < cfg.objective_tolerance {
            break;
        }
    }
    Ok(Run { steps, transform, plan, history })
}

/// Weighted centroid and principal axes (columns, by decreasing variance),
/// each axis oriented so the third moment along it is nonnegative.
fn oriented_axes(p: &WeightedPointSet) -> (DVector<f64>, DMatrix<f64>) {
    let d = p.dim();
    let mu = DVector::from_vec(p.centroid());
    let centered = DMatrix::from_fn(d, p.len(), |r, c| p.point(c)[r] - mu[r]);
    let w = DVector::from_column_slice(p.weights());
    let cov = &centered * DMatrix::from_diagonal(&w) * centered.transpose();
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut axes = DMatrix::zeros(d, d);
    for (k, &src) in order.iter().enumerate() {
        let mut e = eig.eigenvectors.column(src).into_owned();
        let proj = centered.transpose() * &e;
        let skew: f64 = proj.iter().zip(w.iter()).map(|(x, w)| w * x.powi(3)).sum();
        if skew < 0.0 {
            e.neg_mut();
        }
        axes.set_column(k, &e);
    }
    (mu, axes)
}

/// Starting transforms: the identity, optionally the principal-axes match,
/// then `restarts` random orthogonal matrices whose translation matches the
/// weighted centroids.
fn starts(a: &WeightedPointSet, b: &WeightedPointSet, cfg: &AlignmentConfig) -> Vec<RigidTransform> {
    let d = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ca = DVector::from_vec(a.centroid());
    let cb = DVector::from_vec(b.centroid());
    let mut out = vec![RigidTransform::identity(d)];
    if cfg.principal_axes_start {
        let (_, ea) = oriented_axes(a);
        let (_, eb) = oriented_axes(b);
        let rotation = ea * eb.transpose();
        let translation = &ca - &rotation * &cb;
        out.push(RigidTransform { rotation, translation });
    }
    for _ in 0..cfg.restarts {
        let rotation = RigidTransform::random_orthogonal(d, &mut rng);
        let translation = &ca - &rotation * &cb;
        out.push(RigidTransform { rotation, translation });
    }
    out
}

/// Alternates optimal flows and weighted Procrustes updates from every
/// start and keeps the lowest final distance (earliest start on ties).
pub fn alternate_minimize(a: &WeightedPointSet, b: &WeightedPointSet, cfg: &AlignmentConfig) -> Result<AlignmentReport> {
    cfg.validate()?;
    a.check_dim(b)?;
    let clock = Instant::now();
    let runs: Vec<Result<Run>> = starts(a, b, cfg).into_par_iter().map(|s| run_from(a, b, s, cfg)).collect();
    let mut best: Option<(usize, Run)> = None;
    let mut start_histories = Vec::with_capacity(runs.len());
    for (i, run) in runs.into_iter().enumerate() {
        let run = run?;
        start_histories.push(run.history.clone());
        let better = match &best {
            Some((_, b)) => run.plan.normalized_distance < b.plan.normalized_distance,
            None => true,
        };
        if better {
            best = Some((i, run));
        }
    }
    let (start, run) = best.expect("at least the identity start");
    Ok(AlignmentReport {
        transform: run.transform,
        final_distance: run.plan.normalized_distance,
        plan: run.plan,
        fraction: cfg.fraction,
        history: run.history,
        start,
        start_histories,
        steps: run.steps,
        timings: Timings { align_loop: clock.elapsed().as_secs_f64(), ..Timings::default() },
        compression: None,
    })
}

/// Compresses both sets, aligns the compressed sets, then applies the
/// resulting transform to the original `B` and solves one final transport
/// problem on the originals.
///
/// `A` is compressed with `cfg.seed` and `B` with `cfg.seed + 1`.
pub fn align_with_compression(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    method: Method,
    budget: Budget,
    cfg: &AlignmentConfig,
) -> Result<AlignmentReport> {
    cfg.validate()?;
    a.check_dim(b)?;
    let clock = Instant::now();
    let (ca, cb) = rayon::join(
        || compress(a, method, budget, cfg.seed),
        || compress(b, method, budget, cfg.seed.wrapping_add(1)),
    );
    let (ca, cb) = (ca?, cb?);
    let t_compress = clock.elapsed().as_secs_f64();

    let mut report = alternate_minimize(&ca.centers, &cb.centers, cfg)?;

    let clock = Instant::now();
    let transform = compose_sequence(&report.steps)?;
    let moved = transform.apply(b)?;
    let t_compose = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let plan = fractional_wasserstein(a, &moved, cfg.fraction, &cfg.transport)?;
    let t_final = clock.elapsed().as_secs_f64();

    report.timings = Timings {
        compress: t_compress,
        align_loop: report.timings.align_loop,
        final_flow: t_final,
        compose: t_compose,
    };
    report.compression = Some(CompressionInfo {
        method: method.to_string(),
        k_a: ca.k(),
        k_b: cb.k(),
        radius_a: ca.radius,
        radius_b: cb.radius,
        truncated: ca.truncated || cb.truncated,
    });
    report.final_distance = plan.normalized_distance;
    report.plan = plan;
    report.transform = transform;
    Ok(report)
}
