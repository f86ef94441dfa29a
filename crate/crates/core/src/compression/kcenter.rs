//! Gonzalez farthest-point k-center and its mean-refined variant.

use super::{seeded_first, CompressionResult, Method};
use crate::error::{AlignError, Result};
use crate::pointset::{diameter_estimate, squared_distance, WeightedPointSet};

/// Incremental farthest-point state: squared distance from every point to
/// the current center set and the owning center ordinal.
struct Greedy<'a> {
    p: &'a WeightedPointSet,
    chosen: Vec<usize>,
    dist: Vec<f64>,
    owner: Vec<usize>,
}

impl<'a> Greedy<'a> {
    fn new(p: &'a WeightedPointSet, first: usize) -> Self {
        let c = p.point(first);
        let dist = p.points().map(|x| squared_distance(x, c)).collect();
        Self { p, chosen: vec![first], dist, owner: vec![0; p.len()] }
    }

    /// Farthest point from the center set, lowest index on ties.
    fn farthest(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &d) in self.dist.iter().enumerate() {
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn radius(&self) -> f64 {
        self.farthest().1.sqrt()
    }

    fn push_farthest(&mut self) {
        let (next, _) = self.farthest();
        let ordinal = self.chosen.len();
        self.chosen.push(next);
        let c = self.p.point(next);
        for (i, x) in self.p.points().enumerate() {
            let d = squared_distance(x, c);
            if d < self.dist[i] {
                self.dist[i] = d;
                self.owner[i] = ordinal;
            }
        }
        // the new center owns itself even if it coincides with an earlier one
        self.dist[next] = 0.0;
        self.owner[next] = ordinal;
    }

    fn finish(self, method: Method, seed: u64) -> Result<CompressionResult> {
        let dim = self.p.dim();
        let mut coords = Vec::with_capacity(self.chosen.len() * dim);
        for &c in &self.chosen {
            coords.extend_from_slice(self.p.point(c));
        }
        CompressionResult::aggregate(self.p, coords, self.owner, method, seed)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(AlignError::InvalidInput("k must be at least 1".into()));
    }
    Ok(())
}

/// Gonzalez k-center with the first center drawn from `seed`.
pub fn gonzalez_kcenter(p: &WeightedPointSet, k: usize, seed: u64) -> Result<CompressionResult> {
    check_k(k)?;
    if k >= p.len() {
        return Ok(CompressionResult::identity(p, Method::KCenter, seed));
    }
    run_fixed(p, k, seeded_first(p.len(), seed), seed)
}

/// Gonzalez k-center starting from point `first`.
pub fn gonzalez_kcenter_from(p: &WeightedPointSet, k: usize, first: usize) -> Result<CompressionResult> {
    check_k(k)?;
    if first >= p.len() {
        return Err(AlignError::InvalidInput(format!("first center {first} out of range")));
    }
    if k >= p.len() {
        return Ok(CompressionResult::identity(p, Method::KCenter, 0));
    }
    run_fixed(p, k, first, 0)
}

fn run_fixed(p: &WeightedPointSet, k: usize, first: usize, seed: u64) -> Result<CompressionResult> {
    let mut g = Greedy::new(p, first);
    while g.chosen.len() < k {
        g.push_farthest();
    }
    g.finish(Method::KCenter, seed)
}

/// Adds farthest points until the radius is at most `epsilon` times the
/// estimated diameter or `k_cap` centers exist.
pub fn gonzalez_adaptive(p: &WeightedPointSet, epsilon: f64, k_cap: usize, seed: u64) -> Result<CompressionResult> {
    let first = seeded_first(p.len(), seed);
    run_adaptive(p, epsilon, k_cap, first, seed)
}

pub fn gonzalez_adaptive_from(p: &WeightedPointSet, epsilon: f64, k_cap: usize, first: usize) -> Result<CompressionResult> {
    if first >= p.len() {
        return Err(AlignError::InvalidInput(format!("first center {first} out of range")));
    }
    run_adaptive(p, epsilon, k_cap, first, 0)
}

fn run_adaptive(p: &WeightedPointSet, epsilon: f64, k_cap: usize, first: usize, seed: u64) -> Result<CompressionResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AlignError::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    check_k(k_cap)?;
    let threshold = epsilon * diameter_estimate(p);
    let mut g = Greedy::new(p, first);
    while g.radius() > threshold && g.chosen.len() < k_cap.min(p.len()) {
        g.push_farthest();
    }
    let truncated = g.radius() > threshold;
    let mut r = g.finish(Method::KCenter, seed)?;
    r.truncated = truncated;
    Ok(r)
}

/// Gonzalez k-center followed by moving every center to the weighted mean
/// of its cluster.
pub fn kcenter_plus(p: &WeightedPointSet, k: usize, seed: u64) -> Result<CompressionResult> {
    refine_to_means(p, gonzalez_kcenter(p, k, seed)?)
}

/// Moves each center of `r` to the weighted mean of its cluster, keeping the
/// assignment. Clusters with zero total weight keep their center.
pub fn refine_to_means(p: &WeightedPointSet, r: CompressionResult) -> Result<CompressionResult> {
    let dim = p.dim();
    let k = r.k();
    let mut sums = vec![0.0; k * dim];
    for (i, &c) in r.assignment.iter().enumerate() {
        let w = p.weight(i);
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p.point(i)) {
            *s += w * x;
        }
    }
    let mut coords = r.centers.coords().to_vec();
    for c in 0..k {
        let w = r.centers.weight(c);
        if w > 0.0 {
            for (x, s) in coords[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                *x = s / w;
            }
        }
    }
    let ball_radius = r.radius;
    let mut out = CompressionResult::aggregate(p, coords, r.assignment, Method::KCenterPlus, r.seed)?;
    out.ball_radius = ball_radius;
    out.truncated = r.truncated;
    Ok(out)
}
