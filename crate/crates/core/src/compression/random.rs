//! Uniform-sampling baselines.

use rand::seq::index::sample;

use super::{nearest, rng_for, CompressionResult, Method};
use crate::error::{AlignError, Result};
use crate::pointset::WeightedPointSet;

fn draw(p: &WeightedPointSet, k: usize, seed: u64) -> Result<(Vec<usize>, Vec<f64>, Vec<usize>)> {
    if k == 0 || k > p.len() {
        return Err(AlignError::InvalidInput(format!("k must lie in 1..={}, got {k}", p.len())));
    }
    let mut picks = sample(&mut rng_for(seed), p.len(), k).into_vec();
    picks.sort_unstable();
    let mut coords = Vec::with_capacity(k * p.dim());
    for &i in &picks {
        coords.extend_from_slice(p.point(i));
    }
    let assignment = p.points().map(|x| nearest(x, &coords, p.dim()).0).collect();
    Ok((picks, coords, assignment))
}

/// `k` uniform samples without replacement, each weighted `W/k`. The
/// assignment to the nearest sample is only used for the reported radius.
pub fn random_compress(p: &WeightedPointSet, k: usize, seed: u64) -> Result<CompressionResult> {
    let (_, coords, assignment) = draw(p, k, seed)?;
    let mut r = CompressionResult::aggregate(p, coords, assignment, Method::Random, seed)?;
    let share = p.total_weight() / k as f64;
    r.centers = r.centers.with_weights(vec![share; k])?;
    Ok(r)
}

/// `k` uniform samples, each carrying the weight of the points nearest to it.
pub fn random_plus_compress(p: &WeightedPointSet, k: usize, seed: u64) -> Result<CompressionResult> {
    if k == p.len() {
        return Ok(CompressionResult::identity(p, Method::RandomPlus, seed));
    }
    let (_, coords, assignment) = draw(p, k, seed)?;
    CompressionResult::aggregate(p, coords, assignment, Method::RandomPlus, seed)
}
