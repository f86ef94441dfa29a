//! Weighted Lloyd iterations from k-means++ seeding.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;

use super::{nearest, rng_for, CompressionResult, Method};
use crate::error::{AlignError, Result};
use crate::pointset::{squared_distance, WeightedPointSet};

#[derive(Debug, Clone)]
pub struct KMeansTrace {
    pub result: CompressionResult,
    /// Weighted within-cluster sum of squares after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

pub fn kmeans_compress(p: &WeightedPointSet, k: usize, seed: u64, max_iters: usize) -> Result<CompressionResult> {
    kmeans_trace(p, k, seed, max_iters).map(|t| t.result)
}

pub fn kmeans_trace(p: &WeightedPointSet, k: usize, seed: u64, max_iters: usize) -> Result<KMeansTrace> {
    if k == 0 {
        return Err(AlignError::InvalidInput("k must be at least 1".into()));
    }
    if max_iters == 0 {
        return Err(AlignError::InvalidInput("max_iters must be at least 1".into()));
    }
    if k >= p.len() {
        let result = CompressionResult::identity(p, Method::KMeans, seed);
        return Ok(KMeansTrace { result, objective: vec![0.0], iterations: 0 });
    }
    let dim = p.dim();
    let mut centers = plus_plus_seed(p, k, seed);
    let (mut assignment, mut dist) = assign(p, &centers);
    let mut objective = vec![weighted_sum(p, &dist)];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        update_means(p, &assignment, &dist, &mut centers);
        let (next, next_dist) = assign(p, &centers);
        objective.push(weighted_sum(p, &next_dist));
        let stable = next == assignment;
        assignment = next;
        dist = next_dist;
        if stable {
            break;
        }
    }
    // centers are the means of the final assignment
    update_means(p, &assignment, &dist, &mut centers);
    debug_assert_eq!(centers.len(), k * dim);
    let result = CompressionResult::aggregate(p, centers, assignment, Method::KMeans, seed)?;
    Ok(KMeansTrace { result, objective, iterations })
}

/// First center proportional to weight, later ones proportional to
/// `w * D^2`. Falls back to the lowest unchosen index when every point
/// already sits on a center.
fn plus_plus_seed(p: &WeightedPointSet, k: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed);
    let n = p.len();
    let dim = p.dim();
    let mut chosen = vec![false; n];
    let first = WeightedIndex::new(p.weights()).map(|d| d.sample(&mut rng)).unwrap_or(0);
    chosen[first] = true;
    let mut centers = p.point(first).to_vec();
    let mut d2: Vec<f64> = p.points().map(|x| squared_distance(x, p.point(first))).collect();
    while centers.len() < k * dim {
        let scores: Vec<f64> = (0..n).map(|i| p.weight(i) * d2[i]).collect();
        let next = match WeightedIndex::new(&scores) {
            Ok(dist) => dist.sample(&mut rng),
            Err(_) => {
                let _ = rng.random::<u64>();
                (0..n).find(|&i| !chosen[i]).unwrap_or(0)
            }
        };
        chosen[next] = true;
        let c = p.point(next);
        centers.extend_from_slice(c);
        for (i, x) in p.points().enumerate() {
            d2[i] = d2[i].min(squared_distance(x, c));
        }
    }
    centers
}

fn assign(p: &WeightedPointSet, centers: &[f64]) -> (Vec<usize>, Vec<f64>) {
    p.points().map(|x| nearest(x, centers, p.dim())).unzip()
}

fn weighted_sum(p: &WeightedPointSet, dist: &[f64]) -> f64 {
    p.weights().iter().zip(dist).map(|(w, d)| w * d).sum()
}

/// Moves centers to their cluster means. A center with no points is moved
/// onto the point farthest from its own center.
fn update_means(p: &WeightedPointSet, assignment: &[usize], dist: &[f64], centers: &mut [f64]) {
    let dim = p.dim();
    let k = centers.len() / dim;
    let mut sums = vec![0.0; k * dim];
    let mut weight = vec![0.0; k];
    let mut members = vec![0usize; k];
    for (i, &c) in assignment.iter().enumerate() {
        let w = p.weight(i);
        weight[c] += w;
        members[c] += 1;
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p.point(i)) {
            *s += w * x;
        }
    }
    let mut taken = vec![false; p.len()];
    for c in 0..k {
        if members[c] == 0 {
            let far = (0..p.len())
                .filter(|&i| !taken[i])
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(i) = far {
                taken[i] = true;
                centers[c * dim..(c + 1) * dim].copy_from_slice(p.point(i));
            }
        } else if weight[c] > 0.0 {
            for (x, s) in centers[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                *x = s / weight[c];
            }
        }
    }
}
