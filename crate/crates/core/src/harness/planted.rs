//! Synthetic instances with a known rigid relation between the two sets.

use nalgebra::{DMatrix, DVector};
use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{AlignError, Result};
use crate::pointset::WeightedPointSet;
use crate::transform::RigidTransform;

#[derive(Debug, Clone)]
pub struct Planted {
    pub a: WeightedPointSet,
    pub b: WeightedPointSet,
    /// Maps `a` onto the inliers of `b` (before noise).
    pub truth: RigidTransform,
    /// Positions in `b` that hold uniform outliers.
    pub outliers: Vec<usize>,
}

/// `n` unit-weight points drawn uniformly from a cube in a random
/// `m`-dimensional affine subspace of `R^d`; `b` is a random rigid image of
/// `a` with Gaussian noise of standard deviation `sigma`, a shuffled order,
/// and `round(outlier_fraction * n)` points replaced by uniform draws from
/// the bounding box of the image.
pub fn generate_planted(
    n: usize,
    d: usize,
    m: usize,
    sigma: f64,
    outlier_fraction: f64,
    seed: u64,
) -> Result<Planted> {
    if m == 0 || m > d {
        return Err(AlignError::InvalidInput(format!("intrinsic dimension {m} must lie in 1..={d}")));
    }
    if n == 0 {
        return Err(AlignError::InvalidInput("n must be positive".into()));
    }
    if !(sigma >= 0.0) || !(0.0..=1.0).contains(&outlier_fraction) {
        return Err(AlignError::InvalidInput("need sigma >= 0 and outlier_fraction in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = RigidTransform::random_orthogonal(d, &mut rng).columns(0, m).into_owned();
    let offset = DVector::<f64>::from_fn(d, |_, _| rng.sample(StandardNormal));
    let latent = DMatrix::<f64>::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let mut pts = basis * latent;
    for mut col in pts.column_iter_mut() {
        col += &offset;
    }
    let a = WeightedPointSet::from_flat(d, pts.as_slice().to_vec(), vec![1.0; n])?;

    let truth = RigidTransform::random(d, 1.0, &mut rng);
    let image = truth.apply(&a)?;
    let mut coords = image.coords().to_vec();
    if sigma > 0.0 {
        for c in coords.iter_mut() {
            *c += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let (lo, hi) = bounding_box(&coords, d);
    let count = (outlier_fraction * n as f64).round() as usize;
    let replaced = sample(&mut rng, n, count).into_vec();
    for &i in &replaced {
        for k in 0..d {
            coords[i * d + k] = if hi[k] > lo[k] { rng.random_range(lo[k]..hi[k]) } else { lo[k] };
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut shuffled = Vec::with_capacity(n * d);
    for &i in &order {
        shuffled.extend_from_slice(&coords[i * d..(i + 1) * d]);
    }
    let mut outliers: Vec<usize> = order.iter().enumerate().filter(|(_, i)| replaced.contains(i)).map(|(p, _)| p).collect();
    outliers.sort_unstable();
    let b = WeightedPointSet::from_flat(d, shuffled, vec![1.0; n])?;
    Ok(Planted { a, b, truth, outliers })
}

fn bounding_box(coords: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in coords.chunks_exact(d) {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}
