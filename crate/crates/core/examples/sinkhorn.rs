//! Entropic (Sinkhorn) transport next to the exact solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasserstein_align::{
    fractional_wasserstein, wasserstein_exact, wasserstein_sinkhorn, Regularization, TransportConfig, WeightedPointSet,
};

fn cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> WeightedPointSet {
    WeightedPointSet::uniform((0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).unwrap()
}

fn main() -> wasserstein_align::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = cloud(&mut rng, 60, 4);
    let b = cloud(&mut rng, 60, 4);

    let exact = wasserstein_exact(&a, &b)?;
    println!("exact            {:.6}", exact.normalized_distance);
    for rel in [1e-1, 1e-2] {
        let cfg = TransportConfig { sinkhorn_regularization: Regularization::RelativeToMedian(rel), ..TransportConfig::sinkhorn() };
        let plan = wasserstein_sinkhorn(&a, &b, &cfg)?;
        println!("sinkhorn {rel:.0e}   {:.6}", plan.normalized_distance);
    }
    let frac = fractional_wasserstein(&a, &b, 0.9, &TransportConfig::sinkhorn())?;
    println!("sinkhorn, 0.9    {:.6}", frac.normalized_distance);
    Ok(())
}
