//! Farthest-point k-center compression with a fixed budget and with a
//! radius target, plus the centroid refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasserstein_align::{compress, diameter_estimate, Budget, Method, WeightedPointSet};

fn main() -> wasserstein_align::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = WeightedPointSet::uniform(
        (0..2000).map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect()).collect(),
    )?;
    let est = diameter_estimate(&p);
    println!("n = {}, diameter estimate {est:.3}", p.len());

    for k in [10, 50, 200] {
        let r = compress(&p, Method::KCenter, Budget::Centers(k), 0)?;
        println!("kcenter  k={k:<4} radius {:.4}", r.radius);
    }
    for epsilon in [0.3, 0.1] {
        let r = compress(&p, Method::KCenter, Budget::Radius { epsilon, cap: p.len() }, 0)?;
        println!("kcenter  eps={epsilon} k={:<4} radius {:.4} <= {:.4}", r.k(), r.radius, epsilon * est);
    }
    let plus = compress(&p, Method::KCenterPlus, Budget::Centers(50), 0)?;
    println!("kcenter+ k=50   assignment radius {:.4}, total weight {}", plus.radius, plus.centers.total_weight());
    Ok(())
}
