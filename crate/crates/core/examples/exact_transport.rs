//! Exact squared 2-Wasserstein distance between two small weighted sets.

use wasserstein_align::{wasserstein_exact, WeightedPointSet};

fn main() -> wasserstein_align::Result<()> {
    let a = WeightedPointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 2.0, 1.0])?;
    let b = WeightedPointSet::new(vec![vec![0.5, 0.5], vec![2.0, 0.0]], vec![3.0, 1.0])?;

    let plan = wasserstein_exact(&a, &b)?;
    println!("W2^2 = {:.6} (total cost {:.6}, mass {})", plan.normalized_distance, plan.cost, plan.total_flow);
    for e in &plan.entries {
        println!("  a[{}] -> b[{}]  flow {:.3}", e.source, e.target, e.flow);
    }
    Ok(())
}
