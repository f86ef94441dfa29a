//! Fractional transport ignores a few far-away outliers once the matched
//! fraction leaves room for them.

use wasserstein_align::{fractional_wasserstein, TransportConfig, WeightedPointSet};

fn main() -> wasserstein_align::Result<()> {
    let mut pa: Vec<Vec<f64>> = (0..18).map(|i| vec![(i % 6) as f64, (i / 6) as f64]).collect();
    let mut pb: Vec<Vec<f64>> = pa.iter().map(|p| vec![p[0] + 0.05, p[1] - 0.05]).collect();
    pa.extend([vec![40.0, 40.0], vec![-40.0, 40.0]]);
    pb.extend([vec![40.0, -40.0], vec![-40.0, -40.0]]);
    let a = WeightedPointSet::uniform(pa)?;
    let b = WeightedPointSet::uniform(pb)?;

    let cfg = TransportConfig::default();
    for lambda in [1.0, 0.95, 0.9, 0.8] {
        let plan = fractional_wasserstein(&a, &b, lambda, &cfg)?;
        println!("lambda {lambda:.2}: W2^2 = {:.5}, shipped {:.1}", plan.normalized_distance, plan.total_flow);
    }
    Ok(())
}
