//! The k-means and random-sample compression baselines next to k-center.

use wasserstein_align::{compress, generate_planted, Budget, Method};

fn main() -> wasserstein_align::Result<()> {
    let inst = generate_planted(1000, 20, 3, 0.02, 0.0, 3)?;
    let p = &inst.a;
    println!("{:<9} {:>4} {:>10}", "method", "k", "radius");
    for method in Method::ALL {
        for k in [20, 100] {
            let r = compress(p, method, Budget::Centers(k), 7)?;
            println!("{:<9} {:>4} {:>10.4}", method.as_str(), r.k(), r.radius);
        }
    }
    Ok(())
}
