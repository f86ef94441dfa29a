//! Compress both sets, align the summaries, then evaluate the composed
//! transform on the full sets.

use wasserstein_align::{align_with_compression, alternate_minimize, generate_planted, AlignmentConfig, Budget, Method};

fn main() -> wasserstein_align::Result<()> {
    let inst = generate_planted(600, 30, 2, 0.01, 0.1, 8)?;
    let cfg = AlignmentConfig { fraction: 0.9, restarts: 2, seed: 8, ..Default::default() };

    let full = alternate_minimize(&inst.a, &inst.b, &cfg)?;
    println!("original   W2^2 {:.4e}  {:.2}s", full.final_distance, full.timings.total());
    for method in [Method::KCenter, Method::KCenterPlus, Method::KMeans, Method::Random] {
        let r = align_with_compression(&inst.a, &inst.b, method, Budget::Centers(150), &cfg)?;
        println!("{:<10} W2^2 {:.4e}  {:.2}s", method.as_str(), r.final_distance, r.timings.total());
    }
    let r = align_with_compression(&inst.a, &inst.b, Method::KCenterPlus, Budget::Radius { epsilon: 0.1, cap: 600 }, &cfg)?;
    let info = r.compression.as_ref().expect("compressed run");
    println!("kcenter+ at eps 0.1: k_a {} k_b {}, W2^2 {:.4e}", info.k_a, info.k_b, r.final_distance);
    Ok(())
}
