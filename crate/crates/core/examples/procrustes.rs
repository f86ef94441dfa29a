//! Weighted Procrustes recovers a rigid motion from known correspondences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasserstein_align::{generate_planted, weighted_procrustes, FlowEntry, RigidTransform, TransportPlan};

fn main() -> wasserstein_align::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inst = generate_planted(50, 6, 6, 0.0, 0.0, 2)?;
    let truth = RigidTransform::random(6, 3.0, &mut rng);
    let b = truth.apply(&inst.a)?;

    let entries = (0..50).map(|i| FlowEntry { source: i, target: i, flow: 1.0 }).collect();
    let plan = TransportPlan { entries, total_flow: 50.0, cost: 0.0, normalized_distance: 0.0 };
    // the solution maps b back onto a
    let t = weighted_procrustes(&inst.a, &b, &plan, false)?;
    let back = t.then(&truth)?;
    let err = (&back.rotation - nalgebra::DMatrix::identity(6, 6)).norm() + back.translation.norm();
    println!("det R = {:.3}, |R^T R - I| = {:.1e}, round trip error {err:.1e}", t.determinant(), t.orthogonality_error());
    Ok(())
}
