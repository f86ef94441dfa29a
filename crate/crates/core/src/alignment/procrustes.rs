//! Flow-weighted orthogonal Procrustes.

use nalgebra::{DMatrix, DVector};

use crate::error::{AlignError, Result};
use crate::plan::TransportPlan;
use crate::pointset::{squared_distance, WeightedPointSet};
use crate::transform::RigidTransform;

fn check_indices(a: &WeightedPointSet, b: &WeightedPointSet, plan: &TransportPlan) -> Result<()> {
    a.check_dim(b)?;
    if let Some(e) = plan.entries.iter().find(|e| e.source >= a.len() || e.target >= b.len()) {
        return Err(AlignError::InvalidInput(format!(
            "flow entry ({}, {}) out of range for sets of size {} and {}",
            e.source,
            e.target,
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `sum_ij f_ij a_i b_j^T`, the `d x d` product `A F B^T`.
///
/// Flows are first summed per source into `s_i = sum_j f_ij b_j`, so the
/// work is `O(nnz d + n1 d^2)`.
pub fn flow_cross_covariance(a: &WeightedPointSet, b: &WeightedPointSet, plan: &TransportPlan) -> Result<DMatrix<f64>> {
    check_indices(a, b, plan)?;
    let d = a.dim();
    let mut s = vec![0.0; a.len() * d];
    for e in &plan.entries {
        for (acc, x) in s[e.source * d..(e.source + 1) * d].iter_mut().zip(b.point(e.target)) {
            *acc += e.flow * x;
        }
    }
    // A (d x n1) times S^T (n1 x d)
    let am = DMatrix::from_column_slice(d, a.len(), a.coords());
    let sm = DMatrix::from_column_slice(d, a.len(), &s);
    Ok(am * sm.transpose())
}

/// Rigid transform minimizing `sum_ij f_ij |a_i - (R b_j + v)|^2`.
///
/// Reflections are allowed unless `rotation_only` is set, in which case the
/// singular vector of the smallest singular value is flipped when needed to
/// keep `det R = +1`.
pub fn weighted_procrustes(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    plan: &TransportPlan,
    rotation_only: bool,
) -> Result<RigidTransform> {
    check_indices(a, b, plan)?;
    let d = a.dim();
    let total: f64 = plan.entries.iter().map(|e| e.flow).sum();
    if !(total > 0.0) {
        return Err(AlignError::InvalidInput("flow has no mass".into()));
    }
    let mut mu_a = DVector::<f64>::zeros(d);
    let mut mu_b = DVector::<f64>::zeros(d);
    for e in &plan.entries {
        mu_a += DVector::from_column_slice(a.point(e.source)) * e.flow;
        mu_b += DVector::from_column_slice(b.point(e.target)) * e.flow;
    }
    mu_a /= total;
    mu_b /= total;

    let c = flow_cross_covariance(a, b, plan)? - &mu_a * mu_b.transpose() * total;
    if c.iter().any(|x| !x.is_finite()) {
        return Err(AlignError::Svd);
    }
    let svd = c.svd(true, true);
    let (mut u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(AlignError::Svd),
    };
    if rotation_only && (&u * &v_t).determinant() < 0.0 {
        let smallest = svd.singular_values.argmin().0;
        u.column_mut(smallest).neg_mut();
    }
    let rotation = u * v_t;
    let translation = &mu_a - &rotation * &mu_b;
    RigidTransform::new(rotation, translation)
}

/// `sum_ij f_ij |a_i - t(b_j)|^2`.
pub fn transformed_cost(a: &WeightedPointSet, b: &WeightedPointSet, plan: &TransportPlan, t: &RigidTransform) -> f64 {
    plan.entries.iter().map(|e| e.flow * squared_distance(a.point(e.source), &t.apply_point(b.point(e.target)))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::FlowEntry;

    fn diagonal(n: usize) -> TransportPlan {
        TransportPlan {
            entries: (0..n).map(|i| FlowEntry { source: i, target: i, flow: 1.0 }).collect(),
            total_flow: n as f64,
            cost: 0.0,
            normalized_distance: 0.0,
        }
    }

    #[test]
    fn empty_flow_gives_zero() {
        let a = WeightedPointSet::uniform(vec![vec![1.0, 2.0]]).unwrap();
        let c = flow_cross_covariance(&a, &a, &TransportPlan::empty()).unwrap();
        assert_eq!(c, DMatrix::zeros(2, 2));
    }

    #[test]
    fn single_outer_product() {
        let a = WeightedPointSet::uniform(vec![vec![1.0, 0.0]]).unwrap();
        let b = WeightedPointSet::uniform(vec![vec![0.0, 1.0]]).unwrap();
        let c = flow_cross_covariance(&a, &b, &diagonal(1)).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn out_of_range_entry() {
        let a = WeightedPointSet::uniform(vec![vec![1.0, 0.0]]).unwrap();
        assert!(flow_cross_covariance(&a, &a, &diagonal(2)).is_err());
        assert!(weighted_procrustes(&a, &a, &TransportPlan::empty(), false).is_err());
    }

    #[test]
    fn aligned_sets_give_identity() {
        let a = WeightedPointSet::uniform(vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let t = weighted_procrustes(&a, &a, &diagonal(3), false).unwrap();
        assert!((t.rotation - DMatrix::<f64>::identity(2, 2)).amax() < 1e-9);
        assert!(t.translation.amax() < 1e-9);
    }

    #[test]
    fn recovers_quarter_turn() {
        let a = WeightedPointSet::uniform(vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let turn = RigidTransform::new(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]), DVector::zeros(2)).unwrap();
        let b = turn.apply(&a).unwrap();
        let t = weighted_procrustes(&a, &b, &diagonal(3), false).unwrap();
        assert!((&t.rotation - turn.inverse().rotation).amax() < 1e-9);
        assert!(transformed_cost(&a, &b, &diagonal(3), &t) <= 1e-12);
    }

    #[test]
    fn rotation_only_avoids_reflection() {
        let a = WeightedPointSet::uniform(vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -0.5]]).unwrap();
        let mirror = RigidTransform::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), DVector::zeros(2)).unwrap();
        let b = mirror.apply(&a).unwrap();
        let free = weighted_procrustes(&a, &b, &diagonal(3), false).unwrap();
        assert!((free.determinant() + 1.0).abs() < 1e-9);
        let proper = weighted_procrustes(&a, &b, &diagonal(3), true).unwrap();
        assert!((proper.determinant() - 1.0).abs() < 1e-9);
        assert!(proper.orthogonality_error() < 1e-9);
    }
}
