//! Rigid transformations `x -> R x + v` with `R` orthogonal.
//!
//! Reflections (`det R = -1`) are allowed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{AlignError, Result};
use crate::pointset::WeightedPointSet;

#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl RigidTransform {
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let d = rotation.nrows();
        if rotation.ncols() != d {
            return Err(AlignError::InvalidInput("rotation must be square".into()));
        }
        if translation.len() != d {
            return Err(AlignError::DimensionMismatch { expected: d, found: translation.len() });
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity(dim: usize) -> Self {
        Self { rotation: DMatrix::identity(dim, dim), translation: DVector::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.rotation.transpose() * &self.rotation - DMatrix::<f64>::identity(d, d)).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.rotation.clone().determinant()
    }

    pub fn apply_point(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.translation.as_slice().to_vec();
        for (r, o) in out.iter_mut().enumerate() {
            for c in 0..d {
                *o += self.rotation[(r, c)] * p[c];
            }
        }
        out
    }

    /// `R p + v` for every point, weights unchanged.
    pub fn apply(&self, p: &WeightedPointSet) -> Result<WeightedPointSet> {
        if p.dim() != self.dim() {
            return Err(AlignError::DimensionMismatch { expected: self.dim(), found: p.dim() });
        }
        let d = self.dim();
        // Points as columns of a d x n matrix; one product does the whole set.
        let pts = DMatrix::from_column_slice(d, p.len(), p.coords());
        let mut moved = &self.rotation * pts;
        for mut col in moved.column_iter_mut() {
            col += &self.translation;
        }
        WeightedPointSet::from_flat(d, moved.as_slice().to_vec(), p.weights().to_vec())
    }

    /// `self` followed by `next`: `x -> next(self(x))`.
    pub fn then(&self, next: &RigidTransform) -> Result<RigidTransform> {
        if next.dim() != self.dim() {
            return Err(AlignError::DimensionMismatch { expected: self.dim(), found: next.dim() });
        }
        Ok(RigidTransform {
            rotation: &next.rotation * &self.rotation,
            translation: &next.rotation * &self.translation + &next.translation,
        })
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        let translation = -(&rt * &self.translation);
        RigidTransform { rotation: rt, translation }
    }

    /// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
    /// signs of `diag(R)` folded into `Q`.
    pub fn random_orthogonal<G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DMatrix<f64> {
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for c in 0..dim {
            if r[(c, c)] < 0.0 {
                q.column_mut(c).neg_mut();
            }
        }
        q
    }

    /// Random orthogonal part plus a Gaussian translation scaled by `shift`.
    pub fn random<G: Rng + ?Sized>(dim: usize, shift: f64, rng: &mut G) -> RigidTransform {
        let rotation = Self::random_orthogonal(dim, rng);
        let translation = DVector::from_fn(dim, |_, _| shift * rng.sample::<f64, _>(StandardNormal));
        RigidTransform { rotation, translation }
    }

    pub fn to_serialized(&self) -> SerializedTransform {
        let d = self.dim();
        SerializedTransform {
            dim: d,
            rotation: (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|rc| self.rotation[rc]).collect(),
            translation: self.translation.as_slice().to_vec(),
        }
    }
}

/// Row-major JSON form of a transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedTransform {
    pub dim: usize,
    pub rotation: Vec<f64>,
    pub translation: Vec<f64>,
}

impl TryFrom<SerializedTransform> for RigidTransform {
    type Error = AlignError;

    fn try_from(s: SerializedTransform) -> Result<Self> {
        if s.rotation.len() != s.dim * s.dim {
            return Err(AlignError::InvalidInput("rotation has the wrong number of entries".into()));
        }
        RigidTransform::new(
            DMatrix::from_row_slice(s.dim, s.dim, &s.rotation),
            DVector::from_vec(s.translation),
        )
    }
}

/// Collapses a sequence of per-round transforms (applied first to last) into
/// one.
///
/// The result is `R = R_h ... R_1` and
/// `v = (R_h ... R_2) v_1 + (R_h ... R_3) v_2 + ... + R_h v_{h-1} + v_h`.
/// Suffix products are accumulated from the back, so the cost is `O(h d^3)`
/// regardless of how many points the transform is later applied to.
pub fn compose_sequence(steps: &[RigidTransform]) -> Result<RigidTransform> {
    let last = steps.last().ok_or_else(|| AlignError::InvalidInput("empty transform sequence".into()))?;
    let d = last.dim();
    if let Some(bad) = steps.iter().find(|s| s.dim() != d) {
        return Err(AlignError::DimensionMismatch { expected: d, found: bad.dim() });
    }
    // suffix = R_h ... R_{l+1} while visiting step l
    let mut suffix = DMatrix::<f64>::identity(d, d);
    let mut translation = DVector::<f64>::zeros(d);
    for step in steps.iter().rev() {
        translation += &suffix * &step.translation;
        suffix = &suffix * &step.rotation;
    }
    Ok(RigidTransform { rotation: suffix, translation })
}
