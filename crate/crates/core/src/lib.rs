//! Rigid alignment of weighted point sets under the squared-Euclidean
//! Wasserstein distance.
//!
//! The pipeline compresses both sets (k-center and friends), aligns the
//! compressed sets by alternating optimal flows and weighted Procrustes
//! updates, then maps the original second set with the composed transform
//! and solves one final transport problem.

pub mod alignment;
pub mod compression;
pub mod error;
pub mod harness;
pub mod plan;
pub mod pointset;
pub mod transform;
pub mod transport;

pub use alignment::{
    align_with_compression, alternate_minimize, flow_cross_covariance, weighted_procrustes, AlignmentConfig,
    AlignmentReport,
};
pub use compression::{compress, Budget, CompressionResult, Method};
pub use error::{AlignError, Result};
pub use harness::{generate_planted, load_pointset};
pub use plan::{FlowEntry, TransportPlan};
pub use pointset::{cost_matrix, diameter_estimate, exact_diameter, CostMatrix, WeightedPointSet};
pub use transform::{compose_sequence, RigidTransform};
pub use transport::{
    augment_with_dummies, fractional_wasserstein, wasserstein_exact, wasserstein_sinkhorn, Backend,
    Regularization, TransportConfig,
};
