//! Alternating minimization of the (fractional) Wasserstein distance over
//! rigid transforms, optionally on compressed inputs.

mod pipeline;
mod procrustes;

pub use pipeline::{
    align_with_compression, alternate_minimize, AlignmentConfig, AlignmentReport, CompressionInfo, Round, Timings,
};
pub use procrustes::{flow_cross_covariance, transformed_cost, weighted_procrustes};
