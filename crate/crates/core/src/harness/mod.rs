//! Instance loading and generation, the experiment runner, and the CLI.

mod cli;
mod experiment;
mod planted;

use std::path::Path;

pub use cli::{cli_main, cli_run};
pub use experiment::{
    centers_for_rate, derive_seed, run_experiment, CellSummary, ExperimentConfig, ExperimentMethod, ExperimentReport,
    InstanceSource, TrialRecord,
};
pub use planted::{generate_planted, Planted};

use crate::error::Result;
use crate::pointset::WeightedPointSet;

/// Reads a point set in the `n d` / `w x1 .. xd` text format.
pub fn load_pointset(path: impl AsRef<Path>) -> Result<WeightedPointSet> {
    WeightedPointSet::load(path)
}
