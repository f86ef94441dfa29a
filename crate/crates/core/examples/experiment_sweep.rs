//! A compression-rate by fraction sweep driven by `examples/sweep.toml`,
//! printed as CSV.

use wasserstein_align::harness::{run_experiment, ExperimentConfig};

fn main() -> wasserstein_align::Result<()> {
    let cfg = ExperimentConfig::from_toml(include_str!("sweep.toml"))?;
    let report = run_experiment(&cfg)?;
    print!("{}", report.to_csv());
    for f in &report.failures {
        eprintln!("failure: {f:?}");
    }
    Ok(())
}
