//! Uncompressed alternating minimization on a planted instance.

use wasserstein_align::{alternate_minimize, generate_planted, AlignmentConfig};

fn main() -> wasserstein_align::Result<()> {
    let inst = generate_planted(300, 10, 3, 0.01, 0.0, 4)?;
    let cfg = AlignmentConfig { restarts: 2, seed: 4, ..Default::default() };
    let report = alternate_minimize(&inst.a, &inst.b, &cfg)?;

    for (s, h) in report.start_histories.iter().enumerate() {
        let trace: Vec<String> = h.iter().map(|r| format!("{:.2e}", r.distance)).collect();
        println!("start {s}: {}", trace.join(" "));
    }
    println!("best start {}, final W2^2 {:.3e}", report.start, report.final_distance);
    // only the span of the data is identifiable, so compare points
    let round_trip = report.transform.apply(&inst.truth.apply(&inst.a)?)?;
    let rms = (round_trip.coords().iter().zip(inst.a.coords()).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
        / inst.a.len() as f64)
        .sqrt();
    println!("rms residual against the planted motion {rms:.2e}");
    Ok(())
}
