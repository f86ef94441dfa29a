use std::path::Path;

use wasserstein_align::compression::gonzalez_kcenter;
use wasserstein_align::harness::{cli_run, run_experiment, ExperimentConfig};
use wasserstein_align::{exact_diameter, generate_planted, load_pointset, AlignError, WeightedPointSet};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("walign").chain(args.iter().copied());
    let code = cli_run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn loads_single_origin_point() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("one.pts");
    std::fs::write(&f, "1 2\n1.0 0.0 0.0").unwrap();
    let p = load_pointset(&f).unwrap();
    assert_eq!((p.len(), p.dim()), (1, 2));
    assert_eq!(p.point(0), &[0.0, 0.0]);
    assert_eq!(p.weight(0), 1.0);
}

#[test]
fn negative_weight_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.pts");
    std::fs::write(&f, "2 1\n1.0 0.0\n-1.0 2.0\n").unwrap();
    assert!(matches!(load_pointset(&f), Err(AlignError::Parse { line: 3, .. })));
    assert!(matches!(load_pointset(dir.path().join("missing.pts")), Err(AlignError::File { .. })));
}

#[test]
fn save_then_load_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.pts");
    let p = WeightedPointSet::new(vec![vec![0.1, -2.5e-7], vec![1.0 / 3.0, 7.0]], vec![0.3, 2.0]).unwrap();
    p.save(&f).unwrap();
    assert_eq!(load_pointset(&f).unwrap(), p);
}

#[test]
fn line_in_high_dimension_obeys_segment_bound() {
    let p = generate_planted(400, 50, 1, 0.0, 0.0, 5).unwrap();
    let delta = exact_diameter(&p.a);
    for k in [2, 4, 8, 16, 32] {
        let r = gonzalez_kcenter(&p.a, k, 5).unwrap();
        assert!(r.radius <= 2.0 * delta / k as f64 + 1e-12, "k = {k}");
    }
}

#[test]
fn emd_of_a_set_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pts"), dir.path().join("b.pts"));
    let (code, _, err) =
        run(&["gen", "--n", "30", "--d", "4", "--m", "2", "--seed", "2", "--out-a", path_str(&a), "--out-b", path_str(&b)]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = run(&["emd", path_str(&a), path_str(&a)]);
    assert_eq!(code, 0);
    assert!(out.trim().parse::<f64>().unwrap().abs() <= 1e-9);
    let (code, out, _) = run(&["emd", path_str(&a), path_str(&b), "--lambda", "0.8", "--backend", "sinkhorn"]);
    assert_eq!(code, 0);
    assert!(out.trim().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn align_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, t) = (dir.path().join("a.pts"), dir.path().join("b.pts"), dir.path().join("t.json"));
    let gen = ["gen", "--n", "80", "--d", "6", "--m", "2", "--noise", "0.01", "--outliers", "0.1", "--seed", "7"];
    let mut args: Vec<&str> = gen.to_vec();
    args.extend(["--out-a", path_str(&a), "--out-b", path_str(&b), "--truth", path_str(&t)]);
    assert_eq!(run(&args).0, 0);
    assert!(std::fs::read_to_string(&t).unwrap().contains("rotation"));
    let align = [
        "align", path_str(&a), path_str(&b), "--method", "kcenter+", "--rate", "0.1", "--lambda", "0.9", "--seed", "7",
        "--restarts", "2",
    ];
    let (c1, r1, _) = run(&align);
    let (c2, r2, _) = run(&align);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(r1, r2);
    let json: serde_json::Value = serde_json::from_str(&r1).unwrap();
    assert_eq!(json["compression"]["k_a"], 8);
    assert!(json["final_distance"].as_f64().unwrap() >= 0.0);
}

#[test]
fn compress_writes_parsable_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pts"), dir.path().join("b.pts"));
    run(&["gen", "--n", "50", "--d", "3", "--m", "3", "--out-a", path_str(&a), "--out-b", path_str(&b)]);
    let (code, out, _) = run(&["compress", path_str(&a), "--method", "kcenter", "--epsilon", "0.3"]);
    assert_eq!(code, 0);
    let r = wasserstein_align::CompressionResult::parse(&out).unwrap();
    assert_eq!(r.assignment.len(), 50);
    assert!((r.centers.total_weight() - 50.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pts");
    std::fs::write(&a, "1 1\n1 0\n").unwrap();
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["emd", path_str(&a)]).0, 1);
    assert_eq!(run(&["compress", path_str(&a), "--method", "kcenter"]).0, 1);
    let (code, _, err) = run(&["emd", path_str(&a), "nope.pts"]);
    assert_eq!(code, 1);
    assert!(err.contains("nope.pts"));
    assert_eq!(run(&["emd", path_str(&a), path_str(&a), "--lambda", "1.5"]).0, 1);
    // a regularization this small cannot converge in one iteration
    let b = dir.path().join("b.pts");
    std::fs::write(&b, "2 1\n1 0\n1 1\n").unwrap();
    let c = dir.path().join("c.pts");
    std::fs::write(&c, "2 1\n1 5\n1 0.3\n").unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "not toml [").unwrap();
    assert_eq!(run(&["bench", "--config", path_str(&cfg)]).0, 1);
    let (code, _, err) = run(&["emd", path_str(&b), path_str(&c), "--backend", "sinkhorn", "--reg", "1e-9"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.starts_with("walign emd:"));
}

const SWEEP: &str = r#"
methods = ["original", "kcenter", "kcenter+", "random"]
rates = [0.1, 1.0]
fractions = [0.9, 1.0]
trials = 2
seed = 4

[instance]
source = "planted"
n = 60
d = 5
intrinsic_dim = 2
noise = 0.02
outlier_fraction = 0.0

[alignment]
max_rounds = 10
restarts = 1
"#;

#[test]
fn bench_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, SWEEP).unwrap();
    let (code, out, err) = run(&["bench", "--config", path_str(&cfg)]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method,gamma,lambda,trial,distance,t_compress,t_align,t_finalflow,t_total,normalized_time");
    assert_eq!(lines.len(), 1 + 4 * 2 * 2);
}

#[test]
fn experiment_invariants() {
    let cfg = ExperimentConfig::from_toml(SWEEP).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(report.failures.is_empty());
    for c in report.cells.iter().filter(|c| c.method == "original") {
        assert_eq!(c.normalized_time, 1.0);
        assert_eq!(c.trial, 2);
    }
    for lambda in [0.9, 1.0] {
        let orig = report.cell("original", 1.0, lambda).unwrap();
        let kc = report.cell("kcenter", 1.0, lambda).unwrap();
        assert!((orig.distance - kc.distance).abs() <= 1e-9 * orig.distance);
    }
    assert_eq!(report.trials.len(), 4 * 2 * 2 * 2);
    let again = run_experiment(&cfg).unwrap();
    let d1: Vec<f64> = report.cells.iter().map(|c| c.distance).collect();
    let d2: Vec<f64> = again.cells.iter().map(|c| c.distance).collect();
    assert_eq!(d1, d2);
}
