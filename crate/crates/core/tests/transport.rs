mod common;

use common::{fractional_cost_oracle, random_set};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasserstein_align::transport::{network_simplex, Regularization};
use wasserstein_align::{
    fractional_wasserstein, wasserstein_exact, wasserstein_sinkhorn, CostMatrix, TransportConfig, TransportPlan,
    WeightedPointSet,
};

fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1e-12)
}

fn assert_feasible(plan: &TransportPlan, a: &WeightedPointSet, b: &WeightedPointSet, lambda: f64) {
    assert!(plan.entries.iter().all(|e| e.flow >= 0.0));
    assert!(plan.capacity_violation(a, b) <= 1e-9, "violation {}", plan.capacity_violation(a, b));
    let mass = lambda * a.total_weight().min(b.total_weight());
    assert!(rel_err(plan.total_flow, mass) <= 1e-9, "flow {} vs {}", plan.total_flow, mass);
}

#[test]
fn exact_matches_lp_on_integer_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = random_set(&mut rng, 5, 3, true);
    let b = random_set(&mut rng, 6, 3, true);
    let plan = wasserstein_exact(&a, &b).unwrap();
    let oracle = fractional_cost_oracle(&a, &b, 1.0);
    assert!(rel_err(plan.cost, oracle) < 1e-7, "{} vs {}", plan.cost, oracle);
    assert_feasible(&plan, &a, &b, 1.0);
}

#[test]
fn fractional_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let a = random_set(&mut rng, 5, 2, false);
        let b = random_set(&mut rng, 5, 2, false);
        for lambda in [0.5, 0.8, 0.9, 1.0] {
            let plan = fractional_wasserstein(&a, &b, lambda, &TransportConfig::default()).unwrap();
            let oracle = fractional_cost_oracle(&a, &b, lambda);
            assert!(rel_err(plan.cost, oracle) < 1e-7, "lambda {lambda}: {} vs {}", plan.cost, oracle);
            assert_feasible(&plan, &a, &b, lambda);
        }
    }
}

#[test]
fn lambda_one_equals_plain() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_set(&mut rng, 7, 4, false);
    let b = random_set(&mut rng, 9, 4, false);
    let plain = wasserstein_exact(&a, &b).unwrap();
    let frac = fractional_wasserstein(&a, &b, 1.0, &TransportConfig::default()).unwrap();
    assert!((plain.normalized_distance - frac.normalized_distance).abs() <= 1e-9 * plain.normalized_distance);
}

#[test]
fn medium_instance_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let a = random_set(&mut rng, 12, 3, false);
    let b = random_set(&mut rng, 10, 3, false);
    for lambda in [0.7, 1.0] {
        let plan = fractional_wasserstein(&a, &b, lambda, &TransportConfig::default()).unwrap();
        let oracle = fractional_cost_oracle(&a, &b, lambda);
        assert!(rel_err(plan.cost, oracle) < 1e-7, "{} vs {}", plan.cost, oracle);
    }
}

#[test]
fn network_simplex_on_permutation_problem() {
    // unit-weight assignment where the optimum is a known permutation
    let n = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let perm: Vec<usize> = {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            p.swap(i, j);
        }
        p
    };
    let mut c = CostMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c.set(i, j, if perm[i] == j { 0.0 } else { 1.0 + rng.random::<f64>() });
        }
    }
    let s = network_simplex::solve(&vec![1.0; n], &vec![1.0; n], &c, 2.0).unwrap();
    assert_eq!(s.cost, 0.0);
    for (i, j, f) in s.flows {
        assert_eq!(perm[i], j);
        assert_eq!(f, 1.0);
    }
}

#[test]
fn larger_instance_is_feasible_and_beats_sinkhorn() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_set(&mut rng, 150, 5, false);
    let b = random_set(&mut rng, 170, 5, false);
    let exact = wasserstein_exact(&a, &b).unwrap();
    assert_feasible(&exact, &a, &b, 1.0);
    // a basic solution has at most n1 + n2 + 1 positive entries
    assert!(exact.entries.len() <= 150 + 170 + 1);
    let frac = fractional_wasserstein(&a, &b, 0.9, &TransportConfig::default()).unwrap();
    assert_feasible(&frac, &a, &b, 0.9);
    assert!(frac.cost <= exact.cost);
}

#[test]
fn sinkhorn_identical_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_set(&mut rng, 8, 3, false);
    let cfg = TransportConfig { sinkhorn_regularization: Regularization::RelativeToMedian(1e-3), ..TransportConfig::sinkhorn() };
    let plan = wasserstein_sinkhorn(&a, &a, &cfg).unwrap();
    assert!(plan.normalized_distance <= 1e-6, "{}", plan.normalized_distance);
    assert_feasible(&plan, &a, &a, 1.0);
}

#[test]
fn sinkhorn_unit_square() {
    let a = WeightedPointSet::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let b = WeightedPointSet::uniform(vec![vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let plan = wasserstein_sinkhorn(&a, &b, &TransportConfig::sinkhorn()).unwrap();
    assert!((plan.normalized_distance - 1.0).abs() < 0.05, "{}", plan.normalized_distance);
}

#[test]
fn sinkhorn_close_to_exact_on_random_20() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let a = random_set(&mut rng, 20, 5, false);
    let b = random_set(&mut rng, 20, 5, false).with_weights(a.weights().to_vec()).unwrap();
    let exact = wasserstein_exact(&a, &b).unwrap();
    let approx = wasserstein_sinkhorn(&a, &b, &TransportConfig::sinkhorn()).unwrap();
    assert_feasible(&approx, &a, &b, 1.0);
    assert!(approx.cost >= exact.cost * (1.0 - 1e-9));
    assert!(rel_err(approx.cost, exact.cost) < 0.05, "{} vs {}", approx.cost, exact.cost);
}

#[test]
fn sinkhorn_fractional_drops_outliers() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let base = random_set(&mut rng, 12, 2, false);
    let mut pa: Vec<Vec<f64>> = base.points().map(|p| p.to_vec()).collect();
    let mut pb: Vec<Vec<f64>> = base.points().map(|p| vec![p[0] + 0.1, p[1]]).collect();
    pa.extend([vec![60.0, 0.0], vec![0.0, 60.0]]);
    pb.extend([vec![-60.0, 0.0], vec![0.0, -60.0]]);
    let a = WeightedPointSet::uniform(pa).unwrap();
    let b = WeightedPointSet::uniform(pb).unwrap();
    let plain = wasserstein_exact(&a, &b).unwrap();
    let frac = fractional_wasserstein(&a, &b, 0.8, &TransportConfig::sinkhorn()).unwrap();
    let exact = fractional_wasserstein(&a, &b, 0.8, &TransportConfig::default()).unwrap();
    assert_feasible(&frac, &a, &b, 0.8);
    assert!(frac.normalized_distance < 0.1 * plain.normalized_distance, "{} vs {}", frac.normalized_distance, plain.normalized_distance);
    assert!(frac.cost >= exact.cost * (1.0 - 1e-9));
}

#[test]
fn plan_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_set(&mut rng, 4, 2, false);
    let b = random_set(&mut rng, 5, 2, false);
    let plan = wasserstein_exact(&a, &b).unwrap();
    assert_eq!(TransportPlan::parse(&plan.to_text()).unwrap(), plan);
}

fn small_set(max_n: usize) -> impl Strategy<Value = WeightedPointSet> {
    (1..=max_n, 1usize..=3).prop_flat_map(|(n, d)| {
        (prop::collection::vec(prop::collection::vec(-4.0f64..4.0, d), n), prop::collection::vec(0.1f64..3.0, n))
            .prop_map(|(p, w)| WeightedPointSet::new(p, w).unwrap())
    })
}

fn pair(max_n: usize) -> impl Strategy<Value = (WeightedPointSet, WeightedPointSet)> {
    (1usize..=3).prop_flat_map(move |d| {
        let set = move || {
            (1..=max_n).prop_flat_map(move |n| {
                (prop::collection::vec(prop::collection::vec(-4.0f64..4.0, d), n), prop::collection::vec(0.1f64..3.0, n))
                    .prop_map(|(p, w)| WeightedPointSet::new(p, w).unwrap())
            })
        };
        (set(), set())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_weights_keeps_distance((a, b) in pair(6), c in 0.1f64..10.0, lambda in 0.3f64..1.0) {
        let cfg = TransportConfig::default();
        let base = fractional_wasserstein(&a, &b, lambda, &cfg).unwrap();
        let sa = a.with_weights(a.weights().iter().map(|w| w * c).collect()).unwrap();
        let sb = b.with_weights(b.weights().iter().map(|w| w * c).collect()).unwrap();
        let scaled = fractional_wasserstein(&sa, &sb, lambda, &cfg).unwrap();
        prop_assert!((base.normalized_distance - scaled.normalized_distance).abs()
            <= 1e-9 * base.normalized_distance.max(1e-9));
    }

    #[test]
    fn symmetric_in_arguments((a, b) in pair(6), lambda in 0.3f64..1.0) {
        let cfg = TransportConfig::default();
        let ab = fractional_wasserstein(&a, &b, lambda, &cfg).unwrap();
        let ba = fractional_wasserstein(&b, &a, lambda, &cfg).unwrap();
        prop_assert!((ab.normalized_distance - ba.normalized_distance).abs()
            <= 1e-9 * ab.normalized_distance.max(1e-9));
    }

    #[test]
    fn unnormalized_cost_grows_with_fraction((a, b) in pair(6)) {
        let cfg = TransportConfig::default();
        let mut last = 0.0f64;
        for lambda in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let plan = fractional_wasserstein(&a, &b, lambda, &cfg).unwrap();
            prop_assert!(plan.cost >= last - 1e-9 * last.max(1.0));
            last = plan.cost;
        }
    }

    #[test]
    fn plans_are_feasible((a, b) in pair(6), lambda in 0.05f64..=1.0) {
        let plan = fractional_wasserstein(&a, &b, lambda, &TransportConfig::default()).unwrap();
        assert_feasible(&plan, &a, &b, lambda);
    }

    #[test]
    fn cost_matrix_transposes(a in small_set(5), b in small_set(5)) {
        prop_assume!(a.dim() == b.dim());
        let ab = wasserstein_align::cost_matrix(&a, &b).unwrap();
        let ba = wasserstein_align::cost_matrix(&b, &a).unwrap();
        prop_assert_eq!(ab.transpose(), ba);
    }
}
