//! Log-domain Sinkhorn iterations for balanced entropic transport, followed
//! by a rounding step that moves the plan onto the exact transport polytope.

use crate::error::{AlignError, Result};
use crate::pointset::CostMatrix;

#[derive(Debug)]
pub struct SinkhornOutput {
    /// Dense row-major plan with exact marginals.
    pub plan: Vec<f64>,
    pub iterations: usize,
    /// Relative L1 row-marginal violation before rounding.
    pub violation: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `supply` and `demand` must be strictly positive and carry the same mass.
pub fn solve(
    supply: &[f64],
    demand: &[f64],
    cost: &CostMatrix,
    reg: f64,
    max_iters: usize,
    tolerance: f64,
) -> Result<SinkhornOutput> {
    let (m, n) = (supply.len(), demand.len());
    if reg <= 0.0 || !reg.is_finite() {
        return Err(AlignError::InvalidInput(format!("regularization must be positive, got {reg}")));
    }
    let mass: f64 = supply.iter().sum();
    let log_a: Vec<f64> = supply.iter().map(|a| a.ln()).collect();
    let log_b: Vec<f64> = demand.iter().map(|b| b.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];

    let row_violation = |f: &[f64], g: &[f64]| -> f64 {
        (0..m)
            .map(|i| {
                let r: f64 = (0..n).map(|j| ((f[i] + g[j] - cost.get(i, j)) / reg).exp()).sum();
                (r - supply[i]).abs()
            })
            .sum::<f64>()
            / mass
    };

    let mut violation = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        for i in 0..m {
            let row = cost.row(i);
            f[i] = reg * (log_a[i] - log_sum_exp(g.iter().zip(row).map(|(gj, c)| (gj - c) / reg)));
        }
        for j in 0..n {
            g[j] = reg
                * (log_b[j] - log_sum_exp((0..m).map(|i| (f[i] - cost.data[i * n + j]) / reg)));
        }
        if iterations % 10 == 0 || iterations == max_iters {
            violation = row_violation(&f, &g);
            if violation <= tolerance {
                break;
            }
        }
    }
    if violation > tolerance {
        return Err(AlignError::NotConverged { iterations, violation });
    }

    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            plan[i * n + j] = ((f[i] + g[j] - cost.get(i, j)) / reg).exp();
        }
    }
    round_to_marginals(&mut plan, supply, demand);
    Ok(SinkhornOutput { plan, iterations, violation })
}

/// Scales rows then columns down to their targets and spreads the leftover
/// mass as a rank-one correction, giving a plan with the requested marginals.
pub fn round_to_marginals(plan: &mut [f64], supply: &[f64], demand: &[f64]) {
    let (m, n) = (supply.len(), demand.len());
    for i in 0..m {
        let r: f64 = plan[i * n..(i + 1) * n].iter().sum();
        if r > supply[i] {
            let s = supply[i] / r;
            plan[i * n..(i + 1) * n].iter_mut().for_each(|x| *x *= s);
        }
    }
    let mut col = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            col[j] += plan[i * n + j];
        }
    }
    for j in 0..n {
        if col[j] > demand[j] {
            let s = demand[j] / col[j];
            for i in 0..m {
                plan[i * n + j] *= s;
            }
        }
    }
    let err_r: Vec<f64> =
        (0..m).map(|i| (supply[i] - plan[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0)).collect();
    let mut err_c = demand.to_vec();
    for i in 0..m {
        for j in 0..n {
            err_c[j] -= plan[i * n + j];
        }
    }
    err_c.iter_mut().for_each(|e| *e = e.max(0.0));
    let total: f64 = err_c.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan[i * n + j] += err_r[i] * err_c[j] / total;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_restores_marginals() {
        let mut plan = vec![0.5, 0.1, 0.2, 0.6];
        round_to_marginals(&mut plan, &[0.5, 0.5], &[0.4, 0.6]);
        let r0 = plan[0] + plan[1];
        let c1 = plan[1] + plan[3];
        assert!((r0 - 0.5).abs() < 1e-15);
        assert!((c1 - 0.6).abs() < 1e-15);
        assert!(plan.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn rejects_bad_regularization() {
        let c = CostMatrix::zeros(1, 1);
        assert!(solve(&[1.0], &[1.0], &c, 0.0, 10, 1e-9).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let c = CostMatrix { rows: 2, cols: 2, data: vec![0.0, 1.0, 1.0, 0.0] };
        let err = solve(&[0.9, 0.1], &[0.1, 0.9], &c, 1e-3, 1, 1e-12).unwrap_err();
        assert!(matches!(err, AlignError::NotConverged { iterations: 1, .. }));
    }
}
