//! Test-only oracles, independent of the library's solvers.

#![allow(dead_code)]

use rand::Rng;
use wasserstein_align::WeightedPointSet;

/// Minimizes `c.x` subject to `A x = b`, `x >= 0` with a dense two-phase
/// tableau simplex using Bland's rule. Returns `None` when infeasible.
pub fn lp_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let rows = a.len();
    let nvar = c.len();
    // columns: original vars, one artificial per row, rhs
    let width = nvar + rows + 1;
    let mut t = vec![vec![0.0; width]; rows];
    for r in 0..rows {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for v in 0..nvar {
            t[r][v] = sign * a[r][v];
        }
        t[r][nvar + r] = 1.0;
        t[r][width - 1] = sign * b[r];
    }
    let mut basis: Vec<usize> = (nvar..nvar + rows).collect();

    let phase1: Vec<f64> = (0..nvar + rows).map(|v| if v >= nvar { 1.0 } else { 0.0 }).collect();
    run_simplex(&mut t, &mut basis, &phase1, nvar + rows);
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= nvar)
        .map(|(r, _)| t[r][width - 1])
        .sum();
    if infeas > 1e-9 {
        return None;
    }
    // drive remaining (zero-valued) artificials out of the basis when possible
    for r in 0..rows {
        if basis[r] >= nvar {
            if let Some(v) = (0..nvar).find(|&v| t[r][v].abs() > 1e-12) {
                pivot(&mut t, r, v);
                basis[r] = v;
            }
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(rows));
    run_simplex(&mut t, &mut basis, &phase2, nvar);
    Some(basis.iter().enumerate().filter(|(_, &v)| v < nvar).map(|(r, &v)| c[v] * t[r][width - 1]).sum())
}

fn pivot(t: &mut [Vec<f64>], r: usize, col: usize) {
    let p = t[r][col];
    t[r].iter_mut().for_each(|x| *x /= p);
    let prow = t[r].clone();
    for (k, row) in t.iter_mut().enumerate() {
        if k != r {
            let f = row[col];
            if f != 0.0 {
                row.iter_mut().zip(&prow).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
}

/// Bland's rule; only columns `< enter_limit` may enter.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], enter_limit: usize) {
    let width = t[0].len();
    loop {
        let enter = (0..enter_limit).find(|&v| {
            if basis.contains(&v) {
                return false;
            }
            let reduced = cost[v] - basis.iter().enumerate().map(|(r, &bv)| cost[bv] * t[r][v]).sum::<f64>();
            reduced < -1e-11
        });
        let Some(col) = enter else { return };
        let mut best: Option<(f64, usize)> = None;
        for r in 0..t.len() {
            if t[r][col] > 1e-12 {
                let ratio = t[r][width - 1] / t[r][col];
                match best {
                    Some((br, bi)) if ratio > br + 1e-15 || (ratio >= br - 1e-15 && basis[r] > basis[bi]) => {}
                    _ => best = Some((ratio, r)),
                }
            }
        }
        let Some((_, r)) = best else { return };
        pivot(t, r, col);
        basis[r] = col;
    }
}

/// Optimal cost of shipping exactly `mass` between `supply` and `demand`
/// with `<=` capacities, by the LP above.
pub fn transport_lp(supply: &[f64], demand: &[f64], cost: &[Vec<f64>], mass: f64) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let nvar = m * n + m + n; // flows, row slacks, column slacks
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let mut row = vec![0.0; nvar];
        for j in 0..n {
            row[i * n + j] = 1.0;
        }
        row[m * n + i] = 1.0;
        a.push(row);
        b.push(supply[i]);
    }
    for j in 0..n {
        let mut row = vec![0.0; nvar];
        for i in 0..m {
            row[i * n + j] = 1.0;
        }
        row[m * n + m + j] = 1.0;
        a.push(row);
        b.push(demand[j]);
    }
    let mut row = vec![0.0; nvar];
    row[..m * n].iter_mut().for_each(|x| *x = 1.0);
    a.push(row);
    b.push(mass);
    let mut c = vec![0.0; nvar];
    for i in 0..m {
        for j in 0..n {
            c[i * n + j] = cost[i][j];
        }
    }
    lp_min(&c, &a, &b).expect("transport LP is feasible")
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Fractional distance by the LP oracle (unnormalized cost).
pub fn fractional_cost_oracle(a: &WeightedPointSet, b: &WeightedPointSet, lambda: f64) -> f64 {
    let cost: Vec<Vec<f64>> = a.points().map(|p| b.points().map(|q| sq_dist(p, q)).collect()).collect();
    let mass = lambda * a.total_weight().min(b.total_weight());
    transport_lp(a.weights(), b.weights(), &cost, mass)
}

pub fn random_set<R: Rng>(rng: &mut R, n: usize, d: usize, integer_weights: bool) -> WeightedPointSet {
    let points = (0..n).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let weights = (0..n)
        .map(|_| if integer_weights { rng.random_range(1..5) as f64 } else { rng.random_range(0.1..3.0) })
        .collect();
    WeightedPointSet::new(points, weights).unwrap()
}

/// Exhaustive optimal discrete k-center radius (centers drawn from the set).
pub fn optimal_kcenter_radius(p: &WeightedPointSet, k: usize) -> f64 {
    let n = p.len();
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let r = (0..n)
            .map(|i| subset.iter().map(|&c| sq_dist(p.point(i), p.point(c))).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
            .sqrt();
        best = best.min(r);
        // next combination
        let mut idx = k;
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if subset[idx] < n - k + idx {
                break;
            }
        }
        subset[idx] += 1;
        for t in idx + 1..k {
            subset[t] = subset[t - 1] + 1;
        }
    }
}

/// `M_A M_B^T` with the `d x (n1 n2)` matrices built column by column,
/// column `(i, j)` being `sqrt(f_ij) a_i` and `sqrt(f_ij) b_j`.
pub fn explicit_cross_covariance(a: &WeightedPointSet, b: &WeightedPointSet, flow: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.dim();
    let (n1, n2) = (a.len(), b.len());
    let mut ma = vec![vec![0.0; n1 * n2]; d];
    let mut mb = vec![vec![0.0; n1 * n2]; d];
    for i in 0..n1 {
        for j in 0..n2 {
            let s = flow[i][j].sqrt();
            for r in 0..d {
                ma[r][i * n2 + j] = s * a.point(i)[r];
                mb[r][i * n2 + j] = s * b.point(j)[r];
            }
        }
    }
    (0..d).map(|r| (0..d).map(|c| (0..n1 * n2).map(|k| ma[r][k] * mb[c][k]).sum()).collect()).collect()
}
