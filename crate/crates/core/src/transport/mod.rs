//! Plain and fractional squared-Euclidean Wasserstein distances.
//!
//! The fractional distance ships only `lambda * min(W_A, W_B)` mass. It is
//! reduced to an ordinary transport problem by appending a dummy source
//! `a0` and a dummy sink `b0`, each of weight `(1 - lambda) * min(W_A, W_B)`,
//! joined to every real point at zero cost and to each other at a
//! prohibitive cost. Any optimal plan of the augmented problem leaves the
//! dummy-to-dummy edge empty, and its real-to-real part is an optimal
//! fractional plan.

pub mod network_simplex;
pub mod sinkhorn;

use serde::{Deserialize, Serialize};

use crate::error::{AlignError, Result};
use crate::plan::{FlowEntry, TransportPlan};
use crate::pointset::{cost_matrix, CostMatrix, WeightedPointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Sinkhorn,
}

impl std::str::FromStr for Backend {
    type Err = AlignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "sinkhorn" => Ok(Backend::Sinkhorn),
            other => Err(AlignError::InvalidInput(format!("unknown backend `{other}`"))),
        }
    }
}

/// Entropic regularization strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// Multiple of the median ground cost of the instance.
    RelativeToMedian(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub backend: Backend,
    pub sinkhorn_regularization: Regularization,
    pub sinkhorn_max_iters: usize,
    /// Relative L1 marginal violation at which Sinkhorn stops.
    pub sinkhorn_tolerance: f64,
    /// The dummy-to-dummy edge costs this many times `(max finite cost + 1)`.
    pub big_cost_multiplier: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Exact,
            sinkhorn_regularization: Regularization::RelativeToMedian(1e-2),
            sinkhorn_max_iters: 10_000,
            sinkhorn_tolerance: 1e-6,
            big_cost_multiplier: 1e6,
        }
    }
}

impl TransportConfig {
    pub fn sinkhorn() -> Self {
        Self { backend: Backend::Sinkhorn, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let reg = match self.sinkhorn_regularization {
            Regularization::RelativeToMedian(r) | Regularization::Absolute(r) => r,
        };
        if !(reg > 0.0 && reg.is_finite()) {
            return Err(AlignError::InvalidInput("sinkhorn regularization must be positive".into()));
        }
        if self.sinkhorn_max_iters == 0 {
            return Err(AlignError::InvalidInput("sinkhorn_max_iters must be positive".into()));
        }
        if !(self.sinkhorn_tolerance > 0.0) {
            return Err(AlignError::InvalidInput("sinkhorn_tolerance must be positive".into()));
        }
        if !(self.big_cost_multiplier >= 1e3) {
            return Err(AlignError::InvalidInput("big_cost_multiplier must be at least 1e3".into()));
        }
        Ok(())
    }
}

/// A transport instance with the two dummy points appended at the last row
/// and last column.
#[derive(Debug, Clone)]
pub struct AugmentedInstance {
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
    pub cost: CostMatrix,
    pub dummy_weight: f64,
    pub big_cost: f64,
}

impl AugmentedInstance {
    pub fn dummy_source(&self) -> usize {
        self.supply.len() - 1
    }

    pub fn dummy_sink(&self) -> usize {
        self.demand.len() - 1
    }
}

fn check_fraction(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(AlignError::InvalidInput(format!("fraction must lie in (0, 1], got {lambda}")))
    }
}

/// Adds the dummy source `a0` and dummy sink `b0` of weight
/// `(1 - lambda) * min(W_A, W_B)`.
pub fn augment_with_dummies(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    lambda: f64,
    big_cost_multiplier: f64,
) -> Result<AugmentedInstance> {
    check_fraction(lambda)?;
    let base = cost_matrix(a, b)?;
    Ok(augment_costs(a, b, &base, lambda, big_cost_multiplier))
}

fn augment_costs(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    base: &CostMatrix,
    lambda: f64,
    big_cost_multiplier: f64,
) -> AugmentedInstance {
    let dummy_weight = (1.0 - lambda) * a.total_weight().min(b.total_weight());
    let big_cost = big_cost_multiplier * (base.max() + 1.0);
    let (n1, n2) = (base.rows, base.cols);
    let mut cost = CostMatrix::zeros(n1 + 1, n2 + 1);
    for i in 0..n1 {
        cost.data[i * (n2 + 1)..i * (n2 + 1) + n2].copy_from_slice(base.row(i));
    }
    cost.set(n1, n2, big_cost);
    let mut supply = a.weights().to_vec();
    supply.push(dummy_weight);
    let mut demand = b.weights().to_vec();
    demand.push(dummy_weight);
    AugmentedInstance { supply, demand, cost, dummy_weight, big_cost }
}

/// Optimal plan for the plain distance: ships `min(W_A, W_B)`.
pub fn wasserstein_exact(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<TransportPlan> {
    fractional_wasserstein(a, b, 1.0, &TransportConfig::default())
}

/// Entropic approximation of the plain distance.
pub fn wasserstein_sinkhorn(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    cfg: &TransportConfig,
) -> Result<TransportPlan> {
    let cfg = TransportConfig { backend: Backend::Sinkhorn, ..cfg.clone() };
    fractional_wasserstein(a, b, 1.0, &cfg)
}

/// Optimal (exact backend) or regularized (Sinkhorn backend) plan shipping
/// `lambda * min(W_A, W_B)` between `a` and `b`.
pub fn fractional_wasserstein(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    lambda: f64,
    cfg: &TransportConfig,
) -> Result<TransportPlan> {
    check_fraction(lambda)?;
    let base = cost_matrix(a, b)?;
    fractional_with_costs(a, b, &base, lambda, cfg)
}

/// Raw solution of the dummy-augmented problem.
#[derive(Debug, Clone)]
pub struct AugmentedSolution {
    /// `(i, j, f)` with `i == n1` for the dummy source and `j == n2` for the
    /// dummy sink.
    pub flows: Vec<(usize, usize, f64)>,
    /// Flow on the dummy-to-dummy edge.
    pub dummy_flow: f64,
    /// `lambda * min(W_A, W_B)`.
    pub shipped: f64,
}

/// Solves the augmented problem without stripping or checking the dummies.
pub fn solve_augmented(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    base: &CostMatrix,
    lambda: f64,
    cfg: &TransportConfig,
) -> Result<AugmentedSolution> {
    check_fraction(lambda)?;
    cfg.validate()?;
    a.check_dim(b)?;
    let (n1, n2) = (a.len(), b.len());
    if base.rows != n1 || base.cols != n2 {
        return Err(AlignError::InvalidInput(format!(
            "cost matrix is {}x{} for sets of size {n1} and {n2}",
            base.rows, base.cols
        )));
    }
    let shipped = lambda * a.total_weight().min(b.total_weight());
    let aug = augment_costs(a, b, base, lambda, cfg.big_cost_multiplier);

    // Put a0 in the first row so the north-west-corner start never touches
    // the (a0, b0) cell: a0 carries less than W_B, so its row stops before
    // the last column.
    let rows: Vec<usize> = std::iter::once(n1).chain(0..n1).collect();
    let supply: Vec<f64> = rows.iter().map(|&r| aug.supply[r]).collect();
    let mut cost = CostMatrix::zeros(n1 + 1, n2 + 1);
    for (k, &r) in rows.iter().enumerate() {
        cost.data[k * (n2 + 1)..(k + 1) * (n2 + 1)].copy_from_slice(aug.cost.row(r));
    }
    let scale = base.max().max(f64::MIN_POSITIVE);
    let reg = match cfg.sinkhorn_regularization {
        Regularization::Absolute(r) => r,
        Regularization::RelativeToMedian(r) if cfg.backend == Backend::Sinkhorn => {
            let median = median_cost(base);
            r * if median > 0.0 { median } else { scale }
        }
        Regularization::RelativeToMedian(r) => r,
    };
    let flows: Vec<(usize, usize, f64)> = solve_capacitated(&supply, &aug.demand, &cost, scale, reg, cfg)?
        .into_iter()
        .map(|(k, j, f)| (rows[k], j, f))
        .collect();
    let dummy_flow = flows.iter().filter(|&&(i, j, _)| i == n1 && j == n2).map(|e| e.2).sum();
    Ok(AugmentedSolution { flows, dummy_flow, shipped })
}

/// Same as [`fractional_wasserstein`] with a precomputed ground-cost matrix.
pub fn fractional_with_costs(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    base: &CostMatrix,
    lambda: f64,
    cfg: &TransportConfig,
) -> Result<TransportPlan> {
    check_fraction(lambda)?;
    a.check_dim(b)?;
    if lambda * a.total_weight().min(b.total_weight()) <= 0.0 {
        return Ok(TransportPlan::empty());
    }
    let sol = solve_augmented(a, b, base, lambda, cfg)?;
    if sol.dummy_flow > 1e-9 * sol.shipped {
        return Err(AlignError::DummyFlow { flow: sol.dummy_flow });
    }
    let (n1, n2) = (a.len(), b.len());
    let mut entries: Vec<FlowEntry> = sol
        .flows
        .into_iter()
        .filter(|&(i, j, _)| i < n1 && j < n2)
        .map(|(i, j, f)| FlowEntry { source: i, target: j, flow: f })
        .collect();
    entries.sort_by_key(|e| (e.source, e.target));
    let mut plan = TransportPlan::from_entries(a, b, entries, sol.shipped);
    // keep the reported cost consistent with the matrix the solver saw
    plan.cost = plan.entries.iter().map(|e| e.flow * base.get(e.source, e.target)).sum();
    plan.normalized_distance = plan.cost / sol.shipped;
    Ok(plan)
}

pub fn median_cost(c: &CostMatrix) -> f64 {
    let mut v = c.data.clone();
    let mid = v.len() / 2;
    *v.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Transport with capacities `supply`/`demand` shipping exactly
/// `min(sum supply, sum demand)`.
///
/// Zero-capacity rows and columns are dropped, and the lighter side gets a
/// zero-cost slack node so the solvers always see a balanced problem.
fn solve_capacitated(
    supply: &[f64],
    demand: &[f64],
    cost: &CostMatrix,
    cost_scale: f64,
    sinkhorn_reg: f64,
    cfg: &TransportConfig,
) -> Result<Vec<(usize, usize, f64)>> {
    let rows: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = rows.iter().map(|&i| supply[i]).collect();
    let mut d: Vec<f64> = cols.iter().map(|&j| demand[j]).collect();
    let total_s: f64 = s.iter().sum();
    let total_d: f64 = d.iter().sum();
    let slack = (total_s - total_d).abs();
    let tiny = 1e-13 * total_s.max(total_d);
    let (slack_row, slack_col) = if slack <= tiny {
        (false, false)
    } else if total_s < total_d {
        (true, false)
    } else {
        (false, true)
    };
    if slack_row {
        s.push(slack);
    }
    if slack_col {
        d.push(slack);
    }
    let (m, n) = (s.len(), d.len());
    let mut c = CostMatrix::zeros(m, n);
    for (k, &i) in rows.iter().enumerate() {
        for (l, &j) in cols.iter().enumerate() {
            c.set(k, l, cost.get(i, j));
        }
    }

    let raw: Vec<(usize, usize, f64)> = match cfg.backend {
        Backend::Exact => network_simplex::solve(&s, &d, &c, cost_scale)?.flows,
        Backend::Sinkhorn => {
            // exact balance for the rounding step
            let ts: f64 = s.iter().sum();
            let td: f64 = d.iter().sum();
            d.iter_mut().for_each(|x| *x *= ts / td);
            let out = sinkhorn::solve(&s, &d, &c, sinkhorn_reg, cfg.sinkhorn_max_iters, cfg.sinkhorn_tolerance)?;
            out.plan
                .iter()
                .enumerate()
                .filter(|(_, &f)| f > 0.0)
                .map(|(e, &f)| (e / n, e % n, f))
                .collect()
        }
    };
    Ok(raw
        .into_iter()
        .filter(|&(k, l, _)| k < rows.len() && l < cols.len())
        .map(|(k, l, f)| (rows[k], cols[l], f))
        .collect())
}
