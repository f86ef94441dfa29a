//! Primal network simplex for dense balanced transportation problems.
//!
//! Supplies sit on `m` source nodes, demands on `n` sink nodes, and every
//! source is joined to every sink by an uncapacitated arc whose cost is read
//! from a row-major cost matrix. The spanning tree is stored with the
//! parent/thread/successor-count representation used by LEMON, and entering
//! arcs are chosen by block search.
//!
//! The starting basis is the north-west-corner solution, which is always a
//! spanning tree of the bipartite graph. An extra root node hangs off source
//! 0 through a zero-cost stub arc, so node potentials stay on the scale of
//! the real costs (no big-M artificial arcs).

use crate::error::{AlignError, Result};
use crate::pointset::CostMatrix;

const NONE: usize = usize::MAX;
const UP: i8 = 1;
const DOWN: i8 = -1;
const TREE: u8 = 0;
const LOWER: u8 = 1;

/// Optimal flow of a balanced transportation problem.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// `(source, sink, flow)` for every positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub pivots: usize,
}

/// Solves `min sum c_ij f_ij` subject to row sums `supply` and column sums
/// `demand`.
///
/// `cost_scale` is the magnitude of the costs that matter for optimality;
/// reduced costs above `-1e-12 * cost_scale` are treated as nonnegative. It
/// is separate from the matrix maximum so that a huge stand-in for a
/// forbidden arc does not coarsen the tolerance.
pub fn solve(supply: &[f64], demand: &[f64], cost: &CostMatrix, cost_scale: f64) -> Result<TransportSolution> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err(AlignError::Solver("transportation problem with no nodes".into()));
    }
    if cost.rows != m || cost.cols != n {
        return Err(AlignError::Solver(format!(
            "cost matrix is {}x{} but the problem is {}x{}",
            cost.rows, cost.cols, m, n
        )));
    }
    let mut ns = NetworkSimplex::new(supply, demand, cost, cost_scale);
    ns.run()?;
    Ok(ns.solution())
}

struct NetworkSimplex<'a> {
    m: usize,
    n: usize,
    cost: &'a CostMatrix,
    root: usize,
    stub: usize,
    eps: f64,

    flow: Vec<f64>,
    state: Vec<u8>,

    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,

    next_arc: usize,
    block_size: usize,
    pivots: usize,
}

impl<'a> NetworkSimplex<'a> {
    fn new(supply: &[f64], demand: &[f64], cost: &'a CostMatrix, cost_scale: f64) -> Self {
        let m = supply.len();
        let n = demand.len();
        let nodes = m + n;
        let arcs = m * n;
        let block_size = ((arcs as f64).sqrt().ceil() as usize).max(10);
        let mut ns = NetworkSimplex {
            m,
            n,
            cost,
            root: nodes,
            stub: arcs,
            eps: 1e-12 * cost_scale.abs().max(f64::MIN_POSITIVE),
            flow: vec![0.0; arcs + 1],
            state: vec![LOWER; arcs + 1],
            pi: vec![0.0; nodes + 1],
            parent: vec![NONE; nodes + 1],
            pred: vec![NONE; nodes + 1],
            pred_dir: vec![UP; nodes + 1],
            thread: vec![NONE; nodes + 1],
            rev_thread: vec![NONE; nodes + 1],
            succ_num: vec![1; nodes + 1],
            last_succ: vec![NONE; nodes + 1],
            dirty_revs: Vec::new(),
            in_arc: NONE,
            join: NONE,
            u_in: NONE,
            v_in: NONE,
            u_out: NONE,
            delta: 0.0,
            next_arc: 0,
            block_size,
            pivots: 0,
        };
        ns.init_tree(supply, demand);
        ns
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e == self.stub {
            0
        } else {
            e / self.n
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e == self.stub {
            self.root
        } else {
            self.m + e % self.n
        }
    }

    #[inline]
    fn arc_cost(&self, e: usize) -> f64 {
        if e == self.stub {
            0.0
        } else {
            self.cost.data[e]
        }
    }

    /// North-west-corner basis turned into the thread/parent structure.
    fn init_tree(&mut self, supply: &[f64], demand: &[f64]) {
        let (m, n) = (self.m, self.n);
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]).max(0.0);
            let e = i * n + j;
            self.flow[e] = x;
            basis.push(e);
            s[i] -= x;
            d[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || s[i] <= 0.0 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);

        let nodes = m + n;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for &e in &basis {
            self.state[e] = TREE;
            adj[self.source(e)].push(e);
            adj[self.target(e)].push(e);
        }
        self.state[self.stub] = TREE;

        let root = self.root;
        self.parent[0] = root;
        self.pred[0] = self.stub;
        self.pred_dir[0] = UP;
        self.pi[0] = 0.0;

        // preorder DFS from node 0
        let mut order = Vec::with_capacity(nodes);
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            order.push(u);
            for &e in adj[u].iter().rev() {
                if e == self.pred[u] {
                    continue;
                }
                let v = if self.source(e) == u { self.target(e) } else { self.source(e) };
                self.parent[v] = u;
                self.pred[v] = e;
                let c = self.arc_cost(e);
                if self.source(e) == v {
                    self.pred_dir[v] = UP;
                    self.pi[v] = self.pi[u] - c;
                } else {
                    self.pred_dir[v] = DOWN;
                    self.pi[v] = self.pi[u] + c;
                }
                stack.push(v);
            }
        }
        debug_assert_eq!(order.len(), nodes);

        self.thread[root] = order[0];
        self.rev_thread[order[0]] = root;
        for w in order.windows(2) {
            self.thread[w[0]] = w[1];
            self.rev_thread[w[1]] = w[0];
        }
        let last = *order.last().unwrap();
        self.thread[last] = root;
        self.rev_thread[root] = last;

        let mut pos = vec![0usize; nodes];
        for (k, &u) in order.iter().enumerate() {
            pos[u] = k;
        }
        for &u in order.iter().rev() {
            let p = self.parent[u];
            if p != root {
                self.succ_num[p] += self.succ_num[u];
            }
        }
        for &u in &order {
            self.last_succ[u] = order[pos[u] + self.succ_num[u] - 1];
        }
        self.parent[root] = NONE;
        self.succ_num[root] = nodes + 1;
        self.last_succ[root] = last;
    }

    fn find_entering_arc(&mut self) -> bool {
        let total = self.m * self.n;
        let n = self.n;
        let mut best = -self.eps;
        let mut found = NONE;
        let mut cnt = self.block_size;
        let mut e = self.next_arc;
        let mut i = e / n;
        let mut j = e % n;
        let mut pi_i = self.pi[i];
        for _ in 0..total {
            if self.state[e] == LOWER {
                let c = self.cost.data[e] + pi_i - self.pi[self.m + j];
                if c < best {
                    best = c;
                    found = e;
                }
            }
            e += 1;
            j += 1;
            if j == n {
                j = 0;
                i += 1;
                if e == total {
                    e = 0;
                    i = 0;
                }
                pi_i = self.pi[i];
            }
            cnt -= 1;
            if cnt == 0 {
                if found != NONE {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if found == NONE {
            return false;
        }
        self.in_arc = found;
        self.next_arc = e;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> Result<()> {
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        let mut delta = f64::INFINITY;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 0 {
            return Err(AlignError::Solver("unbounded pivot cycle".into()));
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        self.delta = delta;
        Ok(())
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        let out_arc = self.pred[self.u_out];
        if val > 0.0 {
            self.flow[self.in_arc] += val;
            let mut u = self.source(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
            let mut u = self.target(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
        }
        self.flow[out_arc] = 0.0;
        self.state[self.in_arc] = TREE;
        self.state[out_arc] = LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source(self.in_arc) { UP } else { DOWN };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            // when old_rev_thread == v_in, join and v_out coincide
            let thread_continue =
                if old_rev_thread == v_in { self.thread[old_last_succ] } else { self.thread[v_in] };

            // re-hang the stem nodes between u_in and u_out
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            // pred, pred_dir, last_succ, succ_num along the stem
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            let mut p = self.parent[u];
            while u != u_in {
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
                p = self.parent[u];
            }
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source(self.in_arc) { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let c = self.arc_cost(self.in_arc);
        let sigma = self.pi[self.v_in] - self.pi[self.u_in]
            - if self.pred_dir[self.u_in] == UP { c } else { -c };
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn run(&mut self) -> Result<()> {
        let max_pivots = 50 * (self.m * self.n) + 100_000;
        while self.find_entering_arc() {
            self.find_join_node();
            self.find_leaving_arc()?;
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            self.pivots += 1;
            if self.pivots > max_pivots {
                return Err(AlignError::Solver(format!("no convergence after {} pivots", self.pivots)));
            }
        }
        Ok(())
    }

    fn solution(&self) -> TransportSolution {
        let mut flows = Vec::new();
        let mut cost = 0.0;
        for e in 0..self.m * self.n {
            let f = self.flow[e];
            if f > 0.0 {
                flows.push((e / self.n, e % self.n, f));
                cost += f * self.cost.data[e];
            }
        }
        TransportSolution { flows, cost, pivots: self.pivots }
    }
}
