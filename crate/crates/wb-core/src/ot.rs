//! Exact discrete optimal transport.
//!
//! The solver is a transportation network simplex over the dense bipartite
//! problem: Vogel-approximation starting basis, block-search pricing, and a
//! Bland fallback once degenerate pivots pile up. Assignment between uniform
//! measures of equal size runs through the same solver; the optimal basic
//! plan is then a scaled permutation matrix (a vertex of the scaled Birkhoff
//! polytope), from which the matching is read off.
//!
//! Tolerances: primal feasibility 1e-9, dual feasibility (reduced costs)
//! 1e-7, both relative to the cost scale. Arithmetic is plain f64; there is
//! no exact rational mode.

use crate::error::{Error, Result};
use crate::measures::{euclidean_pow, DiscreteMeasure, Points};

/// Entering tolerance relative to the cost scale.
const PRICE_TOL: f64 = 1e-9;
/// Dual feasibility certificate, relative to the cost scale.
const CERTIFY_TOL: f64 = 1e-7;
/// Primal feasibility (marginal residual), relative to scale.
const FEAS_TOL: f64 = 1e-9;


/// Pairwise ground costs `d(x_j, y_k)^p` for the Euclidean metric.
#[derive(Clone, Debug)]
pub struct CostMatrix {
    entries: Vec<f64>,
    rows: usize,
    cols: usize,
    exponent: f64,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.entries[j * self.cols + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// Euclidean distances raised to the exponent `p`.
pub fn cost_matrix(x: &Points, y: &Points, p: f64) -> Result<CostMatrix> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    assert!(p >= 1.0, "exponent must satisfy p >= 1");
    let rows = x.len();
    let cols = y.len();
    let mut entries = Vec::with_capacity(rows * cols);
    for xr in x.rows() {
        for yr in y.rows() {
            entries.push(euclidean_pow(xr, yr, p));
        }
    }
    Ok(CostMatrix { entries, rows, cols, exponent: p })
}

/// A coupling: nonnegative matrix with prescribed row and column sums.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    matrix: Vec<f64>,
    rows: usize,
    cols: usize,
    source: Vec<f64>,
    target: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.matrix[j * self.cols + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    pub fn source_marginal(&self) -> &[f64] {
        &self.source
    }

    pub fn target_marginal(&self) -> &[f64] {
        &self.target
    }

    /// Worst marginal residual: `max(‖row sums − a‖∞, ‖col sums − b‖∞)`.
    pub fn marginal_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.rows {
            let sum: f64 = self.matrix[j * self.cols..(j + 1) * self.cols].iter().sum();
            worst = worst.max((sum - self.source[j]).abs());
        }
        for k in 0..self.cols {
            let mut sum = 0.0;
            for j in 0..self.rows {
                sum += self.matrix[j * self.cols + k];
            }
            worst = worst.max((sum - self.target[k]).abs());
        }
        worst
    }

    /// Number of entries above the feasibility tolerance; at most
    /// `rows + cols − 1` for a basic solution.
    pub fn support_size(&self) -> usize {
        self.matrix.iter().filter(|&&v| v > 1e-9).count()
    }
}

/// Solve the transportation problem between two measures under cost `d^p`.
///
/// Returns an optimal basic plan and the value `W_p^p(mu, nu)`.
pub fn solve_ot(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<(TransportPlan, f64)> {
    let cost = cost_matrix(mu.points(), nu.points(), p)?;
    solve_transport(&cost, mu.weights(), nu.weights())
}

/// Transportation problem for an explicit cost matrix and marginals.
pub fn solve_transport(
    cost: &CostMatrix,
    supply: &[f64],
    demand: &[f64],
) -> Result<(TransportPlan, f64)> {
    assert_eq!(cost.rows(), supply.len());
    assert_eq!(cost.cols(), demand.len());
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    // Probability marginals cannot be unbalanced beyond float noise.
    assert!(
        (total_supply - total_demand).abs() <= 1e-9 * total_supply.max(1.0),
        "marginal totals differ: {total_supply} vs {total_demand}"
    );

    // Strip zero-mass atoms; the simplex needs strictly positive marginals.
    let active_rows: Vec<usize> = (0..supply.len()).filter(|&j| supply[j] > 0.0).collect();
    let active_cols: Vec<usize> = (0..demand.len()).filter(|&k| demand[k] > 0.0).collect();
    if active_rows.is_empty() || active_cols.is_empty() {
        return Err(Error::DegenerateWeights);
    }
    let m = active_rows.len();
    let n = active_cols.len();
    let mut reduced_cost = Vec::with_capacity(m * n);
    for &j in &active_rows {
        for &k in &active_cols {
            reduced_cost.push(cost.at(j, k));
        }
    }
    let reduced_supply: Vec<f64> = active_rows.iter().map(|&j| supply[j]).collect();
    let reduced_demand: Vec<f64> = active_cols.iter().map(|&k| demand[k]).collect();

    let mut simplex = TransportSimplex::new(m, n, &reduced_cost, &reduced_supply, &reduced_demand);
    simplex.solve()?;

    let mut matrix = vec![0.0; supply.len() * demand.len()];
    let mut value = 0.0;
    for cell in 0..m * n {
        let flow = simplex.flow[cell];
        if flow > 0.0 {
            let j = active_rows[cell / n];
            let k = active_cols[cell % n];
            matrix[j * demand.len() + k] = flow;
            value += flow * cost.at(j, k);
        }
    }
    let plan = TransportPlan {
        matrix,
        rows: supply.len(),
        cols: demand.len(),
        source: supply.to_vec(),
        target: demand.to_vec(),
    };
    let scale = simplex.cost_scale.max(1.0);
    let residual = plan.marginal_residual();
    assert!(
        residual <= FEAS_TOL * scale,
        "marginal residual {residual} above tolerance"
    );
    Ok((plan, value))
}

/// Minimum-cost matching between two equally sized point sets under `d^p`,
/// i.e. `W_p^p` between the uniform measures on them.
///
/// Returns the permutation `sigma` (row `k` matched to `y[sigma[k]]`, ties in
/// the plan broken by lowest index) and the matching value
/// `(1/S) Σ_k d(x_k, y_{sigma(k)})^p`.
pub fn solve_assignment(x: &Points, y: &Points, p: f64) -> Result<(Vec<usize>, f64)> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(x.len(), y.len()));
    }
    let s = x.len();
    let cost = cost_matrix(x, y, p)?;
    let marginal = vec![1.0 / s as f64; s];
    let mut simplex = TransportSimplex::new(s, s, cost.as_slice(), &marginal, &marginal);
    simplex.solve()?;

    // The optimal basic plan for uniform equal marginals is 1/S times a
    // permutation matrix; read the matching off the flows.
    let half = 0.5 / s as f64;
    let mut permutation = vec![usize::MAX; s];
    for k in 0..s {
        for j in 0..s {
            if simplex.flow[k * s + j] > half {
                permutation[k] = j;
                break;
            }
        }
        assert!(permutation[k] != usize::MAX, "row {k} has no matched column");
    }
    let mut value = 0.0;
    for (k, &j) in permutation.iter().enumerate() {
        value += cost.at(k, j);
    }
    value /= s as f64;
    Ok((permutation, value))
}

/// `W_p(mu, nu)`: the transport value raised to `1/p`.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    let (_, value) = solve_ot(mu, nu, p)?;
    Ok(value.max(0.0).powf(1.0 / p))
}

/// Dense transportation network simplex over `m` sources and `n` targets.
///
/// Nodes `0..m` are sources, `m..m+n` targets; the basis is a spanning tree
/// stored as adjacency lists of basic cells, with parent/depth/potentials
/// rebuilt from the root after every pivot (O(m+n) per pivot).
struct TransportSimplex<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    supply: &'a [f64],
    demand: &'a [f64],
    cost_scale: f64,
    flow: Vec<f64>,
    in_basis: Vec<bool>,
    adjacency: Vec<Vec<usize>>, // node -> basic cell ids
    parent: Vec<usize>,         // node -> parent node (root: usize::MAX)
    parent_cell: Vec<usize>,
    depth: Vec<u32>,
    potential: Vec<f64>,
    order: Vec<usize>, // BFS scratch
}

const NO_NODE: usize = usize::MAX;

impl<'a> TransportSimplex<'a> {
    fn new(m: usize, n: usize, cost: &'a [f64], supply: &'a [f64], demand: &'a [f64]) -> Self {
        let nodes = m + n;
        let cost_scale = cost.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
        Self {
            m,
            n,
            cost,
            supply,
            demand,
            cost_scale,
            flow: vec![0.0; m * n],
            in_basis: vec![false; m * n],
            adjacency: vec![Vec::new(); nodes],
            parent: vec![NO_NODE; nodes],
            parent_cell: vec![usize::MAX; nodes],
            depth: vec![0; nodes],
            potential: vec![0.0; nodes],
            order: Vec::with_capacity(nodes),
        }
    }

    fn row_node(&self, cell: usize) -> usize {
        cell / self.n
    }

    fn col_node(&self, cell: usize) -> usize {
        self.m + cell % self.n
    }

    fn insert_basic(&mut self, cell: usize) {
        debug_assert!(!self.in_basis[cell]);
        self.in_basis[cell] = true;
        let (a, b) = (self.row_node(cell), self.col_node(cell));
        self.adjacency[a].push(cell);
        self.adjacency[b].push(cell);
    }

    fn remove_basic(&mut self, cell: usize) {
        debug_assert!(self.in_basis[cell]);
        self.in_basis[cell] = false;
        let (a, b) = (self.row_node(cell), self.col_node(cell));
        for node in [a, b] {
            let pos = self.adjacency[node].iter().position(|&c| c == cell).unwrap();
            self.adjacency[node].swap_remove(pos);
        }
    }

    /// Rebuild parents, depths and dual potentials by BFS from node 0.
    fn rebuild_tree(&mut self) {
        let nodes = self.m + self.n;
        for node in 0..nodes {
            self.parent[node] = NO_NODE;
            self.parent_cell[node] = usize::MAX;
            self.depth[node] = 0;
        }
        self.order.clear();
        self.order.push(0);
        self.potential[0] = 0.0;
        let mut visited = 1usize;
        let mut head = 0;
        while head < self.order.len() {
            let node = self.order[head];
            head += 1;
            for idx in 0..self.adjacency[node].len() {
                let cell = self.adjacency[node][idx];
                let other = if self.row_node(cell) == node {
                    self.col_node(cell)
                } else {
                    self.row_node(cell)
                };
                if other == 0 || self.parent[other] != NO_NODE {
                    continue;
                }
                self.parent[other] = node;
                self.parent_cell[other] = cell;
                self.depth[other] = self.depth[node] + 1;
                // Basic cells price to zero: u_row + v_col = c.
                self.potential[other] = self.cost[cell] - self.potential[node];
                self.order.push(other);
                visited += 1;
            }
        }
        assert_eq!(visited, nodes, "basis is not a spanning tree");
    }

    fn reduced(&self, cell: usize) -> f64 {
        self.cost[cell] - self.potential[self.row_node(cell)] - self.potential[self.col_node(cell)]
    }

    /// Incremental tree update after a pivot: the component cut off by the
    /// leaving edge is re-rooted at the entering endpoint inside it, hung
    /// from the other endpoint, and only that component's depths and
    /// potentials are recomputed.
    fn reattach(&mut self, entering: usize, leaving: usize, leaving_on_row_side: bool) {
        let (sub_root, attach) = if leaving_on_row_side {
            (self.row_node(entering), self.col_node(entering))
        } else {
            (self.col_node(entering), self.row_node(entering))
        };

        // Deeper endpoint of the removed edge, in the old orientation.
        let low_row = self.row_node(leaving);
        let low_col = self.col_node(leaving);
        let low = if self.parent_cell[low_row] == leaving { low_row } else { low_col };
        debug_assert_eq!(self.parent_cell[low], leaving);

        // Reverse parent pointers from sub_root up to the cut.
        let mut node = sub_root;
        let mut new_parent = attach;
        let mut new_cell = entering;
        loop {
            let old_parent = self.parent[node];
            let old_cell = self.parent_cell[node];
            self.parent[node] = new_parent;
            self.parent_cell[node] = new_cell;
            if node == low {
                break;
            }
            new_parent = node;
            new_cell = old_cell;
            node = old_parent;
        }

        // Refresh depth and potential on the moved component only.
        self.order.clear();
        self.order.push(sub_root);
        self.depth[sub_root] = self.depth[attach] + 1;
        self.potential[sub_root] = self.cost[entering] - self.potential[attach];
        while let Some(current) = self.order.pop() {
            for idx in 0..self.adjacency[current].len() {
                let cell = self.adjacency[current][idx];
                let other = if self.row_node(cell) == current {
                    self.col_node(cell)
                } else {
                    self.row_node(cell)
                };
                if self.parent[other] == current && self.parent_cell[other] == cell {
                    self.depth[other] = self.depth[current] + 1;
                    self.potential[other] = self.cost[cell] - self.potential[current];
                    self.order.push(other);
                }
            }
        }
    }

    /// Vogel approximation: repeatedly allocate at the cheapest cell of the
    /// line with the largest regret (gap between its two smallest costs).
    /// Produces exactly m+n−1 allocations forming a spanning tree.
    fn vogel_init(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut sup = self.supply.to_vec();
        let mut dem = self.demand.to_vec();
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; n];
        let mut rows_left = m;
        let mut cols_left = n;

        // Two cheapest active columns per row and vice versa.
        let mut row_best: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); m];
        let mut col_best: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); n];

        let scan_row = |i: usize, col_active: &[bool], cost: &[f64]| -> (usize, usize) {
            let mut best = usize::MAX;
            let mut second = usize::MAX;
            for j in 0..n {
                if !col_active[j] {
                    continue;
                }
                let c = cost[i * n + j];
                if best == usize::MAX || c < cost[i * n + best] {
                    second = best;
                    best = j;
                } else if second == usize::MAX || c < cost[i * n + second] {
                    second = j;
                }
            }
            (best, second)
        };
        let scan_col = |j: usize, row_active: &[bool], cost: &[f64]| -> (usize, usize) {
            let mut best = usize::MAX;
            let mut second = usize::MAX;
            for i in 0..m {
                if !row_active[i] {
                    continue;
                }
                let c = cost[i * n + j];
                if best == usize::MAX || c < cost[best * n + j] {
                    second = best;
                    best = i;
                } else if second == usize::MAX || c < cost[second * n + j] {
                    second = i;
                }
            }
            (best, second)
        };

        for i in 0..m {
            row_best[i] = scan_row(i, &col_active, self.cost);
        }
        for j in 0..n {
            col_best[j] = scan_col(j, &row_active, self.cost);
        }

        loop {
            if rows_left == 1 && cols_left == 1 {
                let i = (0..m).find(|&i| row_active[i]).unwrap();
                let j = (0..n).find(|&j| col_active[j]).unwrap();
                self.flow[i * n + j] = sup[i].min(dem[j]);
                self.insert_basic(i * n + j);
                break;
            }

            // Largest regret wins; rows beat columns on ties, then lowest index.
            let mut best_penalty = f64::NEG_INFINITY;
            let mut pick_row = true;
            let mut pick = usize::MAX;
            for i in 0..m {
                if !row_active[i] {
                    continue;
                }
                let (b, s) = row_best[i];
                let penalty =
                    if s == usize::MAX { 0.0 } else { self.cost[i * n + s] - self.cost[i * n + b] };
                if penalty > best_penalty {
                    best_penalty = penalty;
                    pick_row = true;
                    pick = i;
                }
            }
            for j in 0..n {
                if !col_active[j] {
                    continue;
                }
                let (b, s) = col_best[j];
                let penalty =
                    if s == usize::MAX { 0.0 } else { self.cost[s * n + j] - self.cost[b * n + j] };
                if penalty > best_penalty {
                    best_penalty = penalty;
                    pick_row = false;
                    pick = j;
                }
            }

            let (i, j) = if pick_row {
                (pick, row_best[pick].0)
            } else {
                (col_best[pick].0, pick)
            };
            let delta = sup[i].min(dem[j]);
            self.flow[i * n + j] = delta;
            self.insert_basic(i * n + j);
            sup[i] -= delta;
            dem[j] -= delta;

            // Exactly one line closes per allocation; the last row and the
            // last column are kept alive so the loop always ends at the 1×1
            // pair. On simultaneous exhaustion the row closes; the column
            // then receives a later zero allocation — the degenerate basic
            // cell that keeps the count at m+n−1. Accumulated float error
            // can leave an epsilon residual on the side that stays open; it
            // lands within the solver's feasibility tolerance.
            let eps = 1e-12;
            let close_row = rows_left > 1
                && (cols_left == 1 || sup[i] <= eps || (dem[j] > eps && sup[i] <= dem[j]));
            if close_row {
                row_active[i] = false;
                rows_left -= 1;
                for jj in 0..n {
                    if col_active[jj] && (col_best[jj].0 == i || col_best[jj].1 == i) {
                        col_best[jj] = scan_col(jj, &row_active, self.cost);
                    }
                }
            } else {
                col_active[j] = false;
                cols_left -= 1;
                for ii in 0..m {
                    if row_active[ii] && (row_best[ii].0 == j || row_best[ii].1 == j) {
                        row_best[ii] = scan_row(ii, &col_active, self.cost);
                    }
                }
            }
        }
        self.rebuild_tree();
    }

    /// Block-search pricing: scan cells in wrapping blocks of ~sqrt(mn),
    /// returning the most negative reduced cost found in the first block
    /// that contains one. Full wrap without a candidate proves optimality.
    fn price_block(&self, start: usize, tol: f64) -> Option<usize> {
        let total = self.m * self.n;
        let block = (total as f64).sqrt() as usize + 1;
        let mut best_cell = usize::MAX;
        let mut best_value = -tol;
        let mut idx = start;
        let mut i = idx / self.n;
        let mut j = idx % self.n;
        let mut u = self.potential[i];
        for scanned in 0..total {
            let r = self.cost[idx] - u - self.potential[self.m + j];
            if r < best_value && !self.in_basis[idx] {
                best_value = r;
                best_cell = idx;
            }
            idx += 1;
            j += 1;
            if j == self.n {
                j = 0;
                i += 1;
                if i == self.m {
                    i = 0;
                    idx = 0;
                }
                u = self.potential[i];
            }
            if (scanned + 1) % block == 0 && best_cell != usize::MAX {
                break;
            }
        }
        (best_cell != usize::MAX).then_some(best_cell)
    }

    /// Bland entering rule: lowest-index cell with negative reduced cost.
    fn price_bland(&self, tol: f64) -> Option<usize> {
        (0..self.m * self.n).find(|&cell| !self.in_basis[cell] && self.reduced(cell) < -tol)
    }

    fn solve(&mut self) -> Result<()> {
        self.vogel_init();

        let nodes = self.m + self.n;
        let tol = PRICE_TOL * self.cost_scale.max(1.0);
        let degenerate_eps = 1e-14 * self.supply.iter().fold(0.0f64, |a, &s| a.max(s)).max(1e-300);
        let bland_threshold = 10 * nodes;
        let pivot_cap = 20_000 + 400 * nodes;

        let mut degenerate_streak = 0usize;
        let mut next_start = 0usize;
        let mut cycle: Vec<usize> = Vec::with_capacity(nodes);
        let mut a_side: Vec<usize> = Vec::with_capacity(nodes);

        for pivot in 0..=pivot_cap {
            if pivot == pivot_cap {
                return Err(Error::IterationCap(pivot_cap));
            }
            let entering = if degenerate_streak > bland_threshold {
                self.price_bland(tol)
            } else {
                self.price_block(next_start, tol)
            };
            let Some(entering) = entering else {
                break; // full wrap found no negative reduced cost: optimal
            };
            next_start = entering + 1;
            if next_start == self.m * self.n {
                next_start = 0;
            }

            // Cycle = entering cell, then the tree path from the entering
            // column node up to the junction, then back down to the entering
            // row node. Consecutive cells share a node, so cycle signs
            // alternate +θ/−θ starting at the entering cell.
            cycle.clear();
            cycle.push(entering);
            a_side.clear();
            let mut a = self.row_node(entering);
            let mut b = self.col_node(entering);
            while self.depth[a] > self.depth[b] {
                a_side.push(self.parent_cell[a]);
                a = self.parent[a];
            }
            while self.depth[b] > self.depth[a] {
                cycle.push(self.parent_cell[b]);
                b = self.parent[b];
            }
            while a != b {
                a_side.push(self.parent_cell[a]);
                cycle.push(self.parent_cell[b]);
                a = self.parent[a];
                b = self.parent[b];
            }
            let b_len = cycle.len() - 1;
            cycle.extend(a_side.iter().rev());

            // Odd positions give up θ. Ties are broken by cycle position —
            // row-side candidates nearest the entering row first, then
            // column-side candidates nearest the junction override — which
            // keeps the basis strongly feasible and stops degenerate pivots
            // from stalling.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            let mut leaving_pos = 0usize;
            for pos in (b_len + 1..cycle.len()).rev() {
                if pos % 2 == 1 {
                    let cell = cycle[pos];
                    if self.flow[cell] < theta {
                        theta = self.flow[cell];
                        leaving = cell;
                        leaving_pos = pos;
                    }
                }
            }
            for pos in 1..=b_len {
                if pos % 2 == 1 {
                    let cell = cycle[pos];
                    if self.flow[cell] <= theta {
                        theta = self.flow[cell];
                        leaving = cell;
                        leaving_pos = pos;
                    }
                }
            }
            debug_assert!(leaving != usize::MAX);

            for (pos, &cell) in cycle.iter().enumerate() {
                if pos % 2 == 0 {
                    self.flow[cell] += theta;
                } else {
                    let f = self.flow[cell] - theta;
                    self.flow[cell] = if f < 0.0 { 0.0 } else { f };
                }
            }

            if theta <= degenerate_eps {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            self.remove_basic(leaving);
            self.insert_basic(entering);
            self.reattach(entering, leaving, leaving_pos > b_len);
        }

        // Dual feasibility certificate.
        let certify = CERTIFY_TOL * self.cost_scale.max(1.0);
        for cell in 0..self.m * self.n {
            debug_assert!(
                self.reduced(cell) >= -certify,
                "reduced cost {} at cell {cell} violates the certificate",
                self.reduced(cell)
            );
        }
        Ok(())
    }
}
