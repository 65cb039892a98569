//! Generic equality-form LP solver and the exact barycenter linear program.
//!
//! This is the ground-truth oracle for small instances: a two-phase revised
//! simplex over `min c·x  s.t.  A x = b, x ≥ 0`. The basis is factorized by
//! singleton peeling with a dense fallback block — barycenter and
//! transportation bases are forest-like and peel almost completely — and
//! updated between refactorizations with product-form eta vectors. It is an
//! oracle-scale solver, not a production LP code: variable counts are capped
//! and everything is plain f64.
//!
//! The barycenter program keeps the weight variables `a_j` explicit next to
//! the `N` transport blocks, one-to-one with the textbook formulation, at
//! `|support| · (1 + Σ M_i)` variables and `Σ_i (|support| + M_i)` equality
//! constraints.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::measures::{centroid_set, euclidean_pow, DiscreteMeasure, Points};

/// Default cap on LP variables accepted by the oracle.
pub const LP_VARIABLE_CAP: usize = 200_000;

/// Barycenter weights below this are pruned before reporting support.
pub const WEIGHT_PRUNE_TOLERANCE: f64 = 1e-9;

/// Refactorize the basis after this many eta updates.
const REFACTOR_EVERY: usize = 50;

/// Equality-form linear program with nonnegative variables.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// Program with an all-zero constraint matrix; fill with
    /// [`LinearProgram::push_entry`].
    pub fn new(objective: Vec<f64>, rhs: Vec<f64>) -> Self {
        let columns = vec![Vec::new(); objective.len()];
        Self { objective, columns, rhs }
    }

    /// Dense constructor for small programs: one slice per constraint row.
    pub fn from_dense(objective: Vec<f64>, rows: &[Vec<f64>], rhs: Vec<f64>) -> Self {
        assert_eq!(rows.len(), rhs.len());
        let mut lp = Self::new(objective, rhs);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), lp.objective.len());
            for (j, &coef) in row.iter().enumerate() {
                if coef != 0.0 {
                    lp.push_entry(j, r, coef);
                }
            }
        }
        lp
    }

    /// Append the coefficient of variable `var` in constraint `row`.
    pub fn push_entry(&mut self, var: usize, row: usize, coefficient: f64) {
        debug_assert!(row < self.rhs.len());
        if coefficient != 0.0 {
            self.columns[var].push((row, coefficient));
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
}

/// A vertex solution of a [`LinearProgram`].
#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Primal point (structural variables only).
    pub x: Vec<f64>,
    /// Objective value `c · x`.
    pub value: f64,
    /// Basic variable per constraint row; indices at or above `num_vars`
    /// denote phase-1 artificials parked at zero (redundant rows).
    pub basis: Vec<usize>,
}

/// Solve with the default variable cap.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with_cap(lp, LP_VARIABLE_CAP)
}

/// Solve `min c·x  s.t.  A x = b, x ≥ 0` by two-phase revised simplex.
///
/// Returns a vertex optimum with primal feasibility within 1e-9 and reduced
/// costs above −1e-7, both relative to problem scale.
pub fn solve_lp_with_cap(lp: &LinearProgram, cap: usize) -> Result<LpSolution> {
    if lp.num_vars() > cap {
        return Err(Error::LpTooLarge { estimated: lp.num_vars().to_string(), cap });
    }
    if lp.num_rows() == 0 {
        if lp.objective.iter().any(|&c| c < 0.0) {
            return Err(Error::Unbounded);
        }
        return Ok(LpSolution { x: vec![0.0; lp.num_vars()], value: 0.0, basis: Vec::new() });
    }
    Simplex::new(lp).run()
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    One,
    Two,
}

struct Eta {
    pivot_pos: usize,
    pivot_value: f64,
    /// Sparse `w = B⁻¹ a_enter` without the pivot component.
    rest: Vec<(usize, f64)>,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// Structural columns with row signs flipped so that rhs ≥ 0.
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    x_basic: Vec<f64>,
    factors: Factorization,
    etas: Vec<Eta>,
    cost_scale: f64,
    rhs_scale: f64,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut rhs = lp.rhs.clone();
        let mut flip = vec![false; m];
        for (r, value) in rhs.iter_mut().enumerate() {
            if *value < 0.0 {
                *value = -*value;
                flip[r] = true;
            }
        }
        let columns: Vec<Vec<(usize, f64)>> = lp
            .columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, if flip[r] { -v } else { v })).collect())
            .collect();
        let cost_scale = lp.objective.iter().fold(0.0f64, |a, &c| a.max(c.abs())).max(1.0);
        let rhs_scale = rhs.iter().fold(0.0f64, |a, &b| a.max(b)).max(1.0);
        let basis: Vec<usize> = (n..n + m).collect();
        let mut in_basis = vec![false; n + m];
        for &b in &basis {
            in_basis[b] = true;
        }
        let x_basic = rhs.clone();
        Self {
            lp,
            m,
            n,
            columns,
            rhs,
            basis,
            in_basis,
            x_basic,
            factors: Factorization::identity(m),
            etas: Vec::new(),
            cost_scale,
            rhs_scale,
        }
    }

    fn cost(&self, var: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if var >= self.n {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if var >= self.n {
                    0.0
                } else {
                    self.lp.objective[var]
                }
            }
        }
    }

    fn refactorize(&mut self) -> Result<()> {
        let cols: Vec<SparseCol> = self
            .basis
            .iter()
            .map(|&var| {
                if var < self.n {
                    self.columns[var].clone()
                } else {
                    vec![(var - self.n, 1.0)]
                }
            })
            .collect();
        self.factors = Factorization::compute(self.m, &cols)?;
        self.etas.clear();
        let mut x = self.rhs.clone();
        self.ftran(&mut x);
        self.x_basic = x;
        Ok(())
    }

    /// `v ← B⁻¹ v`; input over row ids, output over basis positions.
    fn ftran(&self, v: &mut [f64]) {
        self.factors.solve(v);
        for eta in &self.etas {
            let t = v[eta.pivot_pos] / eta.pivot_value;
            v[eta.pivot_pos] = t;
            if t != 0.0 {
                for &(i, w) in &eta.rest {
                    v[i] -= w * t;
                }
            }
        }
    }

    /// `v ← B⁻ᵀ v`; input over basis positions, output over row ids.
    fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut dot = 0.0;
            for &(i, w) in &eta.rest {
                dot += w * v[i];
            }
            v[eta.pivot_pos] = (v[eta.pivot_pos] - dot) / eta.pivot_value;
        }
        self.factors.solve_transpose(v);
    }

    fn run(mut self) -> Result<LpSolution> {
        self.iterate(Phase::One)?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.x_basic)
            .filter(|(&var, _)| var >= self.n)
            .map(|(_, &x)| x.max(0.0))
            .sum();
        if infeasibility > 1e-7 * self.rhs_scale {
            return Err(Error::Infeasible(infeasibility));
        }
        // Park leftover artificials (redundant rows) exactly at zero.
        for (pos, &var) in self.basis.iter().enumerate() {
            if var >= self.n {
                self.x_basic[pos] = 0.0;
            }
        }
        self.iterate(Phase::Two)?;

        let mut x = vec![0.0; self.n];
        for (pos, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                x[var] = self.x_basic[pos].max(0.0);
            }
        }
        let value: f64 = x.iter().zip(&self.lp.objective).map(|(xi, ci)| xi * ci).sum();

        // Primal feasibility certificate on the (sign-adjusted) system.
        let mut residual: Vec<f64> = self.rhs.iter().map(|&b| -b).collect();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for &(r, v) in &self.columns[j] {
                    residual[r] += v * xj;
                }
            }
        }
        let worst = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        assert!(worst <= 1e-6 * self.rhs_scale, "primal residual {worst} out of tolerance");
        Ok(LpSolution { x, value, basis: self.basis })
    }

    fn iterate(&mut self, phase: Phase) -> Result<()> {
        let m = self.m;
        let price_tol = match phase {
            Phase::One => 1e-9 * self.rhs_scale,
            Phase::Two => 1e-9 * self.cost_scale,
        };
        let ratio_tol = 1e-11;
        let degen_tol = 1e-12 * self.rhs_scale;
        let bland_after = 10 * m;
        let pivot_cap = 50_000 + 200 * m;

        let mut c_basic = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut direction = vec![0.0; m];
        let mut degenerate_streak = 0usize;

        for pivot in 0..=pivot_cap {
            if pivot == pivot_cap {
                return Err(Error::IterationCap(pivot_cap));
            }
            for (pos, &var) in self.basis.iter().enumerate() {
                c_basic[pos] = self.cost(var, phase);
            }
            y.copy_from_slice(&c_basic);
            self.btran(&mut y);

            // Price structural columns; artificials never re-enter.
            let bland = degenerate_streak > bland_after;
            let mut entering = usize::MAX;
            let mut best = -price_tol;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let mut dot = 0.0;
                for &(r, v) in &self.columns[j] {
                    dot += v * y[r];
                }
                let reduced = self.cost(j, phase) - dot;
                if bland {
                    if reduced < -price_tol {
                        entering = j;
                        break;
                    }
                } else if reduced < best {
                    best = reduced;
                    entering = j;
                }
            }
            if entering == usize::MAX {
                return Ok(()); // dual feasible within tolerance: optimal
            }

            direction.iter_mut().for_each(|d| *d = 0.0);
            for &(r, v) in &self.columns[entering] {
                direction[r] = v;
            }
            self.ftran(&mut direction);

            // Ratio test. A basic artificial must never grow: a row whose
            // artificial would increase blocks immediately at θ = 0.
            let mut leaving_pos = usize::MAX;
            let mut theta = f64::INFINITY;
            for pos in 0..m {
                let var = self.basis[pos];
                let d = direction[pos];
                if phase == Phase::Two && var >= self.n && d < -ratio_tol {
                    leaving_pos = pos;
                    theta = 0.0;
                    break;
                }
                if d > ratio_tol {
                    let ratio = self.x_basic[pos].max(0.0) / d;
                    let better = if leaving_pos == usize::MAX {
                        true
                    } else if bland {
                        ratio < theta - 1e-15
                            || (ratio <= theta + 1e-15 && var < self.basis[leaving_pos])
                    } else {
                        ratio < theta - 1e-15
                            || (ratio <= theta + 1e-15 && d > direction[leaving_pos])
                    };
                    if better {
                        theta = ratio;
                        leaving_pos = pos;
                    }
                }
            }
            if leaving_pos == usize::MAX {
                // Phase one is bounded below by zero, so an unblocked ray
                // can only mean a numerical breakdown; report it the same way.
                return Err(Error::Unbounded);
            }
            let theta = theta.max(0.0);

            for pos in 0..m {
                if direction[pos] != 0.0 {
                    self.x_basic[pos] -= theta * direction[pos];
                    if self.x_basic[pos] < 0.0 {
                        self.x_basic[pos] = 0.0;
                    }
                }
            }
            self.x_basic[leaving_pos] = theta;

            let leaving_var = self.basis[leaving_pos];
            self.in_basis[leaving_var] = false;
            self.in_basis[entering] = true;
            self.basis[leaving_pos] = entering;

            if theta <= degen_tol {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            let pivot_value = direction[leaving_pos];
            if self.etas.len() >= REFACTOR_EVERY || pivot_value.abs() < 1e-11 {
                self.refactorize()?;
            } else {
                let rest: Vec<(usize, f64)> = direction
                    .iter()
                    .enumerate()
                    .filter(|&(i, &w)| i != leaving_pos && w.abs() > 1e-13)
                    .map(|(i, &w)| (i, w))
                    .collect();
                self.etas.push(Eta { pivot_pos: leaving_pos, pivot_value, rest });
            }
        }
        unreachable!("loop returns or errors at the pivot cap");
    }
}

type SparseCol = Vec<(usize, f64)>;

/// Basis factorization by singleton peeling plus a dense bump block.
///
/// Peeling never creates fill: eliminating through a singleton row deletes
/// entries without introducing any, so all surviving values are originals.
/// Forest-like LP bases (transportation, barycenter) peel almost or fully
/// to completion; whatever remains is factored densely with partial
/// pivoting.
struct Factorization {
    /// Pivots in elimination order: (row, column position, pivot value).
    pivots: Vec<(usize, usize, f64)>,
    /// Per pivot: elimination multipliers (row, μ).
    multipliers: Vec<Vec<(usize, f64)>>,
    /// Per pivot: the U row minus its diagonal (column position, value).
    u_rows: Vec<Vec<(usize, f64)>>,
    bump_rows: Vec<usize>,
    bump_cols: Vec<usize>,
    bump: DenseLu,
    m: usize,
}

impl Factorization {
    fn identity(m: usize) -> Self {
        Self {
            pivots: (0..m).map(|i| (i, i, 1.0)).collect(),
            multipliers: vec![Vec::new(); m],
            u_rows: vec![Vec::new(); m],
            bump_rows: Vec::new(),
            bump_cols: Vec::new(),
            bump: DenseLu::empty(),
            m,
        }
    }

    fn compute(m: usize, cols: &[SparseCol]) -> Result<Self> {
        assert_eq!(cols.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    rows[r].push((c, v));
                }
            }
        }
        let mut row_count: Vec<usize> = rows.iter().map(|r| r.len()).collect();
        let mut col_count: Vec<usize> = cols.iter().map(|c| c.len()).collect();
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut singleton_rows: Vec<usize> = (0..m).filter(|&r| row_count[r] == 1).collect();
        let mut singleton_cols: Vec<usize> = (0..m).filter(|&c| col_count[c] == 1).collect();

        let mut pivots = Vec::with_capacity(m);
        let mut multipliers = Vec::with_capacity(m);
        let mut u_rows = Vec::with_capacity(m);

        loop {
            let (r, c) = if let Some(c) = singleton_cols.pop() {
                if !col_active[c] || col_count[c] != 1 {
                    continue;
                }
                let r = cols[c]
                    .iter()
                    .find(|&&(rr, _)| row_active[rr])
                    .map(|&(rr, _)| rr)
                    .ok_or(Error::SingularBasis)?;
                (r, c)
            } else if let Some(r) = singleton_rows.pop() {
                if !row_active[r] || row_count[r] != 1 {
                    continue;
                }
                let c = rows[r]
                    .iter()
                    .find(|&&(cc, _)| col_active[cc])
                    .map(|&(cc, _)| cc)
                    .ok_or(Error::SingularBasis)?;
                (r, c)
            } else {
                break;
            };

            let pivot_value = cols[c]
                .iter()
                .find(|&&(rr, _)| rr == r)
                .map(|&(_, v)| v)
                .expect("pivot entry exists");
            if pivot_value == 0.0 {
                return Err(Error::SingularBasis);
            }
            let mut mults = Vec::new();
            for &(rr, v) in &cols[c] {
                if rr != r && row_active[rr] {
                    mults.push((rr, v / pivot_value));
                    row_count[rr] -= 1;
                    if row_count[rr] == 1 {
                        singleton_rows.push(rr);
                    }
                }
            }
            let mut u_row = Vec::new();
            for &(cc, v) in &rows[r] {
                if cc != c && col_active[cc] {
                    u_row.push((cc, v));
                    col_count[cc] -= 1;
                    if col_count[cc] == 1 {
                        singleton_cols.push(cc);
                    }
                }
            }
            row_active[r] = false;
            col_active[c] = false;
            pivots.push((r, c, pivot_value));
            multipliers.push(mults);
            u_rows.push(u_row);
        }

        let bump_rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
        let bump_cols: Vec<usize> = (0..m).filter(|&c| col_active[c]).collect();
        debug_assert_eq!(bump_rows.len(), bump_cols.len());
        let b = bump_rows.len();
        let mut dense = vec![0.0; b * b];
        let row_pos: std::collections::HashMap<usize, usize> =
            bump_rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        for (jj, &c) in bump_cols.iter().enumerate() {
            for &(r, v) in &cols[c] {
                if let Some(&ii) = row_pos.get(&r) {
                    dense[ii * b + jj] = v;
                }
            }
        }
        let bump = DenseLu::factor(b, dense)?;

        Ok(Self { pivots, multipliers, u_rows, bump_rows, bump_cols, bump, m })
    }

    /// `B x = v` in place: input over row ids, output over column positions.
    fn solve(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.m);
        let k_peel = self.pivots.len();
        let mut t = vec![0.0; k_peel];
        for (k, &(r, _, _)) in self.pivots.iter().enumerate() {
            let tk = v[r];
            t[k] = tk;
            if tk != 0.0 {
                for &(rr, mu) in &self.multipliers[k] {
                    v[rr] -= mu * tk;
                }
            }
        }
        let mut local: Vec<f64> = self.bump_rows.iter().map(|&r| v[r]).collect();
        self.bump.solve(&mut local);
        let mut x = vec![0.0; self.m];
        for (jj, &c) in self.bump_cols.iter().enumerate() {
            x[c] = local[jj];
        }
        for k in (0..k_peel).rev() {
            let (_, c, pivot) = self.pivots[k];
            let mut s = t[k];
            for &(cc, val) in &self.u_rows[k] {
                s -= val * x[cc];
            }
            x[c] = s / pivot;
        }
        v.copy_from_slice(&x);
    }

    /// `Bᵀ y = v` in place: input over column positions, output over row ids.
    fn solve_transpose(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.m);
        let k_peel = self.pivots.len();
        let mut z = vec![0.0; k_peel];
        for (k, &(_, c, pivot)) in self.pivots.iter().enumerate() {
            let zk = v[c] / pivot;
            z[k] = zk;
            if zk != 0.0 {
                for &(cc, val) in &self.u_rows[k] {
                    v[cc] -= val * zk;
                }
            }
        }
        let mut local: Vec<f64> = self.bump_cols.iter().map(|&c| v[c]).collect();
        self.bump.solve_transpose(&mut local);
        let mut y = vec![0.0; self.m];
        for (ii, &r) in self.bump_rows.iter().enumerate() {
            y[r] = local[ii];
        }
        for k in (0..k_peel).rev() {
            let (r, _, _) = self.pivots[k];
            let mut s = z[k];
            for &(rr, mu) in &self.multipliers[k] {
                s -= mu * y[rr];
            }
            y[r] = s;
        }
        v.copy_from_slice(&y);
    }
}

/// Dense LU with partial pivoting for the bump block.
struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    swaps: Vec<usize>,
}

impl DenseLu {
    fn empty() -> Self {
        Self { n: 0, lu: Vec::new(), swaps: Vec::new() }
    }

    fn factor(n: usize, mut a: Vec<f64>) -> Result<Self> {
        let mut swaps = vec![0usize; n];
        for k in 0..n {
            let mut pivot_row = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let mag = a[i * n + k].abs();
                if mag > best {
                    best = mag;
                    pivot_row = i;
                }
            }
            if best < 1e-12 {
                return Err(Error::SingularBasis);
            }
            swaps[k] = pivot_row;
            if pivot_row != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot_row * n + j);
                }
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let mu = a[i * n + k] / pivot;
                a[i * n + k] = mu;
                if mu != 0.0 {
                    for j in (k + 1)..n {
                        a[i * n + j] -= mu * a[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, swaps })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.swaps[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != 0.0 {
                for i in (k + 1)..n {
                    b[i] -= self.lu[i * n + k] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in (k + 1)..n {
                s -= self.lu[k * n + j] * b[j];
            }
            b[k] = s / self.lu[k * n + k];
        }
    }

    fn solve_transpose(&self, c: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(c.len(), n);
        for k in 0..n {
            let mut s = c[k];
            for j in 0..k {
                s -= self.lu[j * n + k] * c[j];
            }
            c[k] = s / self.lu[k * n + k];
        }
        for k in (0..n).rev() {
            let mut s = c[k];
            for i in (k + 1)..n {
                s -= self.lu[i * n + k] * c[i];
            }
            c[k] = s;
        }
        for k in (0..n).rev() {
            c.swap(k, self.swaps[k]);
        }
    }
}

/// The exact barycenter LP over a fixed candidate support.
///
/// Variables are the support weights `a_j` followed by the `N` transport
/// blocks `π⁽ⁱ⁾_{jk}`; constraints make every plan couple the candidate
/// weights `a` with its measure's weights `b⁽ⁱ⁾`.
pub struct BarycenterLp {
    lp: LinearProgram,
    support: Points,
    measure_sizes: Vec<usize>,
    pi_offsets: Vec<usize>,
}

impl BarycenterLp {
    /// Assemble for the given measures and exponent. `support` defaults to
    /// the p-centroid set. Errors when the variable count would exceed `cap`.
    pub fn assemble(
        measures: &[DiscreteMeasure],
        p: f64,
        support: Option<Points>,
        cap: usize,
    ) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::EmptyInput("barycenter of zero measures"));
        }
        let support = match support {
            Some(s) => s,
            None => centroid_set(measures, p)?,
        };
        let k_support = support.len();
        let sum_m: usize = measures.iter().map(|mu| mu.len()).sum();
        let estimated = k_support
            .checked_mul(sum_m)
            .and_then(|v| v.checked_add(k_support))
            .ok_or(Error::LpTooLarge { estimated: "(overflow)".into(), cap })?;
        if estimated > cap {
            let n_rows: usize = measures.iter().map(|mu| k_support + mu.len()).sum();
            return Err(Error::LpTooLarge {
                estimated: format!("{estimated} ({n_rows} constraints)"),
                cap,
            });
        }

        let n_measures = measures.len();
        let num_rows: usize = measures.iter().map(|mu| k_support + mu.len()).sum();
        let mut objective = vec![0.0; estimated];
        let mut pi_offsets = Vec::with_capacity(n_measures);
        let mut offset = k_support;
        for mu in measures {
            pi_offsets.push(offset);
            offset += k_support * mu.len();
        }
        let inv_n = 1.0 / n_measures as f64;
        for (i, mu) in measures.iter().enumerate() {
            for j in 0..k_support {
                for k in 0..mu.len() {
                    objective[pi_offsets[i] + j * mu.len() + k] =
                        inv_n * euclidean_pow(support.row(j), mu.point(k), p);
                }
            }
        }

        let mut rhs = vec![0.0; num_rows];
        let mut lp = LinearProgram::new(objective, vec![0.0; num_rows]);
        let mut row_offset = 0;
        for (i, mu) in measures.iter().enumerate() {
            let m_i = mu.len();
            // Σ_k π_{jk} − a_j = 0 for every support point j.
            for j in 0..k_support {
                let row = row_offset + j;
                lp.push_entry(j, row, -1.0);
                for k in 0..m_i {
                    lp.push_entry(pi_offsets[i] + j * m_i + k, row, 1.0);
                }
            }
            // Σ_j π_{jk} = b_k for every atom k of measure i.
            for k in 0..m_i {
                let row = row_offset + k_support + k;
                for j in 0..k_support {
                    lp.push_entry(pi_offsets[i] + j * m_i + k, row, 1.0);
                }
                rhs[row] = mu.weights()[k];
            }
            row_offset += k_support + m_i;
        }
        lp.rhs = rhs;

        Ok(Self {
            lp,
            support,
            measure_sizes: measures.iter().map(|mu| mu.len()).collect(),
            pi_offsets,
        })
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn support(&self) -> &Points {
        &self.support
    }

    /// Variable index of the weight `a_j`.
    pub fn a_index(&self, j: usize) -> usize {
        j
    }

    /// Variable index of `π⁽ⁱ⁾_{jk}`.
    pub fn pi_index(&self, i: usize, j: usize, k: usize) -> usize {
        self.pi_offsets[i] + j * self.measure_sizes[i] + k
    }

    /// Read the barycenter off an optimal point: weights below the pruning
    /// tolerance are dropped, the rest renormalized.
    pub fn recover_measure(&self, x: &[f64]) -> Result<DiscreteMeasure> {
        let total: f64 = x[..self.support.len()].iter().sum();
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "recovered weights sum to {total}, not a feasible point"
        );
        let mut points = Points::zeros(0, self.support.dim());
        let mut weights = Vec::new();
        for j in 0..self.support.len() {
            if x[j] > WEIGHT_PRUNE_TOLERANCE {
                points.push_row(self.support.row(j));
                weights.push(x[j]);
            }
        }
        if weights.is_empty() {
            return Err(Error::DegenerateWeights);
        }
        DiscreteMeasure::new(points, weights)
    }
}

/// Minimize the Fréchet functional over measures on a finite support by
/// solving the barycenter LP exactly.
///
/// Returns the pruned minimizer and the optimal value `F^p`. The support
/// defaults to the p-centroid set of the inputs.
pub fn exact_barycenter(
    measures: &[DiscreteMeasure],
    p: f64,
    support: Option<&Points>,
) -> Result<(DiscreteMeasure, f64)> {
    exact_barycenter_with_cap(measures, p, support, LP_VARIABLE_CAP)
}

pub fn exact_barycenter_with_cap(
    measures: &[DiscreteMeasure],
    p: f64,
    support: Option<&Points>,
    cap: usize,
) -> Result<(DiscreteMeasure, f64)> {
    let assembled = BarycenterLp::assemble(measures, p, support.cloned(), cap)?;
    let solution = solve_lp_with_cap(assembled.lp(), cap)?;
    let measure = assembled.recover_measure(&solution.x)?;
    Ok((measure, solution.value))
}

/// Exact variable and constraint counts of the full barycenter LP.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSize {
    pub centroids: BigUint,
    pub variables: BigUint,
    pub constraints: BigUint,
}

/// Problem-size arithmetic for the barycenter LP, in exact big integers.
///
/// With `grid_side = Some(s)` every measure sits on an s×s grid and the
/// candidate support is the N-times finer grid with `(N(s−1)+1)²` points
/// (the p = 2 structure). Otherwise supports are in general position and
/// the candidate support has `Π M_i` points. A single entry in
/// `support_sizes` is broadcast to all `n` measures. The exponent does not
/// enter the counts; it is accepted for interface completeness.
pub fn lp_size_estimate(n: u64, support_sizes: &[u64], grid_side: Option<u64>, _p: f64) -> LpSize {
    assert!(n >= 1);
    let sizes: Vec<u64> = match grid_side {
        Some(s) => {
            assert!(s >= 2, "grid side must be at least 2");
            vec![s * s; n as usize]
        }
        None => {
            if support_sizes.len() == 1 {
                vec![support_sizes[0]; n as usize]
            } else {
                assert_eq!(support_sizes.len(), n as usize, "need one size per measure");
                support_sizes.to_vec()
            }
        }
    };
    let centroids: BigUint = match grid_side {
        Some(s) => {
            let side = BigUint::from(n * (s - 1) + 1);
            &side * &side
        }
        None => sizes.iter().fold(BigUint::from(1u32), |acc, &m| acc * BigUint::from(m)),
    };
    let sum_m: BigUint =
        sizes.iter().fold(BigUint::from(0u32), |acc, &m| acc + BigUint::from(m));
    let variables = &centroids * &sum_m + &centroids;
    let constraints = BigUint::from(n) * &centroids + &sum_m;
    LpSize { centroids, variables, constraints }
}
