//! Stochastic uniform approximation: free-support barycenter descent.
//!
//! Works on uniform measures with a common support count `S` (duplicates
//! allowed, as resampling produces). A candidate is just an `S × D` position
//! matrix; each iteration solves one optimal assignment per input measure
//! and moves every candidate point toward the mean of its matched targets:
//!
//! ```text
//! X ← X − (α/N) Σ_i V_i,   V_i = 2 (X − P_i),
//! ```
//!
//! with `P_i` the barycentric projection (assignment targets) of `X` onto
//! measure `i`. Applying a plan `T_i` with row sums `1/S` directly would mix
//! scales; the row-normalized form `P_i = S·T_i Y⁽ⁱ⁾` used here is the
//! standard barycentric projection, under which the constant step `α = 1/2`
//! is the exact minimizer of the squared-cost surrogate given the plans (a
//! Lloyd-type fixed point). The problem is non-convex in the positions, so
//! a stochastic warmstart (single-measure jumps) precedes the full descent
//! to escape poor basins.
//!
//! Squared Euclidean cost only; other exponents are served by the LP oracle.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{diameter, squared_euclidean, DiscreteMeasure, Points};
use crate::ot::solve_assignment;
use crate::rng::{derive_seed, rng_from_seed};

/// Uniformity slack accepted on input weights.
const UNIFORM_TOL: f64 = 1e-9;

/// Surrogate increases beyond this trigger step halving.
const MONOTONE_TOL: f64 = 1e-9;

/// Step-size schedule for the descent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    /// Fixed step. `Constant(0.5)` is the Lloyd-type exact minimizer.
    Constant(f64),
    /// `a / (b + n)` at iteration `n`.
    Harmonic { a: f64, b: f64 },
}

impl StepSchedule {
    pub fn at(&self, iteration: usize) -> f64 {
        match *self {
            StepSchedule::Constant(alpha) => alpha,
            StepSchedule::Harmonic { a, b } => a / (b + iteration as f64),
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Constant(0.5)
    }
}

/// Configuration for the descent and the resampling pipeline around it.
#[derive(Clone, Debug)]
pub struct SuaConfig {
    /// Resample size per measure (used by the pipeline; the descent itself
    /// takes whatever supports it is given).
    pub sample_size: usize,
    /// Number of resampling repeats (pipeline-level).
    pub repeats: usize,
    pub schedule: StepSchedule,
    /// Stochastic single-measure steps before the full descent.
    pub warmstart_steps: usize,
    pub max_iters: usize,
    /// Convergence: stop when the largest row displacement drops below
    /// `tolerance · diam` of the joint input support.
    pub tolerance: f64,
    pub seed: u64,
}

impl SuaConfig {
    /// Defaults for `n` input measures: constant step 1/2, warmstart of two
    /// stochastic epochs, displacement tolerance 1e-7, 500 iterations.
    pub fn for_measures(n: usize, sample_size: usize, seed: u64) -> Self {
        Self {
            sample_size,
            repeats: 1,
            schedule: StepSchedule::default(),
            warmstart_steps: 2 * n,
            max_iters: 500,
            tolerance: 1e-7,
            seed,
        }
    }
}

/// Position matrix plus iteration bookkeeping.
#[derive(Clone, Debug)]
pub struct SuaState {
    positions: Points,
    iteration: usize,
    /// `(1/N) Σ_i` assignment cost between the positions and measure `i`,
    /// evaluated with fresh optimal assignments at these positions.
    surrogate: f64,
    /// Largest single-row movement of the step that produced this state.
    displacement: f64,
    assignments: Vec<Vec<usize>>,
}

impl SuaState {
    /// Evaluate a fresh state at the given positions: one assignment solve
    /// per measure.
    pub fn evaluate(positions: Points, supports: &[Points]) -> Result<Self> {
        let (assignments, surrogate) = solve_all(&positions, supports)?;
        Ok(Self { positions, iteration: 0, surrogate, displacement: f64::INFINITY, assignments })
    }

    pub fn positions(&self) -> &Points {
        &self.positions
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn surrogate(&self) -> f64 {
        self.surrogate
    }

    pub fn displacement(&self) -> f64 {
        self.displacement
    }

    /// Optimal assignment of each candidate row per measure, as of the last
    /// evaluation.
    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }
}

fn solve_all(positions: &Points, supports: &[Points]) -> Result<(Vec<Vec<usize>>, f64)> {
    let mut assignments = Vec::with_capacity(supports.len());
    let mut total = 0.0;
    for support in supports {
        let (perm, value) = solve_assignment(positions, support, 2.0)?;
        total += value;
        assignments.push(perm);
    }
    Ok((assignments, total / supports.len() as f64))
}

/// Row `k` of the output is the optimal-assignment target of `x_k` in `y`:
/// the barycentric projection of the uniform measure on `x` onto the one
/// on `y` (the row-normalized plan applied to `y`).
pub fn barycentric_projection(x: &Points, y: &Points) -> Result<Points> {
    let (perm, _) = solve_assignment(x, y, 2.0)?;
    let mut out = Points::zeros(x.len(), x.dim());
    for (k, &j) in perm.iter().enumerate() {
        out.row_mut(k).copy_from_slice(y.row(j));
    }
    Ok(out)
}

/// One descent step: move positions by `−(α/N) Σ V_i` using the state's
/// plans, then re-evaluate assignments at the new positions.
pub fn sua_step(state: &SuaState, supports: &[Points], alpha: f64) -> Result<SuaState> {
    assert!(alpha > 0.0, "step size must be positive");
    let blended = blend(&state.positions, &state.assignments, supports, alpha);
    let displacement = max_row_distance(&state.positions, &blended);
    let (assignments, surrogate) = solve_all(&blended, supports)?;
    Ok(SuaState {
        positions: blended,
        iteration: state.iteration + 1,
        surrogate,
        displacement,
        assignments,
    })
}

/// `X − (α/N) Σ_i 2 (X − P_i)  =  (1 − 2α) X + (2α/N) Σ_i P_i`.
fn blend(x: &Points, assignments: &[Vec<usize>], supports: &[Points], alpha: f64) -> Points {
    let s = x.len();
    let dim = x.dim();
    let n = supports.len() as f64;
    let keep = 1.0 - 2.0 * alpha;
    let pull = 2.0 * alpha / n;
    let mut out = Points::zeros(s, dim);
    for k in 0..s {
        let row = out.row_mut(k);
        for (d, &xv) in row.iter_mut().zip(x.row(k)) {
            *d = keep * xv;
        }
    }
    for (support, perm) in supports.iter().zip(assignments) {
        for k in 0..s {
            let target = support.row(perm[k]);
            let row = out.row_mut(k);
            for (d, &tv) in row.iter_mut().zip(target) {
                *d += pull * tv;
            }
        }
    }
    out
}

fn max_row_distance(a: &Points, b: &Points) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..a.len() {
        worst = worst.max(squared_euclidean(a.row(k), b.row(k)));
    }
    worst.sqrt()
}

/// Stochastic warmstart: starting from the support of one uniformly chosen
/// measure, take `steps` single-measure subgradient steps at α = 1/2.
///
/// Each step samples one index `i` and applies the update with the same
/// `(α/N)` scaling as the full iteration, `X ← X − (α/N)·2(X − P_i)`, i.e.
/// a partial pull `(1 − 1/N)·X + (1/N)·P_i` toward the sampled measure.
/// Dropping the `1/N` would overwrite `X` with `P_i` wholesale and forget
/// the stochastic path, which defeats the point of the warmstart.
pub fn warmstart(supports: &[Points], steps: usize, seed: u64) -> Result<Points> {
    let mut rng = rng_from_seed(seed);
    let start = rng.random_range(0..supports.len());
    let mut x = supports[start].clone();
    let n = supports.len() as f64;
    for _ in 0..steps {
        let i = rng.random_range(0..supports.len());
        let target = barycentric_projection(&x, &supports[i])?;
        for k in 0..x.len() {
            let row = x.row_mut(k);
            for (value, &pull) in row.iter_mut().zip(target.row(k)) {
                *value += (pull - *value) / n;
            }
        }
    }
    Ok(x)
}

/// Outcome of [`sua_solve`].
#[derive(Clone, Debug)]
pub struct SuaSolution {
    /// Uniform measure on the final positions.
    pub barycenter: DiscreteMeasure,
    /// Surrogate value at the final positions; for uniform equal-size
    /// inputs this equals the Fréchet value exactly (the assignment is the
    /// optimal transport).
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Run the full descent on uniform measures with equal support counts.
///
/// Warmstart, then iterate [`sua_step`] until the largest row displacement
/// drops below `tolerance · diam` or `max_iters` is hit. A surrogate
/// increase (possible only through float noise at α = 1/2, or with other
/// schedules) triggers step halving, at most 20 times, then the descent
/// stops at the best state seen.
pub fn sua_solve(measures: &[DiscreteMeasure], config: &SuaConfig) -> Result<SuaSolution> {
    if measures.is_empty() {
        return Err(Error::EmptyInput("SUA needs at least one measure"));
    }
    let s = measures[0].len();
    for (i, mu) in measures.iter().enumerate() {
        if mu.len() != s {
            return Err(Error::NotUniform(format!(
                "measure {i} has {} support points, expected {s}",
                mu.len()
            )));
        }
        if !mu.is_uniform(UNIFORM_TOL) {
            return Err(Error::NotUniform(format!("measure {i} has non-uniform weights")));
        }
    }
    let supports: Vec<Points> = measures.iter().map(|mu| mu.points().clone()).collect();
    sua_solve_on_supports(&supports, config)
}

/// The descent itself, for callers that already hold bare position
/// matrices.
pub fn sua_solve_on_supports(supports: &[Points], config: &SuaConfig) -> Result<SuaSolution> {
    assert!(config.tolerance > 0.0, "tolerance must be positive");
    assert!(config.sample_size >= 1 && config.repeats >= 1);
    let mut joint = supports[0].clone();
    for support in &supports[1..] {
        for row in support.rows() {
            joint.push_row(row);
        }
    }
    let diam = diameter(&joint);
    let threshold = config.tolerance * diam;

    let start = warmstart(supports, config.warmstart_steps, derive_seed(config.seed, &[0x5a]))?;
    let mut state = SuaState::evaluate(start, supports)?;
    let scale = state.surrogate.abs().max(1.0);
    let mut converged = false;

    while state.iteration < config.max_iters {
        let mut alpha = config.schedule.at(state.iteration);
        let mut next = sua_step(&state, supports, alpha)?;
        let mut halvings = 0;
        while next.surrogate > state.surrogate + MONOTONE_TOL * scale {
            halvings += 1;
            if halvings > 20 {
                break;
            }
            alpha *= 0.5;
            next = sua_step(&state, supports, alpha)?;
        }
        if next.surrogate > state.surrogate + MONOTONE_TOL * scale {
            converged = true; // no decreasing step left at this resolution
            break;
        }
        let displacement = next.displacement;
        state = next;
        if displacement <= threshold {
            converged = true;
            break;
        }
    }

    let barycenter = DiscreteMeasure::uniform(state.positions.clone())?;
    Ok(SuaSolution {
        barycenter,
        value: state.surrogate,
        iterations: state.iteration,
        converged,
    })
}

/// Best of `restarts` independently seeded solves; ties resolved toward the
/// lower value.
pub fn sua_best_of(
    measures: &[DiscreteMeasure],
    config: &SuaConfig,
    restarts: usize,
) -> Result<SuaSolution> {
    assert!(restarts >= 1);
    let mut best: Option<SuaSolution> = None;
    for r in 0..restarts {
        let mut run_config = config.clone();
        run_config.seed = derive_seed(config.seed, &[0xbe57, r as u64]);
        let solution = sua_solve(measures, &run_config)?;
        best = match best {
            Some(current) if current.value <= solution.value => Some(current),
            _ => Some(solution),
        };
    }
    Ok(best.expect("at least one restart"))
}
