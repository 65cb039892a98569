//! Discrete measures: construction, resampling, centroid sets, diameters.
//!
//! A [`DiscreteMeasure`] is a weighted point cloud in `ℝ^D` with nonnegative
//! weights summing to one. Everything downstream (transport solves, the
//! barycenter LP, the SUA descent) consumes this type. Empirical measures keep
//! their `S` sampled rows verbatim — duplicates are never merged, because the
//! descent in [`crate::sua`] works on an `S × D` position matrix.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, WbRng};

/// Weight renormalization below this deviation is silent; above it the
/// original sum is recorded so callers may warn.
pub const MASS_WARN_TOLERANCE: f64 = 1e-6;

/// Two centroids closer than this (in every coordinate) are merged.
pub const CENTROID_MERGE_TOLERANCE: f64 = 1e-10;

/// Default cap on `Π M_i` before `centroid_set` refuses to enumerate.
pub const CENTROID_CAP_DEFAULT: u128 = 10_000_000;

/// Row-major matrix of points: `len` rows in `dim` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    /// Wrap a flat row-major buffer. `data.len()` must be a multiple of `dim`.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        assert_eq!(data.len() % dim, 0, "flat buffer length must be a multiple of dim");
        Self { data, dim }
    }

    /// Build from explicit rows. All rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "at least one row required");
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { data, dim }
    }

    pub fn zeros(len: usize, dim: usize) -> Self {
        Self { data: vec![0.0; len * dim], dim }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn row_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Euclidean distance between two coordinate slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Squared Euclidean distance.
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// `d(a, b)^p` for the Euclidean metric. Exact for `p = 1` and `p = 2`.
pub fn euclidean_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    let sq = squared_euclidean(a, b);
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(0.5 * p)
    }
}

/// A finitely supported probability measure: `M` atoms in `ℝ^D`.
///
/// Invariants held after construction: weights nonnegative and summing to one
/// within `1e-12`, all coordinates finite, at least one atom. Duplicate atoms
/// are permitted.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    points: Points,
    weights: Vec<f64>,
    /// Original weight sum, recorded when it deviated from 1 by more than
    /// [`MASS_WARN_TOLERANCE`] before renormalization.
    original_mass: Option<f64>,
}

impl DiscreteMeasure {
    /// Validate, clamp weights at zero and renormalize to total mass one.
    ///
    /// Weights may be dirty up to `-1e-12` (clamped); a weight sum far from
    /// one is accepted silently up to [`MASS_WARN_TOLERANCE`] and recorded in
    /// [`DiscreteMeasure::original_mass`] beyond that, so callers may warn.
    pub fn new(points: Points, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("measure must have at least one atom"));
        }
        if points.len() != weights.len() {
            return Err(Error::SizeMismatch(points.len(), weights.len()));
        }
        for (i, value) in points.as_slice().iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { what: "coordinates", index: i / points.dim() });
            }
        }
        let mut clamped = weights;
        for (i, w) in clamped.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { what: "weights", index: i });
            }
            if *w < -1e-12 {
                return Err(Error::NegativeWeight { value: *w, index: i });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = clamped.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        for w in &mut clamped {
            *w /= total;
        }
        let original_mass = if (total - 1.0).abs() > MASS_WARN_TOLERANCE { Some(total) } else { None };
        Ok(Self { points: points.clone(), weights: clamped, original_mass })
    }

    /// Convenience constructor from explicit rows.
    pub fn from_rows(rows: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        Self::new(Points::from_rows(rows), weights.to_vec())
    }

    /// Point mass at `point`.
    pub fn dirac(point: &[f64]) -> Self {
        Self {
            points: Points::from_rows(&[point.to_vec()]),
            weights: vec![1.0],
            original_mass: None,
        }
    }

    /// Uniform measure on the given support (duplicates retained).
    pub fn uniform(points: Points) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, index: usize) -> &[f64] {
        self.points.row(index)
    }

    /// Weight sum before renormalization, when it was off by more than
    /// [`MASS_WARN_TOLERANCE`].
    pub fn original_mass(&self) -> Option<f64> {
        self.original_mass
    }

    /// True when every weight equals `1/M` within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let target = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - target).abs() <= tol)
    }

    /// Diameter of the support.
    pub fn diameter(&self) -> f64 {
        diameter(&self.points)
    }

    /// Drop atoms with weight below `threshold`, renormalizing the rest.
    pub fn pruned(&self, threshold: f64) -> Result<Self> {
        let keep: Vec<usize> =
            (0..self.len()).filter(|&k| self.weights[k] > threshold).collect();
        if keep.is_empty() {
            return Err(Error::DegenerateWeights);
        }
        let mut points = Points::zeros(0, self.dim());
        let mut weights = Vec::with_capacity(keep.len());
        for &k in &keep {
            points.push_row(self.point(k));
            weights.push(self.weights[k]);
        }
        Self::new(points, weights)
    }

    /// Mixture `Σ coefficients[r] · measures[r]` as plain support
    /// concatenation. Atoms are not deduplicated.
    pub fn mixture(measures: &[DiscreteMeasure], coefficients: &[f64]) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::EmptyInput("mixture of zero measures"));
        }
        assert_eq!(measures.len(), coefficients.len());
        let dim = measures[0].dim();
        let mut points = Points::zeros(0, dim);
        let mut weights = Vec::new();
        for (mu, &coef) in measures.iter().zip(coefficients) {
            if mu.dim() != dim {
                return Err(Error::DimensionMismatch(dim, mu.dim()));
            }
            for k in 0..mu.len() {
                points.push_row(mu.point(k));
                weights.push(coef * mu.weights[k]);
            }
        }
        Self::new(points, weights)
    }

    /// Merge atoms whose coordinates agree within `tol` in every coordinate,
    /// summing their weights. Only done on explicit request.
    pub fn merged(&self, tol: f64) -> Result<Self> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            lexicographic(self.point(a), self.point(b))
        });
        let mut points = Points::zeros(0, self.dim());
        let mut weights: Vec<f64> = Vec::new();
        for &k in &order {
            let last = weights.len().checked_sub(1);
            match last {
                Some(l) if within(points.row(l), self.point(k), tol) => weights[l] += self.weights[k],
                _ => {
                    points.push_row(self.point(k));
                    weights.push(self.weights[k]);
                }
            }
        }
        Self::new(points, weights)
    }

    /// Write the canonical measure CSV: header `x1,...,xD,w`, one atom per
    /// row, `.` decimal separator. Floats are printed shortest-round-trip, so
    /// loading the file back reproduces the measure exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::new();
        for d in 0..self.dim() {
            let _ = write!(header, "x{},", d + 1);
        }
        header.push('w');
        writeln!(out, "{header}")?;
        for k in 0..self.len() {
            let mut line = String::new();
            for c in self.point(k) {
                let _ = write!(line, "{c},");
            }
            let _ = write!(line, "{}", self.weights[k]);
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Load a measure from the canonical CSV format. The dimension is taken
    /// from the header.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(Error::EmptyInput("csv has no header"))?
            .1
            .map(|h| (0, h))
            .map_err(Error::Io)?;
        let columns: Vec<&str> = header.trim().split(',').collect();
        if columns.len() < 2 || columns.last() != Some(&"w") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `x1,...,xD,w`, got `{header}`"),
            });
        }
        let dim = columns.len() - 1;
        let mut points = Points::zeros(0, dim);
        let mut weights = Vec::new();
        for (index, line) in lines {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse {
                    line: index + 1,
                    message: format!("expected {} fields, got {}", dim + 1, fields.len()),
                });
            }
            let mut row = Vec::with_capacity(dim);
            for field in &fields[..dim] {
                row.push(parse_float(field, index + 1)?);
            }
            points.push_row(&row);
            weights.push(parse_float(fields[dim], index + 1)?);
        }
        if weights.is_empty() {
            return Err(Error::EmptyInput("csv has no data rows"));
        }
        DiscreteMeasure::new(points, weights)
    }

    /// Load from a file path.
    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Write to a file path.
    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("bad float `{field}`: {e}"),
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(order) => return order,
        }
    }
    std::cmp::Ordering::Equal
}

fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// A uniform measure on `S` i.i.d. draws from a parent measure.
///
/// Weights are identically `1/S` and rows keep duplicates, so the support is
/// exactly an `S × D` position matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    measure: DiscreteMeasure,
    sample_size: usize,
    seed: u64,
}

impl EmpiricalMeasure {
    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn into_measure(self) -> DiscreteMeasure {
        self.measure
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl std::ops::Deref for EmpiricalMeasure {
    type Target = DiscreteMeasure;

    fn deref(&self) -> &DiscreteMeasure {
        &self.measure
    }
}

/// Draw `S` i.i.d. atoms from `mu` by inverse-CDF sampling on the cumulative
/// weight vector. Deterministic given `seed`; output weights are all `1/S`.
pub fn sample_empirical(mu: &DiscreteMeasure, s: usize, seed: u64) -> EmpiricalMeasure {
    assert!(s >= 1, "sample size must be at least 1");
    let mut rng = rng_from_seed(seed);
    sample_empirical_with(mu, s, seed, &mut rng)
}

pub(crate) fn sample_empirical_with(
    mu: &DiscreteMeasure,
    s: usize,
    seed: u64,
    rng: &mut WbRng,
) -> EmpiricalMeasure {
    let mut cumulative = Vec::with_capacity(mu.len());
    let mut acc = 0.0;
    for &w in mu.weights() {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    let mut points = Points::zeros(0, mu.dim());
    for _ in 0..s {
        let u: f64 = rng.random::<f64>() * total;
        // First index with cumulative > u.
        let k = cumulative.partition_point(|&c| c <= u).min(mu.len() - 1);
        points.push_row(mu.point(k));
    }
    let weights = vec![1.0 / s as f64; s];
    EmpiricalMeasure {
        measure: DiscreteMeasure { points, weights, original_mass: None },
        sample_size: s,
        seed,
    }
}

/// Exact O(M²) diameter scan: `max_{x,y} ‖x − y‖₂`.
pub fn diameter(points: &Points) -> f64 {
    let n = points.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_euclidean(points.row(i), points.row(j));
            if d > best {
                best = d;
            }
        }
    }
    best.sqrt()
}

/// The p-centroid set: one point per tuple `(k_1, …, k_N)` of support
/// indices, minimizing `Σ_i d^p(x^i_{k_i}, ·)`, with near-duplicates merged.
///
/// For `p = 2` each centroid is the arithmetic mean of its tuple in closed
/// form. For `p = 1` each centroid is the geometric median (Weiszfeld with a
/// singularity guard); other exponents run a damped gradient descent from the
/// mean. Refuses to enumerate more than `cap` tuples.
pub fn centroid_set_with_cap(
    measures: &[DiscreteMeasure],
    p: f64,
    cap: u128,
) -> Result<Points> {
    if measures.is_empty() {
        return Err(Error::EmptyInput("centroid set of zero measures"));
    }
    assert!(p >= 1.0, "exponent must satisfy p >= 1");
    let dim = measures[0].dim();
    for mu in measures {
        if mu.dim() != dim {
            return Err(Error::DimensionMismatch(dim, mu.dim()));
        }
    }
    let mut tuples: u128 = 1;
    for mu in measures {
        tuples = tuples.saturating_mul(mu.len() as u128);
        if tuples > cap {
            return Err(Error::CentroidCapExceeded { estimated: tuples, cap });
        }
    }

    let n = measures.len();
    let mut index = vec![0usize; n];
    let mut out = Points::zeros(0, dim);
    let mut tuple_points = Points::zeros(n, dim);
    loop {
        for (i, mu) in measures.iter().enumerate() {
            tuple_points.row_mut(i).copy_from_slice(mu.point(index[i]));
        }
        let centroid = tuple_centroid(&tuple_points, p);
        out.push_row(&centroid);

        // Advance the mixed-radix tuple counter.
        let mut carry = n;
        for i in (0..n).rev() {
            index[i] += 1;
            if index[i] < measures[i].len() {
                carry = i;
                break;
            }
            index[i] = 0;
        }
        if carry == n {
            break;
        }
    }
    Ok(dedup_points(&out, CENTROID_MERGE_TOLERANCE))
}

/// [`centroid_set_with_cap`] at the default cap of `10^7` tuples.
pub fn centroid_set(measures: &[DiscreteMeasure], p: f64) -> Result<Points> {
    centroid_set_with_cap(measures, p, CENTROID_CAP_DEFAULT)
}

/// Minimizer of `y ↦ Σ_i ‖x_i − y‖^p` over one tuple of points.
fn tuple_centroid(tuple: &Points, p: f64) -> Vec<f64> {
    let mean = arithmetic_mean(tuple);
    if p == 2.0 {
        return mean;
    }
    if p == 1.0 {
        return geometric_median(tuple, mean);
    }
    descend_power_objective(tuple, p, mean)
}

fn arithmetic_mean(tuple: &Points) -> Vec<f64> {
    let mut mean = vec![0.0; tuple.dim()];
    for row in tuple.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    let n = tuple.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    mean
}

/// Weiszfeld iteration with the standard singularity guard: when an iterate
/// lands on a data point, optimality is tested via the pulled-out gradient
/// norm and the Vardi-Zhang step is taken otherwise.
fn geometric_median(tuple: &Points, start: Vec<f64>) -> Vec<f64> {
    const MAX_ITERS: usize = 200;
    const TOL: f64 = 1e-12;
    let dim = tuple.dim();
    let mut y = start;
    for _ in 0..MAX_ITERS {
        let mut hit = None;
        for (k, row) in tuple.rows().enumerate() {
            if euclidean(&y, row) <= 1e-12 {
                hit = Some(k);
                break;
            }
        }
        let mut numerator = vec![0.0; dim];
        let mut inv_sum = 0.0;
        let mut pull = vec![0.0; dim];
        for (k, row) in tuple.rows().enumerate() {
            if hit == Some(k) {
                continue;
            }
            let d = euclidean(&y, row).max(1e-300);
            inv_sum += 1.0 / d;
            for c in 0..dim {
                numerator[c] += row[c] / d;
                pull[c] += (row[c] - y[c]) / d;
            }
        }
        if inv_sum == 0.0 {
            // Every point coincides with y.
            return y;
        }
        let pull_norm = euclidean(&pull, &vec![0.0; dim]);
        let next: Vec<f64> = if let Some(_k) = hit {
            // y sits on a data point: it is optimal iff the pull of the
            // remaining points does not exceed the unit mass anchored here.
            if pull_norm <= 1.0 + 1e-12 {
                return y;
            }
            // Vardi-Zhang adjusted step off the singularity.
            let weiszfeld: Vec<f64> = numerator.iter().map(|v| v / inv_sum).collect();
            let shrink = (1.0 / pull_norm).min(1.0);
            (0..dim).map(|c| (1.0 - shrink) * y[c] + shrink * weiszfeld[c]).collect()
        } else {
            numerator.iter().map(|v| v / inv_sum).collect()
        };
        let step = euclidean(&next, &y);
        y = next;
        if step <= TOL {
            break;
        }
    }
    y
}

/// Gradient descent with backtracking for `Σ ‖x_i − y‖^p`, `p ∉ {1, 2}`.
/// 50 outer iterations from the arithmetic mean, tolerance 1e-10.
fn descend_power_objective(tuple: &Points, p: f64, start: Vec<f64>) -> Vec<f64> {
    const OUTER: usize = 50;
    const TOL: f64 = 1e-10;
    let dim = tuple.dim();
    let objective = |y: &[f64]| -> f64 {
        tuple.rows().map(|row| euclidean_pow(row, y, p)).sum()
    };
    let mut y = start;
    let mut value = objective(&y);
    for _ in 0..OUTER {
        let mut grad = vec![0.0; dim];
        for row in tuple.rows() {
            let d = euclidean(&y, row);
            if d <= 1e-300 {
                continue;
            }
            let scale = p * d.powf(p - 2.0);
            for c in 0..dim {
                grad[c] += scale * (y[c] - row[c]);
            }
        }
        let grad_norm = euclidean(&grad, &vec![0.0; dim]);
        if grad_norm <= TOL {
            break;
        }
        // Backtracking line search along -grad.
        let mut step = 1.0 / (p * p.max(2.0));
        let mut moved = false;
        for _ in 0..40 {
            let candidate: Vec<f64> = (0..dim).map(|c| y[c] - step * grad[c]).collect();
            let candidate_value = objective(&candidate);
            if candidate_value < value - 1e-18 {
                let displacement = euclidean(&candidate, &y);
                y = candidate;
                value = candidate_value;
                moved = true;
                if displacement <= TOL {
                    return y;
                }
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    y
}

/// Merge points equal within `tol` per coordinate (lexicographic sort, then
/// a linear merge pass).
fn dedup_points(points: &Points, tol: f64) -> Points {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lexicographic(points.row(a), points.row(b)));
    let mut out = Points::zeros(0, points.dim());
    for &k in &order {
        let keep = match out.len().checked_sub(1) {
            Some(last) => !within(out.row(last), points.row(k), tol),
            None => true,
        };
        if keep {
            out.push_row(points.row(k));
        }
    }
    out
}
