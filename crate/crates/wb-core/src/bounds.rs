//! Nonasymptotic error bounds: covering numbers, the constant ℰ, the
//! Fréchet-gap bound, the unit-cube closed forms, and the binomial lower
//! bound.
//!
//! Everything here evaluates an explicit finite formula; nothing samples.
//! The covering number entering ℰ is computed greedily (an upper bound on
//! the true covering number — safe, since ℰ only ever feeds upper bounds)
//! and exactly by exhaustive search for sets of at most 12 points. The
//! infimum in ℰ is taken over a finite grid of `q` and `l_max`, so the
//! reported value is a certified upper bound on the true constant.

use crate::measures::{diameter, euclidean, DiscreteMeasure, Points};

/// Sets up to this size get an exact minimum cover.
pub const EXACT_COVER_LIMIT: usize = 12;

/// The q grid searched by [`constant_e`]: {1.5, 2, 3, …, 10}.
pub const Q_GRID: [f64; 10] = [1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];

/// Largest `l_max` searched by [`constant_e`].
pub const L_MAX_LIMIT: u32 = 30;

/// δ-covering number with centers restricted to the point set: exact
/// exhaustive minimum for at most [`EXACT_COVER_LIMIT`] points, greedy
/// farthest-point cover above (an upper bound on the true value).
pub fn covering_number(points: &Points, delta: f64) -> usize {
    if points.len() <= EXACT_COVER_LIMIT {
        covering_number_exact(points, delta)
    } else {
        covering_number_greedy(points, delta)
    }
}

/// Size of a greedy farthest-point cover: start at the first point, always
/// add the point farthest from the chosen centers, stop when everything is
/// within `delta`.
pub fn covering_number_greedy(points: &Points, delta: f64) -> usize {
    assert!(delta > 0.0, "covering radius must be positive");
    let n = points.len();
    let mut dist: Vec<f64> = (0..n).map(|k| euclidean(points.row(0), points.row(k))).collect();
    let mut count = 1;
    loop {
        let (far, far_dist) = dist
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
        if far_dist <= delta {
            return count;
        }
        count += 1;
        for k in 0..n {
            let d = euclidean(points.row(far), points.row(k));
            if d < dist[k] {
                dist[k] = d;
            }
        }
    }
}

/// Exact minimum cover by exhaustive search over center subsets.
/// Exponential in the point count; callers keep it at or below
/// [`EXACT_COVER_LIMIT`] points.
pub fn covering_number_exact(points: &Points, delta: f64) -> usize {
    assert!(delta > 0.0, "covering radius must be positive");
    let n = points.len();
    assert!(n <= 20, "exhaustive cover is exponential; got {n} points");
    let mut pairwise = vec![0u32; n]; // bitmask of points covered by center i
    for i in 0..n {
        let mut mask = 0u32;
        for k in 0..n {
            if euclidean(points.row(i), points.row(k)) <= delta {
                mask |= 1 << k;
            }
        }
        pairwise[i] = mask;
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for size in 1..=n {
        let mut found = false;
        let mut subset = (1u32 << size) - 1;
        while subset <= full && !found {
            let mut covered = 0u32;
            let mut bits = subset;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                covered |= pairwise[i];
                bits &= bits - 1;
            }
            if covered & full == full {
                found = true;
                break;
            }
            // Next subset of the same popcount (Gosper's hack).
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            if r == 0 {
                break;
            }
            subset = (((r ^ subset) >> 2) / c) | r;
        }
        if found {
            return size;
        }
    }
    n
}

/// The covering-number constant and its minimizing grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EConstant {
    pub value: f64,
    pub q: f64,
    pub l_max: u32,
}

/// The constant ℰ(𝒳, p) of the empirical-measure bound
/// `E[W_p^p(μ, μ^S)] ≤ diam(𝒳)^p · ℰ / √S`:
///
/// ```text
/// ℰ = 2^{p−1} inf_{q>1, l_max} q^p [ q^{−(l_max+1)p} √M
///       + (q/(q−1))^p Σ_{l=1}^{l_max} q^{−lp} √𝒩(𝒳, q^{−l} diam) ]
/// ```
///
/// with the factor `(q/(q−1))^p` removed when `p = 1`. The infimum is taken
/// over [`Q_GRID`] × {0, …, [`L_MAX_LIMIT`]}.
pub fn constant_e(points: &Points, p: f64) -> EConstant {
    constant_e_on_grid(points, p, &Q_GRID, L_MAX_LIMIT)
}

/// [`constant_e`] over an explicit search grid.
pub fn constant_e_on_grid(points: &Points, p: f64, qs: &[f64], l_max_limit: u32) -> EConstant {
    assert!(p >= 1.0);
    let m = points.len() as f64;
    let diam = diameter(points);
    let mut best = EConstant { value: f64::INFINITY, q: qs[0], l_max: 0 };
    for &q in qs {
        assert!(q > 1.0, "q must exceed 1");
        let factor = if p == 1.0 { 1.0 } else { (q / (q - 1.0)).powf(p) };
        // Covering numbers are reused across l_max for fixed q: the sum is
        // extended one term at a time.
        let mut tail = 0.0;
        for l_max in 0..=l_max_limit {
            if l_max >= 1 {
                let delta = q.powi(-(l_max as i32)) * diam;
                let cover = if delta > 0.0 {
                    covering_number(points, delta) as f64
                } else {
                    // Zero diameter: a single ball covers the set.
                    1.0
                };
                tail += q.powf(-(l_max as f64) * p) * cover.sqrt();
            }
            let head = q.powf(-((l_max + 1) as f64) * p) * m.sqrt();
            let value = 2.0f64.powf(p - 1.0) * q.powf(p) * (head + factor * tail);
            if value < best.value {
                best = EConstant { value, q, l_max };
            }
        }
    }
    best
}

/// Coefficient of `S^{−1/2}` in the Euclidean closed-form bound on
/// `E[W_p^p(μ, μ^S)]` for a set of `M` points with the given diameter in
/// `ℝ^D`, evaluated at integer `q ≥ 2`:
///
/// ```text
/// D^{p/2} 2^{p−1} diam^p q^p · branch(p′),   p′ = D/2 − p,
/// ```
///
/// with the three-branch form for `p′ < 0`, `p′ = 0`, `p′ > 0`, and the
/// factor `(q/(q−1))^p` omitted when `p = 1`.
pub fn euclidean_bound(p: f64, d: u32, m: f64, q: u32, diam: f64) -> f64 {
    assert!(p >= 1.0 && d >= 1 && q >= 2 && m >= 1.0);
    let qf = q as f64;
    let df = d as f64;
    let factor = if p == 1.0 { 1.0 } else { (qf / (qf - 1.0)).powf(p) };
    let p_prime = df / 2.0 - p;
    let branch = if p_prime < 0.0 {
        factor * qf.powf(p_prime) / (1.0 - qf.powf(p_prime))
    } else if p_prime == 0.0 {
        1.0 + factor * m.log(qf) / df
    } else {
        let m_pow = m.powf(0.5 - p / df);
        m_pow + factor * qf.powf(p_prime) * m_pow / (qf.powf(p_prime) - 1.0)
    };
    df.powf(p / 2.0) * 2.0f64.powf(p - 1.0) * diam.powf(p) * qf.powf(p) * branch
}

/// Which ℰ enters the Fréchet-gap bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EMethod {
    /// Data-driven ℰ from covering numbers of each support.
    Combinatorial,
    /// Euclidean closed form at the given integer `q` (each support priced
    /// by its size and ambient dimension, diameter 1-normalized into the
    /// joint diameter factor).
    EuclideanClosedForm { q: u32 },
}

/// The expected-gap bound on `|F^p(μ*) − F^p(μ̂*_S)|`:
///
/// ```text
/// (2p · diam(𝒳)^p / N) Σ_i ℰ(supp μ_i, 1) / √S_i
/// ```
///
/// where `diam(𝒳)` is the joint support diameter. For `p = 2` and equal
/// `S_i = S` this is the familiar `4 diam² /(N√S) · Σ_i ℰ_i` form.
pub fn frechet_gap_bound(
    measures: &[DiscreteMeasure],
    p: f64,
    sample_sizes: &[usize],
    method: EMethod,
) -> f64 {
    assert!(!measures.is_empty());
    assert_eq!(measures.len(), sample_sizes.len());
    let mut joint = measures[0].points().clone();
    for mu in &measures[1..] {
        for row in mu.points().rows() {
            joint.push_row(row);
        }
    }
    let diam = diameter(&joint);
    let n = measures.len() as f64;
    let mut sum = 0.0;
    for (mu, &s) in measures.iter().zip(sample_sizes) {
        assert!(s >= 1);
        let e_i = match method {
            EMethod::Combinatorial => constant_e(mu.points(), 1.0).value,
            EMethod::EuclideanClosedForm { q } => {
                // ℰ at p=1 is the closed-form coefficient with unit diameter.
                euclidean_bound(1.0, mu.dim() as u32, mu.len() as f64, q, 1.0)
            }
        };
        sum += e_i / (s as f64).sqrt();
    }
    2.0 * p * diam.powf(p) / n * sum
}

/// Coefficient of `S^{−1/2}` obtained by composing the gap bound (p = 2,
/// equal sample sizes) with the q = 2 Euclidean closed form on the unit
/// cube `[0,1]^D`: `8 D^{3/2} c(D, M)` with `c` the p = 1, q = 2 branch.
pub fn composed_p2_coefficient(d: u32, m: f64) -> f64 {
    let df = d as f64;
    // diam([0,1]^D) = √D; the gap bound contributes 4·diam² = 4D and the
    // closed form 2√D·c(D,M).
    4.0 * df * euclidean_bound(1.0, d, m, 2, 1.0)
}

/// Verbatim unit-cube bound on `E[|F²(μ*) − F²(μ̂*_S)|]` for `N` measures
/// of `M` points in `[0,1]^D`:
///
/// ```text
/// 4 D^{3/2} S^{−1/2} · { 2+√2         (D = 1)
///                      { 2+log₂ M     (D = 2)
///                      { (3+√2) M^{1/2−1/D}   (D ≥ 3)
/// ```
pub fn eq_p2_bound(d: u32, m: f64, s: usize) -> f64 {
    assert!(d >= 1 && m >= 1.0 && s >= 1);
    let df = d as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    let branch = match d {
        1 => 2.0 + sqrt2,
        2 => 2.0 + m.log2(),
        _ => (3.0 + sqrt2) * m.powf(0.5 - 1.0 / df),
    };
    4.0 * df.powf(1.5) / (s as f64).sqrt() * branch
}

/// Exact and closed-form lower bounds for the two-point rate witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialLowerBound {
    /// `E[W₁(μ, μ^S)] = S^{−1} E|K − S/2|`, `K ~ Bin(S, 1/2)`, exactly.
    pub exact: f64,
    /// The closed lower bound `√2 · S^{−1/2} / 4`.
    pub closed_form: f64,
}

/// Mean absolute deviation bound for `μ = (δ₀ + δ₁)/2`: the expected
/// empirical `W₁` equals the binomial MAD over `S` and is bounded below by
/// `√2 S^{−1/2}/4`. Summation runs in log space, safe for large `S`.
pub fn binomial_lower_bound(s: usize) -> BinomialLowerBound {
    assert!(s >= 1);
    // ln k! table.
    let mut ln_factorial = vec![0.0f64; s + 1];
    for k in 1..=s {
        ln_factorial[k] = ln_factorial[k - 1] + (k as f64).ln();
    }
    let ln2 = std::f64::consts::LN_2;
    let half = s as f64 / 2.0;
    let mut mad = 0.0;
    for k in 0..=s {
        let dev = (k as f64 - half).abs();
        if dev == 0.0 {
            continue;
        }
        let ln_prob =
            ln_factorial[s] - ln_factorial[k] - ln_factorial[s - k] - s as f64 * ln2;
        mad += dev * ln_prob.exp();
    }
    let exact = mad / s as f64;
    let closed_form = std::f64::consts::SQRT_2 / (4.0 * (s as f64).sqrt());
    BinomialLowerBound { exact, closed_form }
}

/// Every explicit constant evaluated for one problem instance.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub p: f64,
    pub sample_size: usize,
    /// Joint support diameter `diam(𝒳)`.
    pub diameter: f64,
    /// ℰ(𝒳, p) of the joint support with its minimizing grid point.
    pub e_joint: EConstant,
    /// Per-measure constants ℰ(supp μ_i, 1) entering the gap bound.
    pub e_per_measure: Vec<EConstant>,
    /// `diam^p ℰ / √S`: the empirical-transport bound on the joint support.
    pub empirical_bound: f64,
    /// Expected Fréchet gap bound with data-driven covering numbers.
    pub gap_bound: f64,
    /// The same gap bound through the q = 2 Euclidean closed form.
    pub gap_bound_euclidean: f64,
    /// Verbatim unit-cube display at `M = max_i M_i`, `D` ambient.
    pub eq_p2: f64,
    /// Composed unit-cube coefficient `8 D^{3/2} c(D, M)` times `S^{−1/2}`.
    pub composed_p2: f64,
    /// Rate-optimality witness (two-point family), not instance-specific.
    pub binomial: BinomialLowerBound,
}

/// Evaluate every bound for the given measures at a common sample size.
pub fn bound_report(measures: &[DiscreteMeasure], p: f64, sample_size: usize) -> BoundReport {
    assert!(!measures.is_empty());
    let mut joint = measures[0].points().clone();
    for mu in &measures[1..] {
        for row in mu.points().rows() {
            joint.push_row(row);
        }
    }
    let diam = diameter(&joint);
    let e_joint = constant_e(&joint, p);
    let e_per_measure: Vec<EConstant> =
        measures.iter().map(|mu| constant_e(mu.points(), 1.0)).collect();
    let sizes = vec![sample_size; measures.len()];
    let gap_bound = frechet_gap_bound(measures, p, &sizes, EMethod::Combinatorial);
    let gap_bound_euclidean =
        frechet_gap_bound(measures, p, &sizes, EMethod::EuclideanClosedForm { q: 2 });
    let m_max = measures.iter().map(|mu| mu.len()).max().unwrap() as f64;
    let d = measures[0].dim() as u32;
    let sqrt_s = (sample_size as f64).sqrt();
    BoundReport {
        p,
        sample_size,
        diameter: diam,
        empirical_bound: diam.powf(p) * e_joint.value / sqrt_s,
        e_joint,
        e_per_measure,
        gap_bound,
        gap_bound_euclidean,
        eq_p2: eq_p2_bound(d, m_max, sample_size),
        composed_p2: composed_p2_coefficient(d, m_max) / sqrt_s,
        binomial: binomial_lower_bound(sample_size),
    }
}
