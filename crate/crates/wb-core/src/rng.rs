//! Seed derivation and the few samplers the crate needs.
//!
//! Every randomized operation takes an explicit 64-bit seed; nothing reads a
//! global RNG or the clock. Parallel code derives one seed per task *before*
//! dispatch, so results never depend on the thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic stream cipher RNG used throughout the crate.
pub type WbRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a master seed together with task tags into an independent task seed.
///
/// Used as `derive_seed(master, &[r, i])` for repeat `r` and measure `i`, so
/// per-task streams are fixed by the master seed alone.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0xd1b5_4a32_d192_ed03);
        out = splitmix64(&mut state);
    }
    out
}

/// RNG for a derived seed.
pub fn rng_from_seed(seed: u64) -> WbRng {
    WbRng::seed_from_u64(seed)
}

/// Standard normal draw (Box-Muller; one of the pair is discarded).
pub fn standard_normal(rng: &mut WbRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.random();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// Gamma(shape, 1) draw by Marsaglia-Tsang squeeze, boosted for shape < 1.
pub fn gamma(rng: &mut WbRng, shape: f64) -> f64 {
    assert!(shape > 0.0 && shape.is_finite(), "gamma shape must be positive");
    if shape < 1.0 {
        let boost: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE).powf(1.0 / shape);
        return boost * gamma(rng, shape + 1.0);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        if u < 1.0 - 0.0331 * x.powi(4) || u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Dirichlet(concentration · 1) draw of the given length.
pub fn dirichlet(rng: &mut WbRng, concentration: f64, len: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..len).map(|_| gamma(rng, concentration)).collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        // All gammas underflowed; fall back to uniform mass.
        return vec![1.0 / len as f64; len];
    }
    for w in &mut draws {
        *w /= total;
    }
    draws
}
