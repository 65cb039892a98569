//! Shared fixtures for the benchmark targets.

use rand::Rng;

use wb_core::measures::Points;
use wb_core::rng::{rng_from_seed, WbRng};
use wb_core::DiscreteMeasure;

pub fn rng(seed: u64) -> WbRng {
    rng_from_seed(seed)
}

/// Random point cloud in the unit square/cube.
pub fn cloud(rng: &mut WbRng, len: usize, dim: usize) -> Points {
    let rows: Vec<Vec<f64>> =
        (0..len).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    Points::from_rows(&rows)
}

/// Random measure with strictly positive weights.
pub fn measure(rng: &mut WbRng, len: usize, dim: usize) -> DiscreteMeasure {
    let points = cloud(rng, len, dim);
    let weights: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 0.05).collect();
    DiscreteMeasure::new(points, weights).unwrap()
}

/// Uniform measure on a random cloud.
pub fn uniform(rng: &mut WbRng, len: usize, dim: usize) -> DiscreteMeasure {
    DiscreteMeasure::uniform(cloud(rng, len, dim)).unwrap()
}
