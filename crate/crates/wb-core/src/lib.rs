//! Wasserstein barycenters of finitely supported measures, computed by
//! randomized resampling.
//!
//! The crate is organised around one idea: instead of solving the barycenter
//! problem on the full data measures (which grows out of reach almost
//! immediately), draw `S` i.i.d. samples from each measure, solve the much
//! smaller barycenter problem on the empirical measures, repeat `R` times and
//! average. Nonasymptotic bounds control the expected error of the objective
//! value in terms of `S`, with a rate of `S^{-1/2}` independent of the
//! dimension.
//!
//! Modules:
//!
//! * [`measures`] — discrete measures, empirical resampling, centroid sets.
//! * [`ot`] — exact optimal transport via a transportation network simplex,
//!   with an assignment fast path for uniform measures of equal size.
//! * [`lp_oracle`] — a revised-simplex LP solver and the exact barycenter
//!   linear program; the ground truth for small instances.
//! * [`sua`] — stochastic uniform approximation: free-support subgradient
//!   descent on the positions of a uniform candidate measure.
//! * [`pipeline`] — the resample → solve → average loop, Fréchet evaluation
//!   and experiment sweeps.
//! * [`bounds`] — evaluation of the covering-number constant and every
//!   explicit error bound, plus the binomial lower bound.
//! * [`datasets`] — synthetic dataset families and grayscale-image ingestion.

pub mod bounds;
pub mod datasets;
mod error;
pub mod lp_oracle;
pub mod measures;
pub mod ot;
pub mod pipeline;
pub mod rng;
pub mod sua;

pub use error::{Error, Result};
pub use measures::{DiscreteMeasure, EmpiricalMeasure, Points};
pub use ot::{CostMatrix, TransportPlan};
