//! Resample → solve → average: the randomized barycenter pipeline.
//!
//! For each of `R` repeats, draw `S` samples from every input measure,
//! solve the barycenter problem on the empirical measures, and combine the
//! `R` empirical barycenters into one estimator — by default their linear
//! average, the mixture with support concatenation, whose Fréchet value
//! never exceeds the average of the individual values (convexity). Picking
//! the best of the `R` runs instead is available for comparison but costs
//! `N` extra transport solves per repeat and tends to do worse.
//!
//! All randomness is derived per task from the master seed before any
//! parallel dispatch: records are byte-reproducible for any thread count.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp_oracle::{exact_barycenter_with_cap, LP_VARIABLE_CAP};
use crate::measures::{sample_empirical, DiscreteMeasure};
use crate::ot::solve_ot;
use crate::rng::derive_seed;
use crate::sua::{sua_solve, SuaConfig};

/// Which solver handles each empirical barycenter problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    /// Free-support descent; squared Euclidean cost only.
    Sua,
    /// Exact LP oracle on the empirical centroid set; any `p ≥ 1`, small
    /// sample sizes only.
    Exact,
}

/// How the `R` empirical barycenters become one estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineRule {
    /// Mixture `(1/R) Σ_r μ̄_r` on the concatenated supports.
    LinearAverage,
    /// The repeat with the smallest Fréchet value.
    BestOfR,
}

/// One pipeline run (or one repeat of it).
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub sample_size: usize,
    pub repeats: usize,
    /// Repeat index within a run, or repetition index within a sweep cell.
    pub rep: usize,
    pub seed: u64,
    /// Fréchet value against the full data measures (exact transports).
    pub frechet: f64,
    /// `(F(μ̂) − F*) / F*` when an oracle value `F*` is available.
    pub rel_err: Option<f64>,
    pub runtime_ms: f64,
}

/// Result of [`randomized_barycenter`].
#[derive(Clone, Debug)]
pub struct RandomizedOutcome {
    /// The combined estimator.
    pub barycenter: DiscreteMeasure,
    /// Fréchet value of the combined estimator.
    pub frechet: f64,
    /// One record per repeat, carrying `F(μ̄_r)`.
    pub records: Vec<ExperimentRecord>,
}

/// `F^p(candidate) = (1/N) Σ_i W_p^p(μ_i, candidate)` by `N` exact
/// transport solves (parallel, order-fixed reduction).
pub fn frechet_value(
    candidate: &DiscreteMeasure,
    measures: &[DiscreteMeasure],
    p: f64,
) -> Result<f64> {
    if measures.is_empty() {
        return Err(Error::EmptyInput("Fréchet functional over zero measures"));
    }
    let values: Result<Vec<f64>> = measures
        .par_iter()
        .map(|mu| solve_ot(mu, candidate, p).map(|(_, v)| v))
        .collect();
    Ok(values?.iter().sum::<f64>() / measures.len() as f64)
}

/// The sampling pipeline: `R` repeats of draw-and-solve with per-`(r, i)`
/// derived seeds, combined per `rule`.
///
/// `oracle_value`, when given, fills the records' relative errors.
pub fn randomized_barycenter(
    measures: &[DiscreteMeasure],
    p: f64,
    config: &SuaConfig,
    solver: SolverChoice,
    rule: CombineRule,
    oracle_value: Option<f64>,
) -> Result<RandomizedOutcome> {
    if measures.is_empty() {
        return Err(Error::EmptyInput("barycenter of zero measures"));
    }
    if solver == SolverChoice::Sua && p != 2.0 {
        return Err(Error::InvalidParameter(format!(
            "the SUA solver handles p = 2 only, got p = {p}"
        )));
    }
    let n = measures.len();
    let s = config.sample_size;
    let r_total = config.repeats.max(1);

    let repeat_results: Result<Vec<(DiscreteMeasure, ExperimentRecord)>> = (0..r_total)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let empiricals: Vec<DiscreteMeasure> = (0..n)
                .map(|i| {
                    let seed = derive_seed(config.seed, &[r as u64, i as u64]);
                    sample_empirical(&measures[i], s, seed).into_measure()
                })
                .collect();
            let solver_seed = derive_seed(config.seed, &[r as u64, n as u64]);
            let bary = match solver {
                SolverChoice::Sua => {
                    let mut run = config.clone();
                    run.seed = solver_seed;
                    sua_solve(&empiricals, &run)?.barycenter
                }
                SolverChoice::Exact => {
                    exact_barycenter_with_cap(&empiricals, p, None, LP_VARIABLE_CAP)?.0
                }
            };
            let frechet = frechet_value(&bary, measures, p)?;
            let record = ExperimentRecord {
                sample_size: s,
                repeats: r_total,
                rep: r,
                seed: solver_seed,
                frechet,
                rel_err: oracle_value.map(|f_star| (frechet - f_star) / f_star),
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            Ok((bary, record))
        })
        .collect();
    let repeat_results = repeat_results?;

    let (barycenter, frechet) = match rule {
        CombineRule::LinearAverage => {
            let parts: Vec<DiscreteMeasure> =
                repeat_results.iter().map(|(b, _)| b.clone()).collect();
            let coefficients = vec![1.0 / r_total as f64; r_total];
            let mixture = DiscreteMeasure::mixture(&parts, &coefficients)?;
            let value = frechet_value(&mixture, measures, p)?;
            (mixture, value)
        }
        CombineRule::BestOfR => {
            let best = repeat_results
                .iter()
                .min_by(|a, b| a.1.frechet.partial_cmp(&b.1.frechet).unwrap())
                .expect("at least one repeat");
            (best.0.clone(), best.1.frechet)
        }
    };
    let records = repeat_results.into_iter().map(|(_, rec)| rec).collect();
    Ok(RandomizedOutcome { barycenter, frechet, records })
}

/// How the sweep obtained its reference value.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleKind {
    /// Exact LP optimum on the full measures.
    ExactLp,
    /// Best of several high-effort descent runs at `S = max M_i`; an upper
    /// bound on the optimum, labeled accordingly.
    SuaReference { sample_size: usize, restarts: usize },
}

impl OracleKind {
    pub fn label(&self) -> String {
        match self {
            OracleKind::ExactLp => "exact-lp".to_string(),
            OracleKind::SuaReference { sample_size, restarts } => {
                format!("sua-reference(S={sample_size},restarts={restarts})")
            }
        }
    }
}

/// Per-cell aggregate of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub sample_size: usize,
    pub repeats: usize,
    pub mean_err: f64,
    pub sd_err: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<ExperimentRecord>,
    pub summaries: Vec<CellSummary>,
    pub oracle: OracleKind,
    pub oracle_value: f64,
}

/// Reference value for relative errors: the exact LP when the instance is
/// oracle-sized, otherwise a best-of-10 high-effort descent at `S = max M_i`.
pub fn reference_value(
    measures: &[DiscreteMeasure],
    p: f64,
    seed: u64,
) -> Result<(f64, OracleKind)> {
    const REFERENCE_RESTARTS: usize = 10;
    if let Ok((_, value)) = exact_barycenter_with_cap(measures, p, None, LP_VARIABLE_CAP) {
        return Ok((value, OracleKind::ExactLp));
    }
    if p != 2.0 {
        return Err(Error::InvalidParameter(format!(
            "no oracle available: LP too large and the descent reference needs p = 2, got {p}"
        )));
    }
    let s_ref = measures.iter().map(|mu| mu.len()).max().unwrap();
    let values: Result<Vec<f64>> = (0..REFERENCE_RESTARTS)
        .into_par_iter()
        .map(|restart| {
            let mut config = SuaConfig::for_measures(measures.len(), s_ref, 0);
            config.seed = derive_seed(seed, &[0x0f, restart as u64]);
            let outcome = randomized_barycenter(
                measures,
                p,
                &config,
                SolverChoice::Sua,
                CombineRule::LinearAverage,
                None,
            )?;
            Ok(outcome.frechet)
        })
        .collect();
    let best = values?.into_iter().fold(f64::INFINITY, f64::min);
    Ok((best, OracleKind::SuaReference { sample_size: s_ref, restarts: REFERENCE_RESTARTS }))
}

/// Full factorial sweep over sample sizes and repeat counts.
///
/// Every `(S, R)` cell runs `repetitions` independent pipeline executions;
/// each record carries the Fréchet value of that execution's combined
/// estimator and its relative error against the shared reference. Tasks
/// get their seeds up front and results are ordered by `(S, R, rep)`, so
/// output is identical for any thread count.
pub fn sweep(
    measures: &[DiscreteMeasure],
    p: f64,
    sample_sizes: &[usize],
    repeat_counts: &[usize],
    repetitions: usize,
    seed: u64,
    solver: SolverChoice,
) -> Result<SweepResult> {
    assert!(repetitions >= 1);
    let (oracle_value, oracle) = reference_value(measures, p, derive_seed(seed, &[0xa11]))?;

    let mut tasks = Vec::new();
    for &s in sample_sizes {
        for &r in repeat_counts {
            for rep in 0..repetitions {
                tasks.push((s, r, rep, derive_seed(seed, &[s as u64, r as u64, rep as u64])));
            }
        }
    }
    let records: Result<Vec<ExperimentRecord>> = tasks
        .par_iter()
        .map(|&(s, r, rep, task_seed)| {
            let start = Instant::now();
            let mut config = SuaConfig::for_measures(measures.len(), s, task_seed);
            config.repeats = r;
            let outcome = randomized_barycenter(
                measures,
                p,
                &config,
                solver,
                CombineRule::LinearAverage,
                Some(oracle_value),
            )?;
            Ok(ExperimentRecord {
                sample_size: s,
                repeats: r,
                rep,
                seed: task_seed,
                frechet: outcome.frechet,
                rel_err: Some((outcome.frechet - oracle_value) / oracle_value),
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect();
    let records = records?;
    if oracle == OracleKind::ExactLp {
        // No estimate may undercut a true optimum beyond solver tolerance.
        for record in &records {
            debug_assert!(
                record.rel_err.unwrap() >= -1e-7,
                "relative error {} below the exact optimum",
                record.rel_err.unwrap()
            );
        }
    }

    let mut summaries = Vec::new();
    for &s in sample_sizes {
        for &r in repeat_counts {
            let errs: Vec<f64> = records
                .iter()
                .filter(|rec| rec.sample_size == s && rec.repeats == r)
                .filter_map(|rec| rec.rel_err)
                .collect();
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let sd = if errs.len() > 1 {
                (errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                    / (errs.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            summaries.push(CellSummary { sample_size: s, repeats: r, mean_err: mean, sd_err: sd });
        }
    }
    Ok(SweepResult { records, summaries, oracle, oracle_value })
}

/// Records CSV: `S,R,rep,seed,frechet,rel_err,runtime_ms`, one row per
/// record. With `include_timings` off the runtime column holds 0 so reruns
/// are byte-identical; real timings stay available on the records.
pub fn records_to_csv(records: &[ExperimentRecord], include_timings: bool) -> String {
    let mut out = String::from("S,R,rep,seed,frechet,rel_err,runtime_ms\n");
    for rec in records {
        let rel = rec.rel_err.map(|e| e.to_string()).unwrap_or_default();
        let runtime = if include_timings { rec.runtime_ms } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rec.sample_size, rec.repeats, rec.rep, rec.seed, rec.frechet, rel, runtime
        );
    }
    out
}

/// Summary CSV: `S,R,mean_err,sd_err`, one row per cell.
pub fn summaries_to_csv(summaries: &[CellSummary]) -> String {
    let mut out = String::from("S,R,mean_err,sd_err\n");
    for cell in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            cell.sample_size, cell.repeats, cell.mean_err, cell.sd_err
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_oracle::exact_barycenter;
    use crate::measures::Points;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_measure(rng: &mut crate::rng::WbRng, len: usize, dim: usize) -> DiscreteMeasure {
        let rows: Vec<Vec<f64>> =
            (0..len).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        let weights: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 0.05).collect();
        DiscreteMeasure::new(Points::from_rows(&rows), weights).unwrap()
    }

    fn random_uniform(rng: &mut crate::rng::WbRng, len: usize, dim: usize) -> DiscreteMeasure {
        let rows: Vec<Vec<f64>> =
            (0..len).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        DiscreteMeasure::uniform(Points::from_rows(&rows)).unwrap()
    }

    #[test]
    fn frechet_of_a_common_measure_is_zero() {
        let mut rng = rng_from_seed(1);
        let mu = random_measure(&mut rng, 4, 2);
        let measures = vec![mu.clone(), mu.clone(), mu.clone()];
        let value = frechet_value(&mu, &measures, 2.0).unwrap();
        assert!(value.abs() <= 1e-12);
    }

    #[test]
    fn frechet_of_the_midpoint_dirac() {
        let a = DiscreteMeasure::dirac(&[0.0]);
        let b = DiscreteMeasure::dirac(&[1.0]);
        let mid = DiscreteMeasure::dirac(&[0.5]);
        let value = frechet_value(&mid, &[a, b], 2.0).unwrap();
        assert!((value - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn frechet_never_beats_the_oracle() {
        let mut rng = rng_from_seed(3);
        let measures: Vec<DiscreteMeasure> =
            (0..3).map(|_| random_measure(&mut rng, 3, 2)).collect();
        let (_, optimum) = exact_barycenter(&measures, 2.0, None).unwrap();
        for _ in 0..5 {
            let candidate = random_measure(&mut rng, 4, 2);
            let value = frechet_value(&candidate, &measures, 2.0).unwrap();
            assert!(value >= optimum - 1e-8);
        }
    }

    #[test]
    fn single_repeat_returns_that_barycenter() {
        let mut rng = rng_from_seed(5);
        let measures: Vec<DiscreteMeasure> =
            (0..3).map(|_| random_uniform(&mut rng, 5, 2)).collect();
        let config = SuaConfig::for_measures(3, 4, 42);
        let outcome = randomized_barycenter(
            &measures,
            2.0,
            &config,
            SolverChoice::Sua,
            CombineRule::LinearAverage,
            None,
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.barycenter.len(), 4);
        assert!((outcome.frechet - outcome.records[0].frechet).abs() <= 1e-12);
    }

    #[test]
    fn sua_solver_rejects_general_exponent() {
        let mut rng = rng_from_seed(6);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_uniform(&mut rng, 3, 2)).collect();
        let config = SuaConfig::for_measures(2, 3, 0);
        let err = randomized_barycenter(
            &measures,
            3.0,
            &config,
            SolverChoice::Sua,
            CombineRule::LinearAverage,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn mixture_support_is_concatenated_and_weighted() {
        let mut rng = rng_from_seed(7);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_uniform(&mut rng, 4, 2)).collect();
        let mut config = SuaConfig::for_measures(2, 3, 9);
        config.repeats = 4;
        let outcome = randomized_barycenter(
            &measures,
            2.0,
            &config,
            SolverChoice::Sua,
            CombineRule::LinearAverage,
            None,
        )
        .unwrap();
        assert_eq!(outcome.barycenter.len(), 3 * 4);
        for &w in outcome.barycenter.weights() {
            assert!((w - 1.0 / 12.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn linear_average_satisfies_convexity() {
        let mut rng = rng_from_seed(11);
        for trial in 0..5 {
            let measures: Vec<DiscreteMeasure> =
                (0..3).map(|_| random_measure(&mut rng, 4, 2)).collect();
            let mut config = SuaConfig::for_measures(3, 3, trial);
            config.repeats = 3;
            let outcome = randomized_barycenter(
                &measures,
                2.0,
                &config,
                SolverChoice::Sua,
                CombineRule::LinearAverage,
                None,
            )
            .unwrap();
            let mean: f64 = outcome.records.iter().map(|r| r.frechet).sum::<f64>() / 3.0;
            assert!(
                outcome.frechet <= mean + 1e-9,
                "trial {trial}: mixture {} vs mean {mean}",
                outcome.frechet
            );
        }
    }

    #[test]
    fn exact_solver_nails_tiny_instances() {
        // S = M = all mass points distinct with uniform parents: exact
        // empirical solves recover near-optimal values as S covers the data.
        let a = DiscreteMeasure::dirac(&[0.0]);
        let b = DiscreteMeasure::dirac(&[1.0]);
        let config = SuaConfig::for_measures(2, 4, 3);
        let outcome = randomized_barycenter(
            &[a, b],
            2.0,
            &config,
            SolverChoice::Exact,
            CombineRule::LinearAverage,
            None,
        )
        .unwrap();
        // Point masses resample to themselves: the answer is exact.
        assert!((outcome.frechet - 0.25).abs() <= 1e-9);
    }

    #[test]
    fn mean_error_decays_with_sample_size() {
        let mut rng = rng_from_seed(13);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_measure(&mut rng, 4, 1)).collect();
        let (_, f_star) = exact_barycenter(&measures, 2.0, None).unwrap();
        let mean_gap = |s: usize| -> f64 {
            let runs = 24;
            let total: f64 = (0..runs)
                .map(|run| {
                    let config = SuaConfig::for_measures(2, s, derive_seed(17, &[run, s as u64]));
                    let outcome = randomized_barycenter(
                        &measures,
                        2.0,
                        &config,
                        SolverChoice::Sua,
                        CombineRule::LinearAverage,
                        Some(f_star),
                    )
                    .unwrap();
                    outcome.frechet - f_star
                })
                .sum();
            total / runs as f64
        };
        let coarse = mean_gap(4);
        let fine = mean_gap(64);
        assert!(
            fine < coarse,
            "error should shrink with S: S=4 gives {coarse}, S=64 gives {fine}"
        );
    }

    #[test]
    fn best_of_r_picks_the_minimum() {
        let mut rng = rng_from_seed(19);
        let measures: Vec<DiscreteMeasure> =
            (0..3).map(|_| random_uniform(&mut rng, 4, 2)).collect();
        let mut config = SuaConfig::for_measures(3, 3, 5);
        config.repeats = 3;
        let best = randomized_barycenter(
            &measures,
            2.0,
            &config,
            SolverChoice::Sua,
            CombineRule::BestOfR,
            None,
        )
        .unwrap();
        let minimum =
            best.records.iter().map(|r| r.frechet).fold(f64::INFINITY, f64::min);
        assert!((best.frechet - minimum).abs() <= 1e-12);
    }

    #[test]
    fn sweep_emits_full_factorial_ordered_records() {
        let mut rng = rng_from_seed(23);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_uniform(&mut rng, 4, 2)).collect();
        let result = sweep(&measures, 2.0, &[2, 4], &[1, 2], 3, 99, SolverChoice::Sua).unwrap();
        assert_eq!(result.records.len(), 2 * 2 * 3);
        assert_eq!(result.summaries.len(), 4);
        // Ordered by (S, R, rep).
        let keys: Vec<(usize, usize, usize)> =
            result.records.iter().map(|r| (r.sample_size, r.repeats, r.rep)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(result.oracle, OracleKind::ExactLp);
    }

    #[test]
    fn single_cell_single_repetition_gives_one_record() {
        let mut rng = rng_from_seed(31);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_uniform(&mut rng, 3, 2)).collect();
        let result = sweep(&measures, 2.0, &[3], &[1], 1, 5, SolverChoice::Sua).unwrap();
        assert_eq!(result.records.len(), 1);
        assert_eq!(result.summaries.len(), 1);
        assert_eq!(result.summaries[0].sd_err, 0.0);
    }

    #[test]
    fn sweep_records_are_thread_count_invariant() {
        let mut rng = rng_from_seed(29);
        let measures: Vec<DiscreteMeasure> =
            (0..2).map(|_| random_uniform(&mut rng, 3, 2)).collect();
        let run = |threads: usize| {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                sweep(&measures, 2.0, &[2, 3], &[1], 2, 7, SolverChoice::Sua).unwrap()
            })
        };
        let one = run(1);
        let four = run(4);
        let strip = |records: &[ExperimentRecord]| -> Vec<ExperimentRecord> {
            records.iter().map(|r| ExperimentRecord { runtime_ms: 0.0, ..r.clone() }).collect()
        };
        assert_eq!(strip(&one.records), strip(&four.records));
        assert_eq!(one.summaries, four.summaries);
        assert_eq!(records_to_csv(&one.records, false), records_to_csv(&four.records, false));
    }

    #[test]
    fn csv_headers_match_the_interface() {
        let records = vec![ExperimentRecord {
            sample_size: 4,
            repeats: 1,
            rep: 0,
            seed: 7,
            frechet: 0.125,
            rel_err: Some(0.5),
            runtime_ms: 3.25,
        }];
        let csv = records_to_csv(&records, false);
        assert!(csv.starts_with("S,R,rep,seed,frechet,rel_err,runtime_ms\n"));
        assert!(csv.contains("4,1,0,7,0.125,0.5,0"));
        let timed = records_to_csv(&records, true);
        assert!(timed.contains("3.25"));
        let summary = summaries_to_csv(&[CellSummary {
            sample_size: 4,
            repeats: 1,
            mean_err: 0.5,
            sd_err: 0.1,
        }]);
        assert!(summary.starts_with("S,R,mean_err,sd_err\n"));
    }
}
