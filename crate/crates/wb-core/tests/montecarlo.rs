//! Monte Carlo checks of the expectation bounds and the repeats trade-off.
//!
//! These sample the actual estimators and compare against the closed-form
//! bounds; everything is seeded, so outcomes are reproducible.

use rand::Rng;
use rayon::prelude::*;

use wb_core::bounds::{constant_e, frechet_gap_bound, EMethod};
use wb_core::datasets::{generate, DatasetSpec, Family};
use wb_core::lp_oracle::exact_barycenter;
use wb_core::measures::{diameter, sample_empirical, Points};
use wb_core::ot::solve_ot;
use wb_core::pipeline::{frechet_value, sweep, SolverChoice};
use wb_core::rng::{derive_seed, rng_from_seed};
use wb_core::DiscreteMeasure;

#[test]
fn empirical_transport_bound_dominates_monte_carlo_mean() {
    // E[W_p^p(μ, μ^S)] ≤ diam^p · ℰ(supp μ, p) / √S, sampled over 1000
    // resamples for several (p, S).
    let mut rng = rng_from_seed(21);
    let rows: Vec<Vec<f64>> =
        (0..5).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let weights: Vec<f64> = (0..5).map(|_| rng.random::<f64>() + 0.1).collect();
    let mu = DiscreteMeasure::new(Points::from_rows(&rows), weights).unwrap();
    let diam = diameter(mu.points());
    for p in [1.0, 2.0] {
        let e_constant = constant_e(mu.points(), p).value;
        for s in [4usize, 16] {
            let mean: f64 = (0..1000u64)
                .into_par_iter()
                .map(|rep| {
                    let emp = sample_empirical(&mu, s, derive_seed(22, &[p as u64, s as u64, rep]));
                    solve_ot(&mu, emp.measure(), p).unwrap().1
                })
                .sum::<f64>()
                / 1000.0;
            let bound = diam.powf(p) * e_constant / (s as f64).sqrt();
            assert!(
                mean <= bound,
                "p={p} S={s}: Monte Carlo mean {mean} above the bound {bound}"
            );
        }
    }
}

#[test]
fn frechet_gap_bound_dominates_monte_carlo_gap() {
    // E[|F(μ*) − F(μ̂*_S)|] ≤ the gap bound, with the empirical barycenter
    // solved exactly per resample.
    let mut rng = rng_from_seed(31);
    let measures: Vec<DiscreteMeasure> = (0..2)
        .map(|_| {
            let rows: Vec<Vec<f64>> = (0..3).map(|_| vec![rng.random::<f64>()]).collect();
            let weights: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.1).collect();
            DiscreteMeasure::new(Points::from_rows(&rows), weights).unwrap()
        })
        .collect();
    let (_, f_star) = exact_barycenter(&measures, 2.0, None).unwrap();
    for s in [4usize, 8] {
        let mean_gap: f64 = (0..200u64)
            .into_par_iter()
            .map(|rep| {
                let empiricals: Vec<DiscreteMeasure> = measures
                    .iter()
                    .enumerate()
                    .map(|(i, mu)| {
                        sample_empirical(mu, s, derive_seed(32, &[s as u64, rep, i as u64]))
                            .into_measure()
                    })
                    .collect();
                let (bary, _) = exact_barycenter(&empiricals, 2.0, None).unwrap();
                (frechet_value(&bary, &measures, 2.0).unwrap() - f_star).abs()
            })
            .sum::<f64>()
            / 200.0;
        let bound = frechet_gap_bound(&measures, 2.0, &[s, s], EMethod::Combinatorial);
        assert!(
            mean_gap <= bound,
            "S={s}: Monte Carlo gap {mean_gap} above the bound {bound}"
        );
    }
}

#[test]
fn linear_average_beats_best_of_repeats_in_the_mean() {
    // Combining rule comparison at fixed (S, R): the mixture's Fréchet
    // value is below the best single repeat's, on average — the larger
    // concatenated support pays off.
    use wb_core::pipeline::{randomized_barycenter, CombineRule};
    use wb_core::sua::SuaConfig;
    let spec = DatasetSpec::new(Family::MultiNestedEllipses, 8, 36, 77);
    let measures = generate(&spec).unwrap();
    let outcomes: Vec<(f64, f64)> = (0..40u64)
        .into_par_iter()
        .map(|rep| {
            let mut config = SuaConfig::for_measures(8, 9, derive_seed(78, &[rep]));
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
            let best = outcome
                .records
                .iter()
                .map(|record| record.frechet)
                .fold(f64::INFINITY, f64::min);
            (outcome.frechet, best)
        })
        .collect();
    let mean_mixture: f64 = outcomes.iter().map(|o| o.0).sum::<f64>() / 40.0;
    let mean_best: f64 = outcomes.iter().map(|o| o.1).sum::<f64>() / 40.0;
    assert!(
        mean_mixture < mean_best,
        "mixture mean {mean_mixture} should beat best-of-R mean {mean_best}"
    );
}

#[test]
fn fixed_budget_prefers_larger_sample_over_more_repeats() {
    // Equal budget S·R = 32 on the multi-nested-ellipse family: one repeat
    // at S=32 beats four repeats at S=8 in mean relative error.
    let spec = DatasetSpec::new(Family::MultiNestedEllipses, 6, 32, 55);
    let measures = generate(&spec).unwrap();
    let result = sweep(&measures, 2.0, &[8, 32], &[1, 4], 30, 56, SolverChoice::Sua).unwrap();
    let cell = |s: usize, r: usize| -> f64 {
        result
            .summaries
            .iter()
            .find(|c| c.sample_size == s && c.repeats == r)
            .unwrap()
            .mean_err
    };
    let large_s = cell(32, 1);
    let many_r = cell(8, 4);
    assert!(
        large_s < many_r,
        "S=32,R=1 gave {large_s}; S=8,R=4 gave {many_r}: expected the former to win"
    );
}
