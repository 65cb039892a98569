use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use wb_bench::{measure, rng, uniform};
use wb_core::bounds::constant_e;
use wb_core::measures::sample_empirical;
use wb_core::pipeline::{frechet_value, randomized_barycenter, CombineRule, SolverChoice};
use wb_core::sua::{sua_solve, SuaConfig};

fn bench_sampling(c: &mut Criterion) {
    let mut rng = rng(10);
    let mu = measure(&mut rng, 256, 2);
    c.bench_function("sample_empirical_s1000", |b| {
        b.iter(|| sample_empirical(black_box(&mu), 1000, 7))
    });
}

fn bench_sua(c: &mut Criterion) {
    let mut rng = rng(11);
    let measures: Vec<_> = (0..4).map(|_| uniform(&mut rng, 32, 2)).collect();
    let config = SuaConfig::for_measures(4, 32, 5);
    c.bench_function("sua_solve_n4_m32", |b| {
        b.iter(|| sua_solve(black_box(&measures), &config).unwrap())
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let mut rng = rng(12);
    let measures: Vec<_> = (0..4).map(|_| measure(&mut rng, 64, 2)).collect();
    let config = SuaConfig::for_measures(4, 16, 5);
    c.bench_function("randomized_barycenter_s16_r1", |b| {
        b.iter(|| {
            randomized_barycenter(
                black_box(&measures),
                2.0,
                &config,
                SolverChoice::Sua,
                CombineRule::LinearAverage,
                None,
            )
            .unwrap()
        })
    });
}

fn bench_frechet(c: &mut Criterion) {
    let mut rng = rng(13);
    let measures: Vec<_> = (0..4).map(|_| measure(&mut rng, 64, 2)).collect();
    let candidate = uniform(&mut rng, 32, 2);
    c.bench_function("frechet_value_n4_m64_s32", |b| {
        b.iter(|| frechet_value(black_box(&candidate), black_box(&measures), 2.0).unwrap())
    });
}

fn bench_constant_e(c: &mut Criterion) {
    let mut rng = rng(14);
    let mu = measure(&mut rng, 100, 2);
    c.bench_function("constant_e_100pts", |b| {
        b.iter(|| constant_e(black_box(mu.points()), 1.0))
    });
}

criterion_group!(
    pipeline,
    bench_sampling,
    bench_sua,
    bench_pipeline,
    bench_frechet,
    bench_constant_e
);
criterion_main!(pipeline);
