use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use unitroot_bench::sample;
use unitroot_core::bic::bic_test_fit;
use unitroot_core::df::build_null_table;
use unitroot_core::fit_ar1;
use unitroot_core::posterior::{tail_prob_ge_one, PriorKind};
use unitroot_core::svd::{svd_data_driven_fit, svd_fixed_fit};

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_ar1");
    for t in [100, 1000, 10_000] {
        let series = sample(0.9, t);
        group.bench_with_input(BenchmarkId::from_parameter(t), &series, |b, s| {
            b.iter(|| fit_ar1(black_box(s)))
        });
    }
    group.finish();
}

fn evidence(c: &mut Criterion) {
    let fitted = fit_ar1(&sample(0.95, 500)).unwrap();
    c.bench_function("bic", |b| b.iter(|| bic_test_fit(black_box(&fitted), 1.0)));
    c.bench_function("svd_fixed", |b| b.iter(|| svd_fixed_fit(black_box(&fitted), -1.0, 1.0)));
    c.bench_function("svd_data_driven", |b| {
        b.iter(|| svd_data_driven_fit(black_box(&fitted), 0.05))
    });
}

fn tail_probability(c: &mut Criterion) {
    let mut group = c.benchmark_group("tail_prob_ge_one");
    for t in [50, 200, 1000] {
        let fitted = fit_ar1(&sample(0.95, t)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(t), &fitted, |b, f| {
            b.iter(|| tail_prob_ge_one(black_box(f), PriorKind::Jeffreys))
        });
    }
    group.finish();
}

fn null_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_null_table");
    group.sample_size(10);
    group.bench_function("T100_r10000", |b| {
        b.iter(|| build_null_table(100, 10_000, black_box(7)))
    });
    group.finish();
}

criterion_group!(benches, fit, evidence, tail_probability, null_table);
criterion_main!(benches);
