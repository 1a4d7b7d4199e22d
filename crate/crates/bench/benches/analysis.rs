use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use finmetric::{
    embed_euclidean, generalized_roundness, make_lbk, random_ultrametric,
    roundness_exponent_check, roundness_profile, GrOptions, ProfileOptions,
};
use finmetric_bench::uniform_metric;

fn bench_generalized_roundness(c: &mut Criterion) {
    let mut group = c.benchmark_group("generalized_roundness");
    for k in [2usize, 8, 16] {
        let space = make_lbk(3.0, k).unwrap();
        group.bench_with_input(BenchmarkId::new("star_leaf", k + 1), &space, |b, x| {
            b.iter(|| generalized_roundness(black_box(x), &GrOptions::default()).unwrap())
        });
    }
    for n in [8usize, 16] {
        let space = uniform_metric(n, 42);
        group.bench_with_input(BenchmarkId::new("uniform", n), &space, |b, x| {
            b.iter(|| generalized_roundness(black_box(x), &GrOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify");
    for n in [8usize, 16, 32] {
        let space = random_ultrametric(n, 7, None);
        group.bench_with_input(BenchmarkId::new("ultrametric", n), &space, |b, x| {
            b.iter(|| black_box(x).classify(None))
        });
    }
    group.finish();
}

fn bench_embed(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed");
    for n in [8usize, 16, 32] {
        let space = random_ultrametric(n, 3, None);
        group.bench_with_input(BenchmarkId::new("ultrametric", n), &space, |b, x| {
            b.iter(|| embed_euclidean(black_box(x), 2.0, 0, None).unwrap())
        });
    }
    group.finish();
}

fn bench_roundness(c: &mut Criterion) {
    let mut group = c.benchmark_group("roundness");
    let space = uniform_metric(10, 5);
    group.bench_function("check_10pts", |b| {
        b.iter(|| roundness_exponent_check(black_box(&space), 1.5, None))
    });
    let small = uniform_metric(7, 5);
    group.bench_function("profile_7pts", |b| {
        b.iter(|| roundness_profile(black_box(&small), &ProfileOptions::default()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_generalized_roundness,
    bench_classify,
    bench_embed,
    bench_roundness
);
criterion_main!(benches);
