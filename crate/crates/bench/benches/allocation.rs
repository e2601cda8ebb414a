use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use edgealloc_bench::{fixtures, reference};
use edgealloc_core::{
    brute_force, build_envelope, run_sweep, solve, GridSpec, OracleOptions, SweepSpec, SweptParam,
};

fn envelope(c: &mut Criterion) {
    let mut group = c.benchmark_group("envelope");
    for (i, inst) in fixtures(4).iter().enumerate() {
        group.bench_with_input(BenchmarkId::new("build", i), inst, |b, inst| {
            b.iter(|| build_envelope(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let inst = reference();
    group.bench_function("reference", |b| b.iter(|| solve(black_box(&inst)).unwrap()));
    for (i, inst) in fixtures(4).iter().enumerate() {
        group.bench_with_input(BenchmarkId::new("random", i), inst, |b, inst| {
            b.iter(|| solve(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let inst = &fixtures(1)[0];
    for n in [100usize, 400] {
        let grid = GridSpec::new(n, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| brute_force(inst, *grid, &OracleOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let inst = reference();
    let spec = SweepSpec::range(SweptParam::Bandwidth, 1e5, 4e7, 20, true, vec![]).unwrap();
    c.bench_function("sweep/bandwidth_20", |b| {
        b.iter(|| run_sweep(black_box(&inst), &spec).unwrap())
    });
}

criterion_group!(benches, envelope, solver, oracle, sweep);
criterion_main!(benches);
