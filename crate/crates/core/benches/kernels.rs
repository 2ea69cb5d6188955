//! Mollification, fraction solve and one map evaluation, each on a
//! single-thread pool and on the full pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nanoflux_core::driver::apply_g;
use nanoflux_core::regularization::{build_kernel, mollify};
use nanoflux_core::subproblems::{solve_phi, Context, SolverState};
use nanoflux_core::{CellField, ModelParams, UniformGrid};
use rayon::ThreadPool;

fn pools() -> Vec<(usize, ThreadPool)> {
    let full = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1, full];
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| (n, rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
        .collect()
}

fn bench_mollify(c: &mut Criterion) {
    let mut group = c.benchmark_group("mollify");
    let grid = UniformGrid::unit_square(128).unwrap();
    let field = CellField::from_fn(&grid, |x, y| (7.0 * x).sin() * (5.0 * y).cos());
    let kernel = build_kernel(0.1, &grid).unwrap();
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("128^2 eps 0.1", threads), &threads, |b, _| {
            pool.install(|| b.iter(|| mollify(&field, &kernel).unwrap()))
        });
    }
    group.finish();
}

fn small_data(n: usize) -> (Context, SolverState, ModelParams) {
    let grid = UniformGrid::unit_square(n).unwrap();
    let params = ModelParams::small_data(&grid);
    let ctx = Context::new(&grid, 0.25).unwrap();
    let state = SolverState::initial(&grid, &params, 0.25).unwrap();
    (ctx, state, params)
}

fn bench_fraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("fraction_solve");
    group.sample_size(20);
    let (ctx, state, params) = small_data(64);
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("64^2", threads), &threads, |b, _| {
            pool.install(|| b.iter(|| solve_phi(&ctx, &state, &params).unwrap()))
        });
    }
    group.finish();
}

fn bench_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("map");
    group.sample_size(10);
    let (ctx, state, params) = small_data(64);
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("64^2", threads), &threads, |b, _| {
            pool.install(|| b.iter(|| apply_g(&ctx, &state, &params).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mollify, bench_fraction, bench_map);
criterion_main!(benches);
