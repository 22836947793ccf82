use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hiw_bench::theta_delta;
use hiw_core::modarith::{salie_closed, salie_direct};
use hiw_core::progsums::progression_e;
use hiw_core::qseries::{eta_expansion, multiply};
use hiw_core::voronoi::BKernel;
use hiw_core::{PrimeCtx, Window};
use std::hint::black_box;

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    g.sample_size(10);
    for n in [10_000u64, 100_000] {
        let eta = eta_expansion(n).unwrap();
        g.bench_with_input(BenchmarkId::new("eta_squared", n), &n, |b, &n| {
            b.iter(|| multiply(&eta, &eta, n).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("theta_delta", n), &n, |b, &n| {
            b.iter(|| theta_delta(n))
        });
    }
    g.finish();
}

fn bucketing(c: &mut Criterion) {
    let f = theta_delta(1_000_000);
    let w = Window::standard_bump();
    let mut g = c.benchmark_group("progression_e");
    g.sample_size(10);
    for (x, p) in [(1e5, 563u64), (1e6, 1997)] {
        g.bench_with_input(
            BenchmarkId::from_parameter(x as u64),
            &(x, p),
            |b, &(x, p)| b.iter(|| progression_e(f.view(), &w, x, p).unwrap()),
        );
    }
    g.finish();
}

fn salie(c: &mut Criterion) {
    let ctx = PrimeCtx::new(1009).unwrap();
    let mut g = c.benchmark_group("salie");
    g.bench_function("direct", |b| {
        b.iter(|| salie_direct(black_box(17), black_box(23), &ctx))
    });
    g.bench_function("closed", |b| {
        b.iter(|| salie_closed(black_box(17), black_box(23), &ctx).unwrap())
    });
    g.finish();
}

fn kernel(c: &mut Criterion) {
    let w = Window::standard_bump();
    let mut g = c.benchmark_group("b_kernel");
    g.sample_size(10);
    g.bench_function("build", |b| b.iter(|| BKernel::new(&w, 12).unwrap()));
    let k = BKernel::new(&w, 12).unwrap();
    g.bench_function("eval", |b| b.iter(|| k.eval(black_box(0.37))));
    g.finish();
}

criterion_group!(benches, series, bucketing, salie, kernel);
criterion_main!(benches);
