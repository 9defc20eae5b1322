use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hoc_bench::dense_tensor;
use hoc_core::linalg::{jacobi_eigenvalues, symmetric_eigenvalues};
use hoc_core::rmt::{random_symmetric, sample_ensemble, WignerEnsemble};
use hoc_core::rng::stream_rng;
use hoc_core::tensor::{certified_op_norm, iterative_op_norm};
use hoc_core::{Distribution, MeasureSpec, OpNormOptions, PolyFunction};

fn op_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("op_norm");
    let opts = OpNormOptions::default();
    for (dim, order) in [(3, 3), (5, 3), (10, 3), (3, 4)] {
        let t = dense_tensor(dim, order);
        g.bench_with_input(BenchmarkId::new("iterative", format!("n{dim}_d{order}")), &t, |b, t| {
            b.iter(|| iterative_op_norm(black_box(t), &opts))
        });
    }
    let t = dense_tensor(3, 3);
    g.sample_size(10);
    g.bench_function("certified/n3_d3", |b| b.iter(|| certified_op_norm(black_box(&t)).unwrap()));
    g.finish();
}

fn eigensolvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenvalues");
    for n in [16, 64, 200] {
        let a = random_symmetric(n, &mut stream_rng(1, n as u64));
        g.bench_with_input(BenchmarkId::new("householder_ql", n), &a, |b, a| {
            b.iter(|| symmetric_eigenvalues(black_box(a), n).unwrap())
        });
        if n <= 64 {
            g.bench_with_input(BenchmarkId::new("jacobi", n), &a, |b, a| {
                b.iter(|| jacobi_eigenvalues(black_box(a), n).unwrap())
            });
        }
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    g.sample_size(10);
    let mu = MeasureSpec::iid(Distribution::unit_laplace(), 10);
    g.bench_function("laplace_n10_m100k", |b| b.iter(|| mu.sample(black_box(100_000), 7)));
    let ens = WignerEnsemble::new(100, Distribution::standard_gaussian()).unwrap();
    g.bench_function("wigner_n100_m50", |b| b.iter(|| sample_ensemble(&ens, black_box(50), 7).unwrap()));
    g.finish();
}

fn derivatives(c: &mut Criterion) {
    let mut g = c.benchmark_group("derivative_tensor");
    let x = PolyFunction::random_point(5, 1.0, &mut stream_rng(3, 0));
    let f = PolyFunction::random_dense(5, 4, 11);
    for k in 1..=4 {
        g.bench_with_input(BenchmarkId::new("quartic_n5", k), &k, |b, &k| {
            b.iter(|| f.derivative_tensor(k, black_box(&x)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, op_norm, eigensolvers, sampling, derivatives);
criterion_main!(benches);
