//! Parallel vs single-thread comparison of the data-parallel kernels: each
//! benchmark runs once on the default rayon pool and once inside a pool
//! capped at one thread (the sequential baseline; the `parallel` feature off
//! follows the same code path over the same reduction chunks).
//!
//! Run with `cargo bench -p cyclab-core`.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cyclab_core::gauss::{gaussian_weighted_sup_approx, GridFn};
use cyclab_core::generators;
use cyclab_core::measure::MERGE_TOL;
use cyclab_core::poly::{build_ortho_basis, density_profile};
use cyclab_core::rohlin::rohlin_decompose;
use cyclab_core::Norm;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
        (
            "single-thread",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
    ]
}

fn bench_ortho_basis(c: &mut Criterion) {
    let mu = generators::disc_quadrature(1.0 / 64.0, true).unwrap();
    let mut group = c.benchmark_group("ortho_basis_disc64_deg24");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mu, |b, mu| {
            b.iter(|| pool.install(|| build_ortho_basis(mu, 24).unwrap().rank()))
        });
    }
    group.finish();
}

fn bench_sup_profile(c: &mut Criterion) {
    let mu = generators::circle_nodes(1024).unwrap();
    let target = mu.conj_coordinate();
    let degrees: Vec<usize> = vec![8, 16, 24, 32];
    let mut group = c.benchmark_group("sup_profile_circle1024");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &degrees, |b, degrees| {
            b.iter(|| {
                pool.install(|| {
                    density_profile(&mu, &target, Norm::Sup, degrees, None)
                        .unwrap()
                        .len()
                })
            })
        });
    }
    group.finish();
}

fn bench_gauss_fit(c: &mut Criterion) {
    let target = GridFn::sample(2, 3.0, 0.15, |x| {
        (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()).max(0.0)
    })
    .unwrap();
    let degrees: Vec<usize> = vec![12];
    let mut group = c.benchmark_group("gauss_fit_hat_deg12");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &degrees, |b, degrees| {
            b.iter(|| {
                pool.install(|| {
                    gaussian_weighted_sup_approx(&target, 2.0, degrees, 20)
                        .unwrap()
                        .sup_error
                })
            })
        });
    }
    group.finish();
}

fn bench_rohlin(c: &mut Criterion) {
    let mu = generators::random_box(20000, (-1.0, 1.0), (-1.0, 1.0), 3).unwrap();
    let phi = mu.sample_with(|z| {
        num_complex::Complex64::new((z.re * 8.0).round() / 8.0, (z.im * 8.0).round() / 8.0)
    });
    let mut group = c.benchmark_group("rohlin_decompose_20000");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &phi, |b, phi| {
            b.iter(|| pool.install(|| rohlin_decompose(&mu, phi, MERGE_TOL).unwrap().n_layers()))
        });
    }
    group.finish();
}

fn configured() -> Criterion {
    Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2))
        .sample_size(10)
}

criterion_group! {
    name = benches;
    config = configured();
    targets = bench_ortho_basis, bench_sup_profile, bench_gauss_fit, bench_rohlin
}
criterion_main!(benches);
