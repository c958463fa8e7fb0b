use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cwikel_core::covering::build_equal_j_covering;
use cwikel_core::inversion::{counterexample_growth, inversion_v};
use cwikel_core::orlicz::{decreasing_rearrangement, llogl_norm};
use cwikel_core::spectral::{assemble_cwikel, singular_values};
use cwikel_core::{Domain, Profile, SampledFunction};

fn power(dim: usize, resolution: usize) -> SampledFunction {
    Profile::Power { exponent: 0.5 }.sample(dim, Domain::Torus, resolution).unwrap()
}

fn orlicz(c: &mut Criterion) {
    let mut group = c.benchmark_group("llogl_norm");
    for r in [1024usize, 16384] {
        let mu = decreasing_rearrangement(&power(1, r));
        group.bench_with_input(BenchmarkId::from_parameter(r), &mu, |b, mu| b.iter(|| llogl_norm(black_box(mu))));
    }
    group.finish();
}

fn covering(c: &mut Criterion) {
    let f = power(2, 64);
    let mut group = c.benchmark_group("equal_j_covering");
    group.sample_size(10);
    for n in [4usize, 16, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| build_equal_j_covering(black_box(&f), n, 1e-3).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("cwikel_spectrum");
    group.sample_size(10);
    for (dim, cutoff, r) in [(1usize, 64usize, 1024usize), (1, 256, 2048), (2, 10, 128)] {
        let f = power(dim, r);
        group.bench_function(format!("d{dim}_N{cutoff}"), |b| {
            b.iter(|| singular_values(&assemble_cwikel(black_box(&f), cutoff).unwrap()))
        });
    }
    group.finish();
}

fn inversion(c: &mut Criterion) {
    let f = Profile::Shell { r_in: 1.5, r_out: 3.0 }.sample(2, Domain::Box { half_width: 4.0 }, 256).unwrap();
    let mut group = c.benchmark_group("inversion");
    group.sample_size(10);
    group.bench_function("v_d2_256", |b| b.iter(|| inversion_v(black_box(&f)).unwrap()));
    group.bench_function("growth_d1", |b| b.iter(|| counterexample_growth(&[2, 4, 8, 16], 1, 48, 2048).unwrap()));
    group.finish();
}

criterion_group!(benches, orlicz, covering, spectrum, inversion);
criterion_main!(benches);
