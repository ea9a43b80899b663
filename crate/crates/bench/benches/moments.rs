use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wmm_core::central::central_moment;
use wmm_core::moments::{norm_moment, NormMethod};
use wmm_core::oracles::letac::letac_matrix;
use wmm_core::oracles::monte_carlo::{monte_carlo_moment, McConfig};
use wmm_core::scalar::int;
use wmm_core::trace_algebra::{ContextOptions, CovarianceContext};
use wmm_core::{Limits, Matrix, MomentEngine};

fn recursion_vs_permutations(c: &mut Criterion) {
    let lim = Limits::default();
    let mut g = c.benchmark_group("moment");
    for v in [vec![0u32, 1, 0, 2], vec![0, 0, 0, 0, 0, 0, 0, 1]] {
        let id = format!("{v:?}");
        g.bench_with_input(BenchmarkId::new("recursion", &id), &v, |b, v| {
            b.iter(|| {
                MomentEngine::new(lim)
                    .moment_recursive(black_box(v))
                    .unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("permutations", &id), &v, |b, v| {
            b.iter(|| letac_matrix(black_box(v), &lim).unwrap())
        });
    }
    g.finish();
}

fn norm_moments(c: &mut Criterion) {
    let lim = Limits::default();
    let mut g = c.benchmark_group("norm_moment_8");
    for m in [
        NormMethod::Recursion,
        NormMethod::Bell,
        NormMethod::Permutation,
    ] {
        g.bench_function(format!("{m:?}"), |b| {
            b.iter(|| norm_moment(black_box(8), m, &lim).unwrap())
        });
    }
    g.finish();
}

fn central(c: &mut Criterion) {
    c.bench_function("central_moment_8", |b| {
        b.iter(|| central_moment(&mut MomentEngine::new(Limits::default()), black_box(8)).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let p = Matrix::diag(&[int(1), int(2)]);
    let ctx = CovarianceContext::exact(p, ContextOptions::default())
        .unwrap()
        .to_float();
    let cfg = McConfig {
        samples: 100_000,
        ..Default::default()
    };
    c.bench_function("mc_100k_(0,0,1)", |b| {
        b.iter(|| monte_carlo_moment(&ctx, black_box(&[0, 0, 1]), &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    recursion_vs_permutations,
    norm_moments,
    central,
    monte_carlo
);
criterion_main!(benches);
