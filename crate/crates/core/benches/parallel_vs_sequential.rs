use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use slp_core::gen::random_sign_matrix;
use slp_core::par::with_threads;
use slp_core::primes::trial_rng;
use slp_core::reductions::{perm_to_zmc, permanent, SignMatrix};
use slp_core::selftest::{run_criterion, Level};
use slp_core::zmc::zmc_randomized;
use slp_core::{Budget, PrimeSampler};

// 0 is the full pool; with the `parallel` feature off both rows run sequentially
const THREADS: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn matrix(n: usize) -> SignMatrix {
    random_sign_matrix(&mut trial_rng(42, n as u64), n)
}

fn zmc_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("zmc_randomized");
    group.sample_size(10);
    let a = matrix(4);
    let per = permanent(&a).unwrap();
    let (q, m) = perm_to_zmc(&a, &BigInt::from(per)).unwrap();
    let sampler = PrimeSampler::new(7);
    let budget = Budget::default();
    for (name, threads) in THREADS {
        group.bench_with_input(BenchmarkId::new(name, 256), &threads, |b, &t| {
            b.iter(|| with_threads(t, || zmc_randomized(&q, &m, 256, &sampler, &budget).unwrap()))
        });
    }
    group.finish();
}

fn ryser(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    let a = matrix(12);
    for (name, threads) in THREADS {
        group.bench_with_input(BenchmarkId::new(name, 12), &threads, |b, &t| {
            b.iter(|| with_threads(t, || permanent(&a).unwrap()))
        });
    }
    group.finish();
}

fn determinant_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("selftest_determinant");
    group.sample_size(10);
    for (name, threads) in THREADS {
        group.bench_with_input(BenchmarkId::new(name, "small"), &threads, |b, &t| {
            b.iter(|| with_threads(t, || run_criterion(9, Level::Small, 1)))
        });
    }
    group.finish();
}

criterion_group!(benches, zmc_trials, ryser, determinant_suite);
criterion_main!(benches);
