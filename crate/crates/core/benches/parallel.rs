//! Sequential vs data-parallel execution for graph construction and for a
//! batch of merge-vs-rebuild checks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wgmerge::boss::build_boss_with;
use wgmerge::oracle;
use wgmerge::{merge, Exec, Sym};

fn random_strings(seed: u64, count: usize, len: usize) -> Vec<Vec<Sym>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..len).map(|_| rng.gen_range(1..=4) as Sym).collect()).collect()
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    for total in [50_000usize, 200_000] {
        let strings = random_strings(7, total / 1000, 1000);
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), total), &strings, |b, s| {
                b.iter(|| build_boss_with(s, 16, 4, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn verify_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<_> = (0..64).map(|_| oracle::random_collection_pair(&mut rng)).collect();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| {
                exec.map(cases.clone(), |(c0, c1, k, sigma)| {
                    let g0 = build_boss_with(&c0, k, sigma, Exec::Sequential).unwrap();
                    let g1 = build_boss_with(&c1, k, sigma, Exec::Sequential).unwrap();
                    let all: Vec<Vec<Sym>> = c0.into_iter().chain(c1).collect();
                    merge(&g0, &g1).unwrap().0 == oracle::naive_boss(&all, k, sigma).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, build, verify_batch);
criterion_main!(benches);
