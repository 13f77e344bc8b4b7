use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vdw_core::ap::{self, Coloring};
use vdw_core::lll::{self, ElParams};
use vdw_core::oracle::{self, SearchBudget};
use vdw_core::primes;

fn random_coloring(r: u32, n: usize, seed: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Coloring::new(r, (0..n).map(|_| rng.gen_range(1..=r)).collect()).unwrap()
}

fn verifier(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_mono_kap");
    group.sample_size(10);
    for (r, n) in [(4u32, 3_276usize), (5, 24_414), (6, 125_971)] {
        let coloring = lll::sample_mono_free(&ElParams::certified(r, 10, 0).unwrap())
            .unwrap()
            .success()
            .unwrap()
            .coloring;
        assert_eq!(coloring.len(), n);
        group.bench_with_input(BenchmarkId::new("mono_free_k10", n), &coloring, |b, col| {
            b.iter(|| ap::find_mono_kap(black_box(col), 10).unwrap())
        });
    }
    let col = random_coloring(8, 20_000, 1);
    group.bench_function("rainbow_k5_n20000", |b| {
        b.iter(|| ap::find_rainbow_kap(black_box(&col), 5).unwrap())
    });
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_w");
    group.sample_size(10);
    for (r, k) in [(2u32, 3usize), (2, 4), (3, 3)] {
        group.bench_function(format!("W({r},{k})"), |b| {
            b.iter(|| oracle::exact_w(r, k, SearchBudget::default()).unwrap())
        });
    }
    group.finish();
}

fn sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_mono_free");
    group.sample_size(10);
    for r in [4u32, 5] {
        let params = ElParams::certified(r, 10, 7).unwrap();
        group.bench_function(format!("k10_r{r}"), |b| {
            b.iter(|| lll::sample_mono_free(black_box(&params)).unwrap())
        });
    }
    let params = ElParams::freeform(2, 3, 9, 0).with_max_resamples(100_000);
    group.bench_function("impossible_1e5_resamples", |b| {
        b.iter(|| lll::sample_mono_free(black_box(&params)).unwrap())
    });
    group.finish();
}

fn primality(c: &mut Criterion) {
    let inputs: Vec<u64> = (0..1_000u64).map(|i| u64::MAX - 2 * i).collect();
    c.bench_function("is_prime_1000_near_2^64", |b| {
        b.iter(|| inputs.iter().filter(|&&m| primes::is_prime(black_box(m))).count())
    });
    c.bench_function("bhp_window_1e9", |b| b.iter(|| primes::bhp_window(black_box(1_000_000_000))));
}

criterion_group!(benches, verifier, exact, sampler, primality);
criterion_main!(benches);
