use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pswef::construction::{construct_code, ConstructionRule};
use pswef::high_weight::{estimate_spectrum, sample_prefix, EstimatorConfig};
use pswef::low_weight::{collect_cosets, low_weight_spectrum};
use pswef::wef::{calc_coset_wef, exact_spectrum, DEFAULT_MF_BUDGET};
use pswef::{ConvPolynomial, WefCache};

fn coset_wef(c: &mut Criterion) {
    let mut group = c.benchmark_group("coset_wef_cold");
    for n in [128usize, 256, 512] {
        let code = construct_code(n, n / 2, ConstructionRule::FiveG, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prefixes: Vec<_> = (0..16).map(|_| sample_prefix(&code, &mut rng).unwrap()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &prefixes, |b, ps| {
            b.iter(|| {
                let cache = WefCache::new();
                for p in ps {
                    calc_coset_wef(p, &cache);
                }
            })
        });
    }
    group.finish();
}

fn low_weight(c: &mut Criterion) {
    let code = construct_code(128, 64, ConstructionRule::FiveG, None).unwrap();
    let mut group = c.benchmark_group("low_weight_128_64");
    group.sample_size(10);
    for l in [8usize, 1000] {
        group.bench_with_input(BenchmarkId::new("scl_only", l), &l, |b, &l| b.iter(|| collect_cosets(&code, l).unwrap()));
        group.bench_with_input(BenchmarkId::new("full", l), &l, |b, &l| {
            b.iter(|| low_weight_spectrum(&code, l, 20, &WefCache::new()).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let code = construct_code(64, 32, ConstructionRule::ReedMuller, Some(ConvPolynomial::default_pac())).unwrap();
    let mut group = c.benchmark_group("exact");
    group.sample_size(10);
    group.bench_function("rm_pac_64_32", |b| b.iter(|| exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap()));
    group.finish();
}

fn estimator(c: &mut Criterion) {
    let code = construct_code(128, 64, ConstructionRule::FiveG, None).unwrap();
    let cfg = EstimatorConfig { eps: 1e-4, ..EstimatorConfig::default() };
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("5g_128_64_eps1e-4", |b| {
        b.iter(|| estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(7), &WefCache::new()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, coset_wef, low_weight, exact, estimator);
criterion_main!(benches);
