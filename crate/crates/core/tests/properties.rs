use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use pswef::analysis::union_bound_bler;
use pswef::construction::{construct_code, ConstructionRule};
use pswef::high_weight::{estimate_spectrum, EstimatorConfig};
use pswef::io::{cache_load, cache_store};
use pswef::low_weight::{low_weight_spectrum, sum_coset_wefs};
use pswef::scl::scl_decode_partial;
use pswef::wef::{code_coset_wef, exact_spectrum, valid_prefix, DEFAULT_MF_BUDGET};
use pswef::{BitVec, CodeSpec, ConvPolynomial, PathPrefix, WefCache, WeightEnumerator};

fn random_code(rng: &mut ChaCha8Rng, n: usize, max_mf: usize) -> CodeSpec {
    loop {
        let k = rng.gen_range(1..n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        let pre = rng.gen_bool(0.5).then(ConvPolynomial::default_pac);
        let code = CodeSpec::new(n, idx[..k].to_vec(), pre).unwrap();
        if code.mixing_factor().is_ok_and(|mf| mf <= max_mf) {
            return code;
        }
    }
}

#[test]
fn stored_cache_gives_identical_counts() {
    let code = construct_code(128, 64, ConstructionRule::FiveG, None).unwrap();
    let cache = WefCache::new();
    let cold = low_weight_spectrum(&code, 1000, 24, &cache).unwrap();
    let mut file = Vec::new();
    cache_store(&mut file, &cache).unwrap();
    cache.clear();
    assert_eq!(cache_load(&file[..], &cache).unwrap(), cache.len());
    let warm = low_weight_spectrum(&code, 1000, 24, &cache).unwrap();
    assert_eq!(cold.spectrum, warm.spectrum);
    assert_eq!(cold.status, warm.status);
}

#[test]
fn bounded_cache_is_transparent() {
    let code = construct_code(64, 32, ConstructionRule::FiveG, Some(ConvPolynomial::default_pac())).unwrap();
    let full = exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap();
    let tiny = exact_spectrum(&code, &WefCache::with_limit(500), DEFAULT_MF_BUDGET).unwrap();
    assert_eq!(full, tiny);
}

#[test]
fn list_sweep_converges_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..12 {
        let n = [16, 32, 64][rng.gen_range(0..3)];
        let code = random_code(&mut rng, n, 12);
        let mf = code.mixing_factor().unwrap();
        let cache = WefCache::new();
        let exact = exact_spectrum(&code, &cache, DEFAULT_MF_BUDGET).unwrap();
        let mut prev_mass = BigUint::from(0u8);
        for e in 0..=mf {
            let r = low_weight_spectrum(&code, 1 << e, n, &cache).unwrap();
            assert!(r.spectrum.le_coefficientwise(&exact));
            let mass = r.spectrum.total();
            assert!(mass >= prev_mass, "mass fell at L=2^{e}");
            prev_mass = mass;
        }
        assert_eq!(low_weight_spectrum(&code, 1 << mf, n, &cache).unwrap().spectrum, exact);
    }
}

#[test]
fn path_metrics_grow_along_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..6 {
        let code = random_code(&mut rng, 32, 8);
        let tau = code.last_frozen_index().unwrap();
        let all = 1usize << code.mixing_factor().unwrap();
        let llrs = vec![50.0; 32];
        for stop in 0..tau {
            let short = scl_decode_partial(&code, &llrs, all, stop).unwrap();
            let long = scl_decode_partial(&code, &llrs, all, stop + 1).unwrap();
            for p in &long {
                assert!(p.metric >= 0.0);
                let parent = short
                    .iter()
                    .find(|q| q.u_bits.as_slice() == &p.u_bits.as_slice()[..=stop])
                    .expect("prefix survives with an exhaustive list");
                assert!(p.metric >= parent.metric);
            }
        }
    }
}

#[test]
fn noisy_channel_agrees_at_converged_list_size() {
    // Step one with actual high-SNR noise instead of the constant input.
    let code = construct_code(128, 64, ConstructionRule::FiveG, None).unwrap();
    let tau = code.last_frozen_index().unwrap();
    let cache = WefCache::new();
    let reference = low_weight_spectrum(&code, 1000, 12, &cache).unwrap();
    let sigma: f64 = 0.05;
    let noise = Normal::new(0.0, sigma).unwrap();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let llrs: Vec<f64> = (0..128).map(|_| 2.0 * (1.0 + noise.sample(&mut rng)) / (sigma * sigma)).collect();
        let paths = scl_decode_partial(&code, &llrs, 1000, tau).unwrap();
        let cosets: Vec<PathPrefix> = paths
            .iter()
            .map(|p| {
                let u = BitVec::new(p.u_bits.as_slice().to_vec()).unwrap();
                let v = match code.precoder() {
                    Some(c) => pswef::codes::pac_precode(&u, c),
                    None => u,
                };
                PathPrefix::new(128, v).unwrap()
            })
            .collect();
        let noisy = sum_coset_wefs(&code, &cosets, &cache);
        for w in [8, 12] {
            assert_eq!(noisy.coeff(w), reference.count(w), "seed {seed} w {w}");
        }
    }
}

/// Exhaustive ML decoding of BPSK over AWGN; returns the block error rate.
fn ml_bler(code: &CodeSpec, ebn0_db: f64, trials: usize, rng: &mut ChaCha8Rng) -> f64 {
    let k = code.dimension();
    let words: Vec<Vec<f64>> = (0..1u32 << k)
        .map(|m| {
            let data = BitVec::new((0..k).map(|i| ((m >> i) & 1) as u8).collect()).unwrap();
            code.encode(&data).unwrap().as_slice().iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
        })
        .collect();
    let sigma = (1.0 / (2.0 * code.rate() * 10f64.powf(ebn0_db / 10.0))).sqrt();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut errors = 0;
    for _ in 0..trials {
        // all-zero word sent (+1 everywhere)
        let y: Vec<f64> = (0..code.length()).map(|_| 1.0 + noise.sample(rng)).collect();
        let corr = |x: &Vec<f64>| x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        let best = words.iter().map(corr).fold(f64::NEG_INFINITY, f64::max);
        if best > corr(&words[0]) {
            errors += 1;
        }
    }
    errors as f64 / trials as f64
}

#[test]
fn union_bound_dominates_simulated_ml() {
    let code = construct_code(16, 8, ConstructionRule::ReedMuller, None).unwrap();
    let spec = exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (db, trials) in [(3.0, 20_000), (10.0, 2_000)] {
        let bound = union_bound_bler(&spec, db, code.rate());
        let sim = ml_bler(&code, db, trials, &mut rng);
        // 3σ of the Monte-Carlo estimate
        let slack = 3.0 * (bound.max(1e-12) / trials as f64).sqrt();
        assert!(sim <= bound + slack, "{db} dB: simulated {sim} vs bound {bound}");
    }
    assert!(union_bound_bler(&spec, 10.0, 0.5) < union_bound_bler(&spec, 3.0, 0.5));
}

#[test]
fn estimator_variance_shrinks_with_samples() {
    let code = construct_code(32, 16, ConstructionRule::FiveG, None).unwrap();
    let exact = exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap();
    let w = (0..=32).max_by(|&a, &b| exact.coeff(a).cmp(&exact.coeff(b))).unwrap();
    let spread = |m: usize| {
        let vals: Vec<f64> = (0..30)
            .map(|seed| {
                let cfg = EstimatorConfig { eps: 1e-300, max_samples: m, ..EstimatorConfig::default() };
                estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(seed), &WefCache::new())
                    .unwrap()
                    .estimate(w)
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
    };
    let (small, large) = (spread(20), spread(640));
    assert!(large < small, "variance {large} at M=640 vs {small} at M=20");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coset_subsets_never_exceed_exact(seed in any::<u64>(), pick in proptest::collection::vec(any::<bool>(), 64)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_code(&mut rng, 32, 6);
        let cache = WefCache::new();
        let exact = exact_spectrum(&code, &cache, DEFAULT_MF_BUDGET).unwrap();
        let mut sum = WeightEnumerator::zero(32);
        for idx in 0..(1u64 << code.mixing_factor().unwrap()) {
            if pick[idx as usize] {
                sum.add_assign(&code_coset_wef(&code, &valid_prefix(&code, idx).unwrap(), &cache));
            }
        }
        prop_assert!(sum.le_coefficientwise(&exact));
    }

    #[test]
    fn spectra_symmetric_with_all_ones_row(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut code = random_code(&mut rng, 32, 14);
        if !code.info_set().contains(&31) {
            let mut info = code.info_set().to_vec();
            info[0] = 31;
            code = CodeSpec::new(32, info, code.precoder().cloned()).unwrap();
        }
        prop_assume!(code.mixing_factor().is_ok_and(|mf| mf <= 14));
        let spec = exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap();
        for w in 0..=32 {
            prop_assert_eq!(spec.coeff(w), spec.coeff(32 - w));
        }
    }

    #[test]
    fn cold_and_warm_cache_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_code(&mut rng, 64, 10);
        let warm = WefCache::new();
        let a = exact_spectrum(&code, &warm, DEFAULT_MF_BUDGET).unwrap();
        let b = exact_spectrum(&code, &warm, DEFAULT_MF_BUDGET).unwrap();
        let c = exact_spectrum(&code, &WefCache::new(), DEFAULT_MF_BUDGET).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }
}
