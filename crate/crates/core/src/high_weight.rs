//! Sampled estimate of the whole-code weight distribution.
//!
//! The code is the disjoint union of `2^MF` cosets of equal size. Drawing
//! cosets uniformly with replacement and summing their enumerators gives an
//! unbiased estimate after scaling by `2^MF / M`. Sampling stops once the
//! normalized shape of the running sum stops moving, judged by the mean of
//! the last few step metrics.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{BitVec, CodeSpec, PathPrefix};
use crate::error::{Error, Result};
use crate::wef::{ln_big, WefCache, WeightEnumerator};

/// FIFO of the most recent step metrics.
#[derive(Clone, Debug)]
pub struct SlidingFilter {
    window: VecDeque<f64>,
    capacity: usize,
}

impl SlidingFilter {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter("window must be positive".into()));
        }
        Ok(SlidingFilter {
            window: VecDeque::with_capacity(capacity),
            capacity,
        })
    }

    pub fn push(&mut self, x: f64) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(x);
    }

    /// Mean of the values currently held, `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        if self.window.is_empty() {
            None
        } else {
            Some(self.window.iter().sum::<f64>() / self.window.len() as f64)
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

/// A uniformly random valid coset prefix of length `τ+1`, returned in the
/// v-domain (precoded when the code has a pre-transform).
pub fn sample_prefix<R: Rng + ?Sized>(code: &CodeSpec, rng: &mut R) -> Result<PathPrefix> {
    let tau = code.last_frozen_index()?;
    let mut u = vec![0u8; tau + 1];
    for &i in code.info_set().iter().take_while(|&&i| i < tau) {
        u[i] = rng.gen_range(0..=1);
    }
    PathPrefix::new(code.length(), BitVec::from_raw(code.to_v_domain(&u)))
}

/// `ln A_w − ln Σ A` for every `w`, `None` where `A_w = 0`.
fn normalized_ln(a: &WeightEnumerator) -> Vec<Option<f64>> {
    let total = a.ln_total();
    (0..=a.max_degree()).map(|w| a.ln_coeff(w).map(|l| l - total)).collect()
}

fn mean_abs_diff(prev: &[Option<f64>], cur: &[Option<f64>]) -> f64 {
    let (sum, count) = prev
        .iter()
        .zip(cur)
        .filter_map(|(p, c)| Some((p.as_ref()? - c.as_ref()?).abs()))
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    if count == 0 {
        f64::INFINITY
    } else {
        sum / count as f64
    }
}

/// Mean absolute change of the normalized log coefficients over the weights
/// where both polynomials are nonzero. `+∞` when `prev` is zero.
pub fn convergence_step_metric(prev: &WeightEnumerator, cur: &WeightEnumerator) -> f64 {
    if prev.is_zero() || cur.is_zero() {
        return f64::INFINITY;
    }
    mean_abs_diff(&normalized_ln(prev), &normalized_ln(cur))
}

#[derive(Clone, Debug)]
pub struct EstimatorConfig {
    pub eps: f64,
    pub window: usize,
    pub min_samples: usize,
    pub max_samples: usize,
    /// Samples drawn ahead per parallel round. Only affects speed.
    pub batch: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            eps: 1e-5,
            window: 20,
            min_samples: 20,
            max_samples: 1_000_000,
            batch: 64,
        }
    }
}

impl EstimatorConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("window must be positive".into()));
        }
        if self.min_samples < self.window {
            return Err(Error::InvalidParameter(format!(
                "min_samples ({}) must be at least the window ({})",
                self.min_samples, self.window
            )));
        }
        if self.max_samples < self.min_samples {
            return Err(Error::InvalidParameter(format!(
                "max_samples ({}) is below min_samples ({})",
                self.max_samples, self.min_samples
            )));
        }
        Ok(())
    }
}

/// Result of [`estimate_spectrum`]. The estimate is `Â_w = 2^MF · accumulated_w / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub accumulated: WeightEnumerator,
    pub samples: u64,
    pub mixing_factor: usize,
    /// Step metric after each sample.
    pub trace: Vec<f64>,
    /// False when `max_samples` was hit before the filter settled.
    pub converged: bool,
}

impl SpectrumEstimate {
    /// The scale `2^MF / M` as `(numerator, denominator)`.
    pub fn scale(&self) -> (BigUint, u64) {
        (BigUint::from(1u8) << self.mixing_factor, self.samples)
    }

    /// `ln Â_w`, `None` when no sampled coset had weight-`w` words.
    pub fn ln_estimate(&self, w: usize) -> Option<f64> {
        self.accumulated
            .ln_coeff(w)
            .map(|l| l + self.mixing_factor as f64 * std::f64::consts::LN_2 - (self.samples as f64).ln())
    }

    /// `Â_w` as a float.
    pub fn estimate(&self, w: usize) -> f64 {
        self.ln_estimate(w).map_or(0.0, f64::exp)
    }

    /// `Â_w` as an exact rational `(numerator, denominator)`.
    pub fn estimate_ratio(&self, w: usize) -> (BigUint, u64) {
        (self.accumulated.coeff(w) << self.mixing_factor, self.samples)
    }

    /// `ln Â_w − ln Σ Â`, the shape of the distribution.
    pub fn normalized_ln(&self, w: usize) -> Option<f64> {
        self.accumulated.ln_coeff(w).map(|l| l - self.accumulated.ln_total())
    }

    /// `Σ_w Â_w` computed exactly; equals `2^k` whenever the code is consistent.
    pub fn estimated_total(&self) -> (BigUint, u64) {
        (self.accumulated.total() << self.mixing_factor, self.samples)
    }

    pub fn max_degree(&self) -> usize {
        self.accumulated.max_degree()
    }
}

/// Runs the sampling loop. Each sample gets its own sub-seed drawn from
/// `rng`, so results depend only on the seed and not on the thread count.
pub fn estimate_spectrum<R: Rng + ?Sized>(
    code: &CodeSpec,
    config: &EstimatorConfig,
    rng: &mut R,
    cache: &WefCache,
) -> Result<SpectrumEstimate> {
    config.validate()?;
    let n = code.length();
    let mf = code.mixing_factor()?;
    let mut filter = SlidingFilter::new(config.window)?;
    let mut acc = WeightEnumerator::zero(n);
    let mut acc_ln: Vec<Option<f64>> = vec![None; n + 1];
    let mut trace = Vec::new();
    let mut samples = 0u64;
    let mut converged = false;
    let batch = config.batch.max(1);

    'outer: while (samples as usize) < config.max_samples {
        let take = batch.min(config.max_samples - samples as usize);
        let seeds: Vec<u64> = (0..take).map(|_| rng.gen()).collect();
        let wefs: Vec<Arc<WeightEnumerator>> = seeds
            .par_iter()
            .map(|&s| {
                let mut sub = ChaCha8Rng::seed_from_u64(s);
                let p = sample_prefix(code, &mut sub)?;
                Ok(crate::wef::engine::coset_wef(n, p.bits().as_slice(), cache))
            })
            .collect::<Result<_>>()?;
        for wef in wefs {
            acc.add_assign(&wef);
            samples += 1;
            let cur_ln = normalized_ln(&acc);
            let step = if samples == 1 {
                f64::INFINITY
            } else {
                mean_abs_diff(&acc_ln, &cur_ln)
            };
            acc_ln = cur_ln;
            trace.push(step);
            filter.push(step);
            if samples as usize >= config.min_samples && filter.mean().is_some_and(|m| m < config.eps) {
                converged = true;
                break 'outer;
            }
        }
    }

    Ok(SpectrumEstimate {
        accumulated: acc,
        samples,
        mixing_factor: mf,
        trace,
        converged,
    })
}

/// `ln Â_w` for a whole estimate, handy for overlays.
pub fn ln_spectrum(est: &SpectrumEstimate) -> Vec<Option<f64>> {
    (0..=est.max_degree()).map(|w| est.ln_estimate(w)).collect()
}

/// `ln A_w` of an exact spectrum, same layout as [`ln_spectrum`].
pub fn ln_exact(spec: &WeightEnumerator) -> Vec<Option<f64>> {
    (0..=spec.max_degree())
        .map(|w| {
            let c = spec.coeff(w);
            (c > BigUint::from(0u8)).then(|| ln_big(&c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{construct_code, ConstructionRule};
    use crate::wef::{code_coset_wef, exact_spectrum, valid_prefix, DEFAULT_MF_BUDGET};
    use proptest::prelude::*;

    fn toy() -> CodeSpec {
        CodeSpec::from_frozen(8, [0, 1, 2, 4], None).unwrap()
    }

    #[test]
    fn filter_keeps_last_window() {
        let mut f = SlidingFilter::new(3).unwrap();
        assert_eq!(f.mean(), None);
        f.push(1.0);
        assert_eq!(f.mean(), Some(1.0));
        for x in [2.0, 3.0, 4.0] {
            f.push(x);
        }
        assert_eq!(f.len(), 3);
        assert_eq!(f.mean(), Some(3.0));
        assert!(SlidingFilter::new(0).is_err());
    }

    #[test]
    fn sample_frequencies_are_fair() {
        let code = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let mut ones = 0;
        for _ in 0..draws {
            let p = sample_prefix(&code, &mut rng).unwrap();
            let b = p.bits().as_slice();
            assert_eq!(b.len(), 5);
            assert_eq!([b[0], b[1], b[2], b[4]], [0, 0, 0, 0]);
            ones += b[3] as usize;
        }
        // 3σ of Binomial(10^4, 1/2) is 150
        assert!((ones as i64 - 5000).abs() <= 150, "ones = {ones}");
    }

    #[test]
    fn mf_zero_samples_are_constant() {
        let code = CodeSpec::from_frozen(8, [0], None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(sample_prefix(&code, &mut rng).unwrap().bits().as_slice(), &[0]);
        }
    }

    #[test]
    fn step_metric_examples() {
        let a = WeightEnumerator::from_counts(&[1, 0, 3, 0, 5]);
        let two_a = WeightEnumerator::from_counts(&[2, 0, 6, 0, 10]);
        assert!(convergence_step_metric(&a, &two_a) < 1e-12);
        assert_eq!(convergence_step_metric(&WeightEnumerator::zero(4), &a), f64::INFINITY);
        let m1 = WeightEnumerator::monomial(8, 3);
        let m7 = WeightEnumerator::from_counts(&[0, 0, 0, 7]);
        assert!(convergence_step_metric(&m1, &m7) < 1e-12);
        let b = WeightEnumerator::from_counts(&[1, 0, 4, 0, 5]);
        assert!(convergence_step_metric(&a, &b) > 0.0);
    }

    #[test]
    fn mf_zero_estimate_is_exact() {
        let code = CodeSpec::from_frozen(8, [0], None).unwrap();
        let cache = WefCache::new();
        let est = estimate_spectrum(&code, &EstimatorConfig::default(), &mut ChaCha8Rng::seed_from_u64(3), &cache).unwrap();
        assert!(est.converged);
        // the first step metric is infinite, so the window clears one draw later
        assert_eq!(est.samples, 21);
        let exact = exact_spectrum(&code, &cache, DEFAULT_MF_BUDGET).unwrap();
        for w in 0..=8 {
            let (num, den) = est.estimate_ratio(w);
            assert_eq!(num, exact.coeff(w) * BigUint::from(den));
        }
    }

    #[test]
    fn parameter_checks() {
        let code = toy();
        let cache = WefCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = [
            EstimatorConfig { eps: 0.0, ..Default::default() },
            EstimatorConfig { min_samples: 5, ..Default::default() },
            EstimatorConfig { max_samples: 10, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(estimate_spectrum(&code, &cfg, &mut rng, &cache), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let code = construct_code(32, 16, ConstructionRule::FiveG, None).unwrap();
        let cfg = EstimatorConfig { eps: 1e-300, max_samples: 40, ..Default::default() };
        let est = estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(9), &WefCache::new()).unwrap();
        assert!(!est.converged);
        assert_eq!(est.samples, 40);
        assert_eq!(est.trace.len(), 40);
    }

    #[test]
    fn same_seed_same_result_any_batch() {
        let code = construct_code(32, 16, ConstructionRule::FiveG, None).unwrap();
        let run = |batch| {
            let cfg = EstimatorConfig { eps: 1e-3, batch, ..Default::default() };
            estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(42), &WefCache::new()).unwrap()
        };
        assert_eq!(run(64), run(64));
        let a = run(1);
        let b = run(7);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.accumulated, b.accumulated);
    }

    #[test]
    fn exhaustive_average_is_exact() {
        let code = construct_code(32, 16, ConstructionRule::ReedMuller, None).unwrap();
        let mf = code.mixing_factor().unwrap();
        let cache = WefCache::new();
        let mut sum = WeightEnumerator::zero(32);
        for idx in 0..(1u64 << mf) {
            sum.add_assign(&code_coset_wef(&code, &valid_prefix(&code, idx).unwrap(), &cache));
        }
        assert_eq!(sum, exact_spectrum(&code, &cache, DEFAULT_MF_BUDGET).unwrap());
    }

    #[test]
    fn small_code_relative_error() {
        let code = construct_code(16, 8, ConstructionRule::FiveG, None).unwrap();
        let cache = WefCache::new();
        let exact = exact_spectrum(&code, &cache, DEFAULT_MF_BUDGET).unwrap();
        let cfg = EstimatorConfig { eps: 1e-5, ..Default::default() };
        for seed in 0..20 {
            let est = estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(seed), &cache).unwrap();
            for w in exact.support() {
                let a = exact.coeff_f64(w);
                if a >= 100.0 {
                    let rel = (est.estimate(w) - a).abs() / a;
                    assert!(rel <= 0.05, "seed {seed} w {w}: rel {rel}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn estimated_mass_is_two_to_k(seed in any::<u64>(), k in 4usize..28) {
            let code = construct_code(32, k, ConstructionRule::FiveG, None).unwrap();
            let cfg = EstimatorConfig { eps: 1e-2, max_samples: 200, ..Default::default() };
            let est = estimate_spectrum(&code, &cfg, &mut ChaCha8Rng::seed_from_u64(seed), &WefCache::new()).unwrap();
            let (num, den) = est.estimated_total();
            prop_assert_eq!(num, (BigUint::from(1u8) << k) * BigUint::from(den));
        }
    }
}
