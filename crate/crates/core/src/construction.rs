//! Information-set selection: 5G reliability sequence, Reed–Muller rule and
//! Gaussian-approximation density evolution.

use std::fmt;
use std::path::Path;

use crate::codes::{CodeSpec, ConvPolynomial};
use crate::error::{Error, Result};

const NR_SEQUENCE: &str = include_str!("../data/nr_polar_1024.txt");

/// Default GA design SNR (Eb/N0, dB).
pub const DEFAULT_DESIGN_SNR_DB: f64 = 2.5;

/// Permutation of `0..N_max`, least reliable index first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilitySequence {
    order: Vec<usize>,
    source: String,
}

impl ReliabilitySequence {
    /// Parses one index per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut order = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let idx = line.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not an index: {line:?}"),
            })?;
            order.push(idx);
        }
        let n = order.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Sequence(format!(
                "length {n} is not a positive power of two"
            )));
        }
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n {
                return Err(Error::Sequence(format!("index {i} out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Sequence(format!("duplicate index {i}")));
            }
        }
        Ok(ReliabilitySequence {
            order,
            source: source.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ReliabilitySequence::parse(&text, path.display().to_string())
    }

    /// The 3GPP NR master sequence for `N_max = 1024`.
    pub fn nr_1024() -> Self {
        ReliabilitySequence::parse(NR_SEQUENCE, "3GPP NR (N_max = 1024)")
            .expect("shipped sequence is valid")
    }

    pub fn max_length(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// The `k` most reliable indices below `n`.
    pub fn info_set(&self, n: usize, k: usize) -> Result<Vec<usize>> {
        if n > self.max_length() {
            return Err(Error::Sequence(format!(
                "sequence covers N ≤ {}, requested {n}",
                self.max_length()
            )));
        }
        let sub: Vec<usize> = self.order.iter().copied().filter(|&i| i < n).collect();
        Ok(sub[n - k..].to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstructionRule {
    FiveG,
    ReedMuller,
    GaussianApprox { design_snr_db: f64 },
}

impl fmt::Display for ConstructionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionRule::FiveG => write!(f, "5g"),
            ConstructionRule::ReedMuller => write!(f, "rm"),
            ConstructionRule::GaussianApprox { design_snr_db } => write!(f, "ga@{design_snr_db}dB"),
        }
    }
}

/// Builds an `(n, k)` code with the shipped 5G sequence for
/// [`ConstructionRule::FiveG`].
pub fn construct_code(
    n: usize,
    k: usize,
    rule: ConstructionRule,
    precoder: Option<ConvPolynomial>,
) -> Result<CodeSpec> {
    construct_code_with(n, k, rule, precoder, None)
}

/// As [`construct_code`], optionally with a custom reliability sequence.
pub fn construct_code_with(
    n: usize,
    k: usize,
    rule: ConstructionRule,
    precoder: Option<ConvPolynomial>,
    sequence: Option<&ReliabilitySequence>,
) -> Result<CodeSpec> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidCode(format!("need 0 < k < N, got k = {k}, N = {n}")));
    }
    let info = match rule {
        ConstructionRule::FiveG => match sequence {
            Some(seq) => seq.info_set(n, k)?,
            None => ReliabilitySequence::nr_1024().info_set(n, k)?,
        },
        ConstructionRule::ReedMuller => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by_key(|&i| (i.count_ones(), i));
            idx[n - k..].to_vec()
        }
        ConstructionRule::GaussianApprox { design_snr_db } => {
            if !design_snr_db.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "design SNR must be finite, got {design_snr_db}"
                )));
            }
            let means = ga_reliabilities(n, design_snr_db, k as f64 / n as f64)?;
            if means.iter().any(|m| m.is_nan()) {
                return Err(Error::GaNonConvergence(design_snr_db));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
            idx[n - k..].to_vec()
        }
    };
    CodeSpec::new(n, info, precoder)
}

const PHI_A: f64 = 0.4527;
const PHI_B: f64 = 0.86;
const PHI_C: f64 = 0.0218;
const PHI_SPLIT: f64 = 10.0;

fn ln_phi_low(x: f64) -> f64 {
    -PHI_A * x.powf(PHI_B) + PHI_C
}

fn ln_phi_high(x: f64) -> f64 {
    0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
}

/// `ln φ(x)` for the two-piece approximation. Clamped to `φ ≤ 1`, and the
/// upper piece is capped at the lower piece's value at the split so that φ
/// is non-increasing across it.
pub fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < PHI_SPLIT {
        ln_phi_low(x).min(0.0)
    } else {
        ln_phi_high(x).min(ln_phi_low(PHI_SPLIT))
    }
}

/// Inverse of [`ln_phi`]: the mean `x ≥ 0` with `ln φ(x) = ln_y`.
pub fn ln_phi_inv(ln_y: f64) -> f64 {
    if ln_y >= 0.0 {
        return 0.0;
    }
    if ln_y >= ln_phi_low(PHI_SPLIT) {
        return ((PHI_C - ln_y) / PHI_A).powf(1.0 / PHI_B);
    }
    let mut lo = PHI_SPLIT;
    let mut hi = 2.0 * PHI_SPLIT;
    while ln_phi_high(hi) > ln_y {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi_high(mid) > ln_y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Check-node mean update `φ⁻¹(1 − (1 − φ(m))²)`, evaluated in log space.
fn check_mean(m: f64) -> f64 {
    let lp = ln_phi(m);
    let p = lp.exp();
    // 1 − (1 − p)² = p(2 − p); the second form loses everything when p → 0,
    // the first when p → 1
    let ln_y = if p < 0.5 {
        lp + (2.0 - p).ln()
    } else {
        let q = -lp.exp_m1();
        (-q * q).ln_1p()
    };
    ln_phi_inv(ln_y)
}

/// Mean LLR of every synthetic channel under Gaussian approximation, starting
/// from `4·R·Eb/N0` on each physical channel.
pub fn ga_reliabilities(n: usize, design_snr_db: f64, rate: f64) -> Result<Vec<f64>> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let m0 = 4.0 * rate * 10f64.powf(design_snr_db / 10.0);
    let mut means = vec![m0];
    while means.len() < n {
        means = means
            .iter()
            .flat_map(|&m| [check_mean(m), 2.0 * m])
            .collect();
    }
    Ok(means)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shipped_sequence_is_a_permutation() {
        let seq = ReliabilitySequence::nr_1024();
        assert_eq!(seq.max_length(), 1024);
        assert_eq!(&seq.order()[..8], &[0, 1, 2, 4, 8, 16, 32, 3]);
        assert_eq!(*seq.order().last().unwrap(), 1023);
    }

    #[test]
    fn sequence_parse_errors() {
        assert!(ReliabilitySequence::parse("0\n1\n1\n3\n", "t").is_err());
        assert!(ReliabilitySequence::parse("0\n1\n2\n", "t").is_err());
        assert!(matches!(
            ReliabilitySequence::parse("0\nx\n", "t"),
            Err(Error::Parse { line: 2, .. })
        ));
        let ok = ReliabilitySequence::parse("# toy\n0\n1\n2\n4\n3\n5\n6\n7 # best\n", "t").unwrap();
        assert_eq!(ok.max_length(), 8);
        assert_eq!(ok.info_set(8, 4).unwrap(), vec![3, 5, 6, 7]);
    }

    #[test]
    fn reed_muller_rule() {
        let code = construct_code(8, 4, ConstructionRule::ReedMuller, None).unwrap();
        assert_eq!(code.info_set(), &[3, 5, 6, 7]);

        let code = construct_code(64, 32, ConstructionRule::ReedMuller, None).unwrap();
        let heavy = code.info_set().iter().filter(|i| i.count_ones() >= 4).count();
        let mid: Vec<usize> = code.info_set().iter().copied().filter(|i| i.count_ones() == 3).collect();
        assert_eq!(heavy, 22);
        assert_eq!(mid, vec![35, 37, 38, 41, 42, 44, 49, 50, 52, 56]);
    }

    #[test]
    fn reed_muller_maximizes_min_row_weight() {
        for (n, k) in [(16usize, 5usize), (32, 16), (64, 40), (128, 64)] {
            let code = construct_code(n, k, ConstructionRule::ReedMuller, None).unwrap();
            let min_pop = code.info_set().iter().map(|i| i.count_ones()).min().unwrap();
            // no k-subset can have every popcount above min_pop
            let above = (0..n).filter(|i| i.count_ones() > min_pop).count();
            assert!(above < k);
        }
    }

    #[test]
    fn five_g_is_nested_subsequence() {
        let code = construct_code(8, 4, ConstructionRule::FiveG, None).unwrap();
        // indices < 8 in NR order: 0 1 2 4 3 5 6 7
        assert_eq!(code.info_set(), &[3, 5, 6, 7]);
        assert!(construct_code(2048, 4, ConstructionRule::FiveG, None).is_err());
    }

    #[test]
    fn constructions_are_deterministic() {
        for rule in [
            ConstructionRule::FiveG,
            ConstructionRule::ReedMuller,
            ConstructionRule::GaussianApprox { design_snr_db: 1.0 },
        ] {
            let a = construct_code(256, 100, rule, None).unwrap();
            let b = construct_code(256, 100, rule, None).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.dimension(), 100);
        }
    }

    #[test]
    fn k_out_of_range() {
        assert!(construct_code(16, 0, ConstructionRule::ReedMuller, None).is_err());
        assert!(construct_code(16, 16, ConstructionRule::ReedMuller, None).is_err());
        assert!(construct_code(12, 4, ConstructionRule::ReedMuller, None).is_err());
    }

    #[test]
    fn ga_two_channels() {
        let m = ga_reliabilities(2, 0.0, 0.5).unwrap();
        assert_eq!(m[1], 2.0 * 2.0);
        assert!(m[0] < 2.0);
        assert!(m[0] > 0.0);
    }

    #[test]
    fn ga_best_channel_is_last() {
        let m = ga_reliabilities(4, 0.0, 0.5).unwrap();
        let best = (0..4).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap();
        assert_eq!(best, 3);
    }

    #[test]
    fn ga_large_block_is_finite() {
        let m = ga_reliabilities(1024, 6.0, 0.5).unwrap();
        assert!(m.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn phi_inverse_round_trip() {
        for x in [0.05, 0.5, 3.0, 9.9, 10.5, 40.0, 500.0, 5000.0] {
            let back = ln_phi_inv(ln_phi(x));
            assert!((back - x).abs() < 1e-6 * x.max(1.0), "{x} -> {back}");
        }
    }

    proptest! {
        #[test]
        fn ga_means_monotone_in_snr(a in -5.0f64..8.0, b in -5.0f64..8.0, n in 1u32..=8) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ml = ga_reliabilities(1 << n, lo, 0.5).unwrap();
            let mh = ga_reliabilities(1 << n, hi, 0.5).unwrap();
            for (x, y) in ml.iter().zip(&mh) {
                prop_assert!(*y >= *x * (1.0 - 1e-9), "{} > {}", x, y);
            }
        }
    }
}
