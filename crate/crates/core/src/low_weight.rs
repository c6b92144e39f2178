//! Low-weight codeword counts from list-decoder-selected cosets.
//!
//! An all-zero codeword is sent over a noiseless channel (every LLR equal to
//! [`NOISELESS_LLR`]) into a list decoder that stops right after the last
//! frozen index `τ`. Each surviving path fixes a prefix of length `τ+1`,
//! i.e. one of the `2^MF` cosets partitioning the code; their exact
//! enumerators are summed. Since the cosets are disjoint the sum never
//! exceeds the true spectrum.

use num_bigint::BigUint;

use crate::codes::{BitVec, CodeSpec, PathPrefix};
use crate::error::Result;
use crate::scl::scl_decode_partial;
use crate::wef::{WefCache, WeightEnumerator};

/// Channel LLR standing in for the σ → 0 limit.
pub const NOISELESS_LLR: f64 = 50.0;

/// The distinct v-domain prefixes (length `τ+1`) selected by a list of size
/// `list_size`, in decoder order.
pub fn collect_cosets(code: &CodeSpec, list_size: usize) -> Result<Vec<PathPrefix>> {
    let tau = code.last_frozen_index()?;
    let llrs = vec![NOISELESS_LLR; code.length()];
    let paths = scl_decode_partial(code, &llrs, list_size, tau)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let v = code.to_v_domain(p.u_bits.as_slice());
        if seen.insert(v.clone()) {
            out.push(PathPrefix::new(code.length(), BitVec::from_raw(v))?);
        }
    }
    Ok(out)
}

/// Sum of the enumerators of the given v-domain prefixes.
pub fn sum_coset_wefs(code: &CodeSpec, cosets: &[PathPrefix], cache: &WefCache) -> WeightEnumerator {
    let mut acc = WeightEnumerator::zero(code.length());
    for c in cosets {
        // prefixes are already in the v-domain
        acc.add_assign(&crate::wef::engine::coset_wef(code.length(), c.bits().as_slice(), cache));
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountStatus {
    /// Every coset of the code was visited.
    Exact,
    /// Unchanged between list size `L/2` and `L`.
    Converged,
    /// Still moving with the list size; a lower bound on the true count.
    LowerBound,
}

#[derive(Clone, Debug)]
pub struct LowWeightReport {
    pub list_size: usize,
    pub max_weight: usize,
    pub cosets: usize,
    pub mixing_factor: usize,
    pub last_frozen_index: usize,
    /// All `2^MF` cosets were collected.
    pub exhausted: bool,
    /// Summed counts for weights `0..=max_weight`.
    pub spectrum: WeightEnumerator,
    pub status: Vec<CountStatus>,
}

impl LowWeightReport {
    pub fn count(&self, w: usize) -> BigUint {
        self.spectrum.coeff(w)
    }

    /// Largest weight up to which no count is a mere lower bound.
    pub fn converged_upto(&self) -> Option<usize> {
        let first_open = self.status.iter().position(|&s| s == CountStatus::LowerBound);
        match first_open {
            Some(0) => None,
            Some(w) => Some(w - 1),
            None => Some(self.max_weight),
        }
    }

    /// `(w, A_w, status)` for every nonzero count.
    pub fn entries(&self) -> Vec<(usize, BigUint, CountStatus)> {
        self.spectrum
            .support()
            .map(|w| (w, self.spectrum.coeff(w), self.status[w]))
            .collect()
    }
}

/// Counts of codewords of weight `≤ max_weight` found in the cosets collected
/// with list size `list_size`.
pub fn low_weight_spectrum(
    code: &CodeSpec,
    list_size: usize,
    max_weight: usize,
    cache: &WefCache,
) -> Result<LowWeightReport> {
    let max_weight = max_weight.min(code.length());
    let mf = code.mixing_factor()?;
    let tau = code.last_frozen_index()?;
    let cosets = collect_cosets(code, list_size)?;
    let spectrum = sum_coset_wefs(code, &cosets, cache).truncated(max_weight);
    let exhausted = mf < 64 && cosets.len() as u64 == 1u64 << mf;

    let status = if exhausted {
        vec![CountStatus::Exact; max_weight + 1]
    } else if list_size >= 2 {
        let half = collect_cosets(code, list_size / 2)?;
        let prev = sum_coset_wefs(code, &half, cache);
        (0..=max_weight)
            .map(|w| {
                if prev.coeff(w) == spectrum.coeff(w) {
                    CountStatus::Converged
                } else {
                    CountStatus::LowerBound
                }
            })
            .collect()
    } else {
        vec![CountStatus::LowerBound; max_weight + 1]
    };

    Ok(LowWeightReport {
        list_size,
        max_weight,
        cosets: cosets.len(),
        mixing_factor: mf,
        last_frozen_index: tau,
        exhausted,
        spectrum,
        status,
    })
}
