use std::sync::Arc;

use rayon::prelude::*;

use super::{CacheKey, WefCache, WeightEnumerator};
use crate::codes::{precode_slice, BitVec, CodeSpec, ConvPolynomial, PathPrefix};
use crate::error::{Error, Result};

/// Default limit on `MF` for [`exact_spectrum`].
pub const DEFAULT_MF_BUDGET: usize = 24;

/// Weight enumerator of the polar coset `{ (prefix ‖ u') F_N }`.
///
/// Recursion on the block length:
/// * even prefix length `j`: the coset factors into two independent cosets of
///   length `N/2` with prefixes `u_o ⊕ u_e` and `u_e`, so the enumerators
///   multiply;
/// * odd `j`: extend the prefix by one bit both ways and add;
/// * `N = 1`: `1 + X` for the empty prefix, `X^b` for prefix `(b)`.
pub fn calc_coset_wef(prefix: &PathPrefix, cache: &WefCache) -> Arc<WeightEnumerator> {
    coset_wef(prefix.code_length(), prefix.bits().as_slice(), cache)
}

/// PAC coset for u-domain prefix `p` under pre-transform `c`. Since `T` is
/// unit upper triangular, this is the polar coset of the v-domain prefix
/// `pac_precode(p, c)`.
pub fn pac_coset_wef(
    u_prefix: &PathPrefix,
    c: &ConvPolynomial,
    cache: &WefCache,
) -> Arc<WeightEnumerator> {
    let v = precode_slice(u_prefix.bits().as_slice(), c.coeffs());
    coset_wef(u_prefix.code_length(), &v, cache)
}

/// Coset enumerator for a u-domain prefix of `code`, precoded if the code has
/// a pre-transform.
pub fn code_coset_wef(code: &CodeSpec, u_prefix: &[u8], cache: &WefCache) -> Arc<WeightEnumerator> {
    coset_wef(code.length(), &code.to_v_domain(u_prefix), cache)
}

pub(crate) fn coset_wef(n: usize, prefix: &[u8], cache: &WefCache) -> Arc<WeightEnumerator> {
    debug_assert!(prefix.len() <= n);
    if n == 1 {
        return Arc::new(match prefix.first() {
            None => WeightEnumerator::from_counts(&[1, 1]),
            Some(&b) => WeightEnumerator::monomial(1, b as usize),
        });
    }
    let key = CacheKey::new(n, prefix);
    if let Some(hit) = cache.get(&key) {
        return hit;
    }
    let result = if prefix.is_empty() {
        WeightEnumerator::binomial(n)
    } else if prefix.len() % 2 == 1 {
        let mut ext = Vec::with_capacity(prefix.len() + 1);
        ext.extend_from_slice(prefix);
        ext.push(0);
        let mut sum = (*coset_wef(n, &ext, cache)).clone();
        *ext.last_mut().unwrap() = 1;
        sum.add_assign(&coset_wef(n, &ext, cache));
        sum
    } else {
        let mixed: Vec<u8> = prefix.chunks_exact(2).map(|p| p[0] ^ p[1]).collect();
        let upper: Vec<u8> = prefix.chunks_exact(2).map(|p| p[1]).collect();
        let lo = coset_wef(n / 2, &mixed, cache);
        if mixed == upper {
            lo.mul(&lo)
        } else {
            lo.mul(&coset_wef(n / 2, &upper, cache))
        }
    };
    let result = Arc::new(result);
    cache.insert(key, Arc::clone(&result));
    result
}

/// The u-domain prefix of length `τ+1` whose information bits below `τ` are
/// the low `MF` bits of `index` (first information position = least
/// significant bit).
pub fn valid_prefix(code: &CodeSpec, index: u64) -> Result<Vec<u8>> {
    let tau = code.last_frozen_index()?;
    let mut u = vec![0u8; tau + 1];
    for (bit, &pos) in code.info_set().iter().take_while(|&&i| i < tau).enumerate() {
        u[pos] = ((index >> bit) & 1) as u8;
    }
    Ok(u)
}

/// Exact weight distribution of `code`: the sum of the enumerators of all
/// `2^MF` cosets with valid prefixes of length `τ+1`.
///
/// Fails with [`Error::BudgetExceeded`] when `MF > mf_budget`.
pub fn exact_spectrum(code: &CodeSpec, cache: &WefCache, mf_budget: usize) -> Result<WeightEnumerator> {
    let n = code.length();
    let mf = match code.mixing_factor() {
        Ok(mf) => mf,
        Err(Error::NoFrozenBits) => return Ok(WeightEnumerator::binomial(n)),
        Err(e) => return Err(e),
    };
    if mf > mf_budget || mf >= 63 {
        return Err(Error::BudgetExceeded {
            needed: mf,
            budget: mf_budget,
        });
    }
    let count = 1u64 << mf;
    let chunk = (count / 64).max(1);
    let chunks = count.div_ceil(chunk);
    let total = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = WeightEnumerator::zero(n);
            for idx in c * chunk..((c + 1) * chunk).min(count) {
                let u = valid_prefix(code, idx).expect("frozen set checked above");
                acc.add_assign(&code_coset_wef(code, &u, cache));
            }
            acc
        })
        .reduce(
            || WeightEnumerator::zero(n),
            |mut a, b| {
                a.add_assign(&b);
                a
            },
        );
    Ok(total)
}

/// Convenience: the prefix `bits` for a code of length `n`.
pub fn prefix(n: usize, bits: &[u8]) -> Result<PathPrefix> {
    PathPrefix::new(n, BitVec::new(bits.to_vec())?)
}
