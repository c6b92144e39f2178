//! Enumeration oracles: weight tallies by walking every element of an affine
//! space in Gray-code order. Independent of the coset recursion; used to
//! validate it.

use super::WeightEnumerator;
use crate::codes::{pac_precode, polar_transform, BitVec, CodeSpec, ConvPolynomial, PathPrefix};
use crate::error::{Error, Result};

/// Largest number of free bits an oracle will enumerate.
pub const BRUTE_FORCE_BUDGET: usize = 28;

fn pack(bits: &BitVec) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.as_slice().iter().enumerate() {
        words[i / 64] |= (b as u64) << (i % 64);
    }
    words
}

/// Enumerator of `{ offset ⊕ Σ_i s_i rows_i : s ∈ {0,1}^r }`.
pub fn affine_space_wef(offset: &BitVec, rows: &[BitVec]) -> Result<WeightEnumerator> {
    if rows.len() > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: rows.len(),
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let n = offset.len();
    let rows: Vec<Vec<u64>> = rows.iter().map(pack).collect();
    let mut x = pack(offset);
    let mut tally = vec![0u128; n + 1];
    let weight = |x: &[u64]| x.iter().map(|w| w.count_ones() as usize).sum::<usize>();
    tally[weight(&x)] += 1;
    for step in 1u64..(1u64 << rows.len()) {
        let flip = step.trailing_zeros() as usize;
        for (xw, rw) in x.iter_mut().zip(&rows[flip]) {
            *xw ^= rw;
        }
        tally[weight(&x)] += 1;
    }
    Ok(WeightEnumerator::from_counts(&tally))
}

/// Enumerates the polar coset of `prefix` directly from its definition.
pub fn brute_force_coset_wef(prefix: &PathPrefix) -> Result<WeightEnumerator> {
    let n = prefix.code_length();
    let j = prefix.len();
    let mut u = prefix.bits().clone().into_inner();
    u.resize(n, 0);
    let offset = polar_transform(&BitVec::new(u)?)?;
    let rows = (j..n)
        .map(|i| polar_transform(&BitVec::unit(n, i)))
        .collect::<Result<Vec<_>>>()?;
    affine_space_wef(&offset, &rows)
}

/// Enumerates the PAC coset `{ (p ‖ u') T F_N }` for u-domain prefix `p`.
pub fn brute_force_pac_coset_wef(u_prefix: &PathPrefix, c: &ConvPolynomial) -> Result<WeightEnumerator> {
    let n = u_prefix.code_length();
    let mut u = u_prefix.bits().clone().into_inner();
    u.resize(n, 0);
    let offset = polar_transform(&pac_precode(&BitVec::new(u)?, c))?;
    let rows = (u_prefix.len()..n)
        .map(|i| polar_transform(&pac_precode(&BitVec::unit(n, i), c)))
        .collect::<Result<Vec<_>>>()?;
    affine_space_wef(&offset, &rows)
}

/// Weight distribution of `code` by visiting all `2^k` codewords.
pub fn enumerate_code_spectrum(code: &CodeSpec) -> Result<WeightEnumerator> {
    let n = code.length();
    let rows = code
        .info_set()
        .iter()
        .map(|&i| {
            let mut data = BitVec::zeros(code.dimension());
            let slot = code.info_set().iter().position(|&a| a == i).unwrap();
            data = {
                let mut d = data.into_inner();
                d[slot] = 1;
                BitVec::new(d)?
            };
            code.encode(&data)
        })
        .collect::<Result<Vec<_>>>()?;
    affine_space_wef(&BitVec::zeros(n), &rows)
}
