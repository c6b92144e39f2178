//! Binary vectors, the polar transform, the PAC convolutional pre-transform
//! and the [`CodeSpec`] describing a polar or PAC code.
//!
//! Indexing is 0-based throughout. The polar matrix `F_N = B_N K_2^{⊗n}` is
//! never materialized: it is applied through the parity split
//! `uF_N = ((u_o ⊕ u_e) F_{N/2} ‖ u_e F_{N/2})` where `u_o = (u_0, u_2, ..)`
//! and `u_e = (u_1, u_3, ..)`.

use std::fmt;

use crate::error::{Error, Result};

/// A binary vector with one byte per bit, every element 0 or 1.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec(Vec<u8>);

impl BitVec {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        Ok(BitVec(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BitVec(vec![0; len])
    }

    /// Unit vector `e_i` of the given length.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = vec![0; len];
        v[i] = 1;
        BitVec(v)
    }

    pub(crate) fn from_raw(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitVec(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit as u8);
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(BitVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitVec {
    type Err = Error;

    /// Parses a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => Err(Error::InvalidBit(other)),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitVec)
    }
}

/// Impulse response `c = (c_0, .., c_m)` of the PAC pre-transform, with
/// `c_0 = c_m = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConvPolynomial {
    coeffs: BitVec,
}

impl ConvPolynomial {
    pub fn new(coeffs: BitVec) -> Result<Self> {
        match (coeffs.as_slice().first(), coeffs.as_slice().last()) {
            (Some(1), Some(1)) => Ok(ConvPolynomial { coeffs }),
            _ => Err(Error::InvalidPolynomial),
        }
    }

    /// Parses an octal literal such as `133`, most significant bit first:
    /// `133` gives `c = (1,0,1,1,0,1,1)`.
    pub fn from_octal(s: &str) -> Result<Self> {
        let value = u64::from_str_radix(s.trim(), 8)
            .map_err(|_| Error::InvalidCode(format!("bad octal polynomial {s:?}")))?;
        if value == 0 {
            return Err(Error::InvalidPolynomial);
        }
        let width = 64 - value.leading_zeros() as usize;
        let bits = (0..width)
            .map(|i| ((value >> (width - 1 - i)) & 1) as u8)
            .collect();
        ConvPolynomial::new(BitVec::from_raw(bits))
    }

    /// `c = (1,0,1,1,0,1,1)`, octal 133.
    pub fn default_pac() -> Self {
        ConvPolynomial::from_octal("133").expect("valid literal")
    }

    /// The identity pre-transform `c = (1)`.
    pub fn identity() -> Self {
        ConvPolynomial {
            coeffs: BitVec::from_raw(vec![1]),
        }
    }

    pub fn coeffs(&self) -> &[u8] {
        self.coeffs.as_slice()
    }

    pub fn memory(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_octal(&self) -> String {
        let value = self
            .coeffs()
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        format!("{value:o}")
    }
}

/// `x = u F_N` over GF(2).
pub fn polar_transform(u: &BitVec) -> Result<BitVec> {
    if !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    Ok(BitVec::from_raw(transform_slice(u.as_slice())))
}

pub(crate) fn transform_slice(u: &[u8]) -> Vec<u8> {
    if u.len() == 1 {
        return u.to_vec();
    }
    let mixed: Vec<u8> = u.chunks_exact(2).map(|p| p[0] ^ p[1]).collect();
    let upper: Vec<u8> = u.chunks_exact(2).map(|p| p[1]).collect();
    let mut x = transform_slice(&mixed);
    x.extend(transform_slice(&upper));
    x
}

/// Inverts [`polar_transform`] by running the parity split backwards.
pub fn inverse_polar_transform(x: &BitVec) -> Result<BitVec> {
    if !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    fn inv(x: &[u8]) -> Vec<u8> {
        if x.len() == 1 {
            return x.to_vec();
        }
        let (lo, hi) = x.split_at(x.len() / 2);
        let mixed = inv(lo);
        let upper = inv(hi);
        mixed
            .iter()
            .zip(&upper)
            .flat_map(|(&a, &b)| [a ^ b, b])
            .collect()
    }
    Ok(BitVec::from_raw(inv(x.as_slice())))
}

/// `v = uT`: `v_i = ⊕_{l ≤ min(i, m)} c_l u_{i−l}`. Works on prefixes as well
/// as full vectors.
pub fn pac_precode(u: &BitVec, c: &ConvPolynomial) -> BitVec {
    BitVec::from_raw(precode_slice(u.as_slice(), c.coeffs()))
}

pub(crate) fn precode_slice(u: &[u8], c: &[u8]) -> Vec<u8> {
    (0..u.len())
        .map(|i| {
            c.iter()
                .take(i + 1)
                .enumerate()
                .fold(0, |acc, (l, &cl)| acc ^ (cl & u[i - l]))
        })
        .collect()
}

/// Inverse of [`pac_precode`] by forward substitution (T is unit upper
/// triangular).
pub fn pac_unprecode(v: &BitVec, c: &ConvPolynomial) -> BitVec {
    let c = c.coeffs();
    let v = v.as_slice();
    let mut u = vec![0u8; v.len()];
    for i in 0..v.len() {
        let mut bit = v[i];
        for l in 1..c.len().min(i + 1) {
            bit ^= c[l] & u[i - l];
        }
        u[i] = bit;
    }
    BitVec::from_raw(u)
}

/// A fixed prefix `u_0..u_{j−1}` of the input vector, identifying the polar
/// coset `{ (prefix ‖ u') G_N }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathPrefix {
    code_length: usize,
    bits: BitVec,
}

impl PathPrefix {
    pub fn new(code_length: usize, bits: BitVec) -> Result<Self> {
        if !code_length.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(code_length));
        }
        if bits.len() > code_length {
            return Err(Error::PrefixTooLong {
                len: bits.len(),
                n: code_length,
            });
        }
        Ok(PathPrefix { code_length, bits })
    }

    pub fn empty(code_length: usize) -> Result<Self> {
        PathPrefix::new(code_length, BitVec::default())
    }

    pub fn code_length(&self) -> usize {
        self.code_length
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// True iff every frozen index below the prefix length holds a zero
    /// (u-domain).
    pub fn is_valid_for(&self, code: &CodeSpec) -> bool {
        self.code_length == code.length()
            && self
                .bits
                .as_slice()
                .iter()
                .enumerate()
                .all(|(i, &b)| b == 0 || !code.is_frozen(i))
    }
}

/// A polar code (`G_N = F_N`) or PAC code (`G_N = T F_N`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    length: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
    precoder: Option<ConvPolynomial>,
}

impl CodeSpec {
    /// Builds a code from its information set. Indices are sorted and must be
    /// distinct and below `length`.
    pub fn new(
        length: usize,
        info_set: impl IntoIterator<Item = usize>,
        precoder: Option<ConvPolynomial>,
    ) -> Result<Self> {
        if !length.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(length));
        }
        let mut frozen = vec![true; length];
        let mut info: Vec<usize> = Vec::new();
        for i in info_set {
            if i >= length {
                return Err(Error::InvalidCode(format!(
                    "index {i} out of range for N = {length}"
                )));
            }
            if !frozen[i] {
                return Err(Error::InvalidCode(format!("duplicate index {i}")));
            }
            frozen[i] = false;
            info.push(i);
        }
        info.sort_unstable();
        Ok(CodeSpec {
            length,
            info_set: info,
            frozen,
            precoder,
        })
    }

    pub fn from_frozen(
        length: usize,
        frozen_set: impl IntoIterator<Item = usize>,
        precoder: Option<ConvPolynomial>,
    ) -> Result<Self> {
        if !length.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(length));
        }
        let mut is_info = vec![true; length];
        for f in frozen_set {
            if f >= length {
                return Err(Error::InvalidCode(format!(
                    "index {f} out of range for N = {length}"
                )));
            }
            is_info[f] = false;
        }
        let info = (0..length).filter(|&i| is_info[i]);
        CodeSpec::new(length, info, precoder)
    }

    pub fn with_precoder(mut self, precoder: Option<ConvPolynomial>) -> Self {
        self.precoder = precoder;
        self
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn log2_length(&self) -> u32 {
        self.length.trailing_zeros()
    }

    pub fn dimension(&self) -> usize {
        self.info_set.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.length).filter(|&i| self.frozen[i]).collect()
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn precoder(&self) -> Option<&ConvPolynomial> {
        self.precoder.as_ref()
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.length as f64
    }

    /// Scatters `data` into the information positions, applies the
    /// pre-transform if any, then the polar transform.
    pub fn encode(&self, data: &BitVec) -> Result<BitVec> {
        if data.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                expected: self.dimension(),
                actual: data.len(),
            });
        }
        let mut u = vec![0u8; self.length];
        for (&pos, &bit) in self.info_set.iter().zip(data.as_slice()) {
            u[pos] = bit;
        }
        Ok(BitVec::from_raw(transform_slice(&self.to_v_domain(&u))))
    }

    /// Maps a u-domain (prefix) vector to the input of the polar transform.
    pub(crate) fn to_v_domain(&self, u: &[u8]) -> Vec<u8> {
        match &self.precoder {
            Some(c) => precode_slice(u, c.coeffs()),
            None => u.to_vec(),
        }
    }

    /// `τ(C) = max F`.
    pub fn last_frozen_index(&self) -> Result<usize> {
        self.frozen.iter().rposition(|&f| f).ok_or(Error::NoFrozenBits)
    }

    /// `MF(C) = |{ i ∈ A : i < τ(C) }|`.
    pub fn mixing_factor(&self) -> Result<usize> {
        let tau = self.last_frozen_index()?;
        Ok(self.info_set.iter().take_while(|&&i| i < tau).count())
    }
}
