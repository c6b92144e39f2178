use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Dense weight enumerating polynomial `Σ_w A_w X^w`, `w = 0..=N`, with
/// exact nonnegative integer coefficients.
///
/// Coefficients are held as `u128` while they fit and move to arbitrary
/// precision on the first overflow. Equality is by value regardless of the
/// representation.
#[derive(Clone)]
pub struct WeightEnumerator {
    coeffs: Coeffs,
}

#[derive(Clone)]
enum Coeffs {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

fn bits_u128(x: u128) -> u32 {
    128 - x.leading_zeros()
}

impl WeightEnumerator {
    /// The zero polynomial with room for degrees `0..=max_degree`.
    pub fn zero(max_degree: usize) -> Self {
        WeightEnumerator {
            coeffs: Coeffs::Small(vec![0; max_degree + 1]),
        }
    }

    /// `X^w` inside a polynomial of degree bound `max_degree`.
    pub fn monomial(max_degree: usize, w: usize) -> Self {
        let mut c = vec![0; max_degree + 1];
        c[w] = 1;
        WeightEnumerator {
            coeffs: Coeffs::Small(c),
        }
    }

    /// `(1 + X)^n`.
    pub fn binomial(n: usize) -> Self {
        let mut row = vec![BigUint::from(1u32)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(BigUint::from(1u32));
            for w in row.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigUint::from(1u32));
            row = next;
        }
        WeightEnumerator::from_big(row)
    }

    /// Builds from big-integer coefficients `A_0, A_1, ..`.
    pub fn from_big(coeffs: Vec<BigUint>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least A_0");
        let small: Option<Vec<u128>> = coeffs.iter().map(|c| c.to_u128()).collect();
        match small {
            Some(s) => WeightEnumerator {
                coeffs: Coeffs::Small(s),
            },
            None => WeightEnumerator {
                coeffs: Coeffs::Big(coeffs),
            },
        }
    }

    pub fn from_counts(coeffs: &[u128]) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least A_0");
        WeightEnumerator {
            coeffs: Coeffs::Small(coeffs.to_vec()),
        }
    }

    /// Largest representable degree (`N` for a length-`N` code).
    pub fn max_degree(&self) -> usize {
        self.len() - 1
    }

    fn len(&self) -> usize {
        match &self.coeffs {
            Coeffs::Small(c) => c.len(),
            Coeffs::Big(c) => c.len(),
        }
    }

    pub fn coeff(&self, w: usize) -> BigUint {
        match &self.coeffs {
            Coeffs::Small(c) => c.get(w).copied().map(BigUint::from).unwrap_or_default(),
            Coeffs::Big(c) => c.get(w).cloned().unwrap_or_default(),
        }
    }

    pub fn coeffs(&self) -> Vec<BigUint> {
        (0..self.len()).map(|w| self.coeff(w)).collect()
    }

    pub fn is_coeff_zero(&self, w: usize) -> bool {
        match &self.coeffs {
            Coeffs::Small(c) => c.get(w).map_or(true, |&x| x == 0),
            Coeffs::Big(c) => c.get(w).map_or(true, Zero::is_zero),
        }
    }

    pub fn is_zero(&self) -> bool {
        (0..self.len()).all(|w| self.is_coeff_zero(w))
    }

    /// Natural log of `A_w`, `None` when `A_w = 0`.
    pub fn ln_coeff(&self, w: usize) -> Option<f64> {
        match &self.coeffs {
            Coeffs::Small(c) => c.get(w).filter(|&&x| x > 0).map(|&x| (x as f64).ln()),
            Coeffs::Big(c) => c.get(w).filter(|x| !x.is_zero()).map(ln_big),
        }
    }

    /// `A_w` as a float (may be `inf` for huge counts).
    pub fn coeff_f64(&self, w: usize) -> f64 {
        match &self.coeffs {
            Coeffs::Small(c) => c.get(w).map_or(0.0, |&x| x as f64),
            Coeffs::Big(c) => c.get(w).and_then(|x| x.to_f64()).unwrap_or(0.0),
        }
    }

    /// `Σ_w A_w`, the cardinality of the enumerated set.
    pub fn total(&self) -> BigUint {
        match &self.coeffs {
            Coeffs::Small(c) => {
                let mut acc = BigUint::zero();
                let mut part: u128 = 0;
                for &x in c {
                    match part.checked_add(x) {
                        Some(s) => part = s,
                        None => {
                            acc += part;
                            part = x;
                        }
                    }
                }
                acc + part
            }
            Coeffs::Big(c) => c.iter().sum(),
        }
    }

    pub fn ln_total(&self) -> f64 {
        ln_big(&self.total())
    }

    /// Smallest `w > 0` with `A_w > 0`.
    pub fn min_positive_weight(&self) -> Option<usize> {
        (1..self.len()).find(|&w| !self.is_coeff_zero(w))
    }

    /// Indices with nonzero coefficients.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&w| !self.is_coeff_zero(w))
    }

    /// `A_w ≤ B_w` for every `w`.
    pub fn le_coefficientwise(&self, other: &WeightEnumerator) -> bool {
        let n = self.len().max(other.len());
        (0..n).all(|w| self.coeff(w) <= other.coeff(w))
    }

    /// Keeps degrees `0..=max_degree`, dropping higher terms.
    pub fn truncated(&self, max_degree: usize) -> WeightEnumerator {
        let keep = (max_degree + 1).min(self.len());
        match &self.coeffs {
            Coeffs::Small(c) => WeightEnumerator {
                coeffs: Coeffs::Small(c[..keep].to_vec()),
            },
            Coeffs::Big(c) => WeightEnumerator::from_big(c[..keep].to_vec()),
        }
    }

    fn to_big_vec(&self) -> Vec<BigUint> {
        match &self.coeffs {
            Coeffs::Small(c) => c.iter().map(|&x| BigUint::from(x)).collect(),
            Coeffs::Big(c) => c.clone(),
        }
    }

    fn promote(&mut self) {
        if let Coeffs::Small(_) = self.coeffs {
            self.coeffs = Coeffs::Big(self.to_big_vec());
        }
    }

    /// `self += other`; the degree bound grows to the larger of the two.
    pub fn add_assign(&mut self, other: &WeightEnumerator) {
        let len = self.len().max(other.len());
        if let (Coeffs::Small(a), Coeffs::Small(b)) = (&mut self.coeffs, &other.coeffs) {
            a.resize(len, 0);
            if a.iter().zip(b).all(|(&x, &y)| x.checked_add(y).is_some()) {
                for (x, &y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                return;
            }
        }
        self.promote();
        if let Coeffs::Big(a) = &mut self.coeffs {
            a.resize(len, BigUint::zero());
            match &other.coeffs {
                Coeffs::Small(b) => {
                    for (x, &y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                }
                Coeffs::Big(b) => {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                }
            }
        }
    }

    /// Schoolbook product; the result has degree bound equal to the sum of
    /// the operands' bounds.
    pub fn mul(&self, other: &WeightEnumerator) -> WeightEnumerator {
        let len = self.len() + other.len() - 1;
        if let (Coeffs::Small(a), Coeffs::Small(b)) = (&self.coeffs, &other.coeffs) {
            let max_a = a.iter().copied().max().unwrap_or(0);
            let max_b = b.iter().copied().max().unwrap_or(0);
            let terms = a.len().min(b.len()) as u128;
            // each output coefficient is a sum of at most `terms` products
            if bits_u128(max_a) + bits_u128(max_b) + bits_u128(terms) <= 128 {
                let mut out = vec![0u128; len];
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (o, &y) in out[i..].iter_mut().zip(b) {
                        *o += x * y;
                    }
                }
                return WeightEnumerator {
                    coeffs: Coeffs::Small(out),
                };
            }
        }
        let a = self.to_big_vec();
        let b = other.to_big_vec();
        let mut out = vec![BigUint::zero(); len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        WeightEnumerator::from_big(out)
    }
}

impl PartialEq for WeightEnumerator {
    fn eq(&self, other: &Self) -> bool {
        if let (Coeffs::Small(a), Coeffs::Small(b)) = (&self.coeffs, &other.coeffs) {
            let n = a.len().max(b.len());
            return (0..n).all(|w| a.get(w).copied().unwrap_or(0) == b.get(w).copied().unwrap_or(0));
        }
        let n = self.len().max(other.len());
        (0..n).all(|w| self.coeff(w) == other.coeff(w))
    }
}

impl Eq for WeightEnumerator {}

impl fmt::Debug for WeightEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightEnumerator({self})")
    }
}

impl fmt::Display for WeightEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for w in self.support() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = self.coeff(w);
            match w {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}X")?,
                _ => write!(f, "{c}X^{w}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Natural log of a positive big integer without overflowing `f64`.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_rows() {
        let p = WeightEnumerator::binomial(4);
        assert_eq!(p, WeightEnumerator::from_counts(&[1, 4, 6, 4, 1]));
        assert_eq!(p.total(), BigUint::from(16u32));
        assert_eq!(WeightEnumerator::binomial(0), WeightEnumerator::from_counts(&[1]));
    }

    #[test]
    fn product_of_binomials() {
        let a = WeightEnumerator::binomial(3);
        let b = WeightEnumerator::binomial(5);
        assert_eq!(a.mul(&b), WeightEnumerator::binomial(8));
    }

    #[test]
    fn overflow_promotes_to_big() {
        // (1+X)^200 has coefficients beyond 2^128 in the middle
        let half = WeightEnumerator::binomial(100);
        let full = half.mul(&half);
        assert_eq!(full, WeightEnumerator::binomial(200));
        assert_eq!(full.total(), BigUint::from(1u32) << 200u32);

        let mut acc = WeightEnumerator::from_counts(&[u128::MAX, 1]);
        acc.add_assign(&WeightEnumerator::from_counts(&[1, 1]));
        assert_eq!(acc.coeff(0), BigUint::from(u128::MAX) + 1u32);
        assert_eq!(acc.coeff(1), BigUint::from(2u32));
    }

    #[test]
    fn equality_ignores_representation_and_padding() {
        let small = WeightEnumerator::from_counts(&[1, 2, 0]);
        let big = WeightEnumerator {
            coeffs: Coeffs::Big(vec![BigUint::from(1u32), BigUint::from(2u32)]),
        };
        assert_eq!(small, big);
    }

    #[test]
    fn logs_of_huge_counts() {
        let x = BigUint::from(1u32) << 2000u32;
        let expected = 2000.0 * std::f64::consts::LN_2;
        assert!((ln_big(&x) - expected).abs() < 1e-9);
        let p = WeightEnumerator::binomial(10);
        assert!((p.ln_coeff(5).unwrap() - 252f64.ln()).abs() < 1e-12);
        assert_eq!(WeightEnumerator::zero(3).ln_coeff(1), None);
    }

    #[test]
    fn display_lists_support() {
        let p = WeightEnumerator::from_counts(&[1, 0, 2, 0, 1]);
        assert_eq!(p.to_string(), "1 + 2X^2 + 1X^4");
        assert_eq!(p.min_positive_weight(), Some(2));
    }
}
