//! Quantities derived from spectra: minimum distance, relative error,
//! union-bound block error rate and side-by-side code reports.

use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::low_weight::{low_weight_spectrum, CountStatus, LowWeightReport};
use crate::wef::{WefCache, WeightEnumerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinDistance {
    pub weight: usize,
    /// The count at `weight` (and every count below it) is exact.
    pub certified: bool,
}

/// Smallest `w > 0` with `A_w > 0`.
pub fn min_distance(spectrum: &WeightEnumerator) -> Result<usize> {
    spectrum
        .min_positive_weight()
        .ok_or(Error::Empty("spectrum has no positive-weight terms"))
}

/// Minimum distance seen by a low-weight search; certified only when the
/// path tree was exhausted.
pub fn min_distance_of_report(report: &LowWeightReport) -> Result<MinDistance> {
    let weight = min_distance(&report.spectrum)?;
    Ok(MinDistance {
        weight,
        certified: report.status[..=weight].iter().all(|&s| s == CountStatus::Exact),
    })
}

/// `|exact − estimate| / exact`.
pub fn relative_error(exact: f64, estimate: f64) -> Result<f64> {
    if !(exact > 0.0) {
        return Err(Error::InvalidParameter(format!("exact count must be positive, got {exact}")));
    }
    Ok((exact - estimate).abs() / exact)
}

/// Relative error from natural logs of the two counts, for counts that do
/// not fit in a float.
pub fn relative_error_ln(ln_exact: f64, ln_estimate: f64) -> f64 {
    (ln_estimate - ln_exact).exp_m1().abs()
}

/// `ln Q(x)` for the Gaussian tail `Q`, accurate far into the tail.
pub fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        // asymptotic expansion; erfc underflows out here
        let x2 = x * x;
        -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// BPSK/AWGN union bound `Σ_{w≥1} A_w Q(√(2wR·Eb/N0))`, clamped to `[0, 1]`.
/// Terms are summed in log space so huge counts are fine.
pub fn union_bound_bler(spectrum: &WeightEnumerator, ebn0_db: f64, rate: f64) -> f64 {
    let ln_counts: Vec<(usize, f64)> = (1..=spectrum.max_degree())
        .filter_map(|w| spectrum.ln_coeff(w).map(|l| (w, l)))
        .collect();
    union_bound_bler_ln(&ln_counts, ebn0_db, rate)
}

/// Same bound from `(w, ln A_w)` pairs; weight 0 is skipped.
pub fn union_bound_bler_ln(ln_counts: &[(usize, f64)], ebn0_db: f64, rate: f64) -> f64 {
    let gamma = 10f64.powf(ebn0_db / 10.0);
    let terms: Vec<f64> = ln_counts
        .iter()
        .filter(|&&(w, _)| w > 0)
        .map(|&(w, ln_a)| ln_a + ln_q((2.0 * w as f64 * rate * gamma).sqrt()))
        .collect();
    let Some(&top) = terms.iter().max_by(|a, b| a.total_cmp(b)) else {
        return 0.0;
    };
    let ln_sum = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    ln_sum.exp().clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub weight: usize,
    pub count: BigUint,
    pub status: CountStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeReport {
    pub id: String,
    pub length: usize,
    pub dimension: usize,
    pub d_min: Option<MinDistance>,
    pub entries: Vec<ReportEntry>,
    pub last_frozen_index: usize,
    pub mixing_factor: usize,
    pub list_size: usize,
}

impl CodeReport {
    pub fn from_low_weight(id: impl Into<String>, code: &CodeSpec, report: &LowWeightReport) -> Self {
        CodeReport {
            id: id.into(),
            length: code.length(),
            dimension: code.dimension(),
            d_min: min_distance_of_report(report).ok(),
            entries: report
                .entries()
                .into_iter()
                .filter(|&(w, _, _)| w > 0)
                .map(|(weight, count, status)| ReportEntry { weight, count, status })
                .collect(),
            last_frozen_index: report.last_frozen_index,
            mixing_factor: report.mixing_factor,
            list_size: report.list_size,
        }
    }
}

impl fmt::Display for CodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({},{}) τ={} MF={} L={} d_min=", self.id, self.length, self.dimension, self.last_frozen_index, self.mixing_factor, self.list_size)?;
        match self.d_min {
            Some(d) => write!(f, "{}{}", d.weight, if d.certified { "" } else { "*" })?,
            None => write!(f, "?")?,
        }
        for e in &self.entries {
            let rel = if e.status == CountStatus::LowerBound { "≥" } else { "=" };
            write!(f, " A{}{}{}", e.weight, rel, e.count)?;
        }
        Ok(())
    }
}

/// One low-weight report row per code, computed in parallel.
pub fn compare_report(
    codes: &[(String, CodeSpec)],
    list_size: usize,
    max_weight: usize,
    cache: &WefCache,
) -> Result<Vec<CodeReport>> {
    if codes.is_empty() {
        return Err(Error::Empty("no codes to compare"));
    }
    codes
        .par_iter()
        .map(|(id, code)| {
            let report = low_weight_spectrum(code, list_size, max_weight, cache)?;
            Ok(CodeReport::from_low_weight(id.clone(), code, &report))
        })
        .collect()
}
