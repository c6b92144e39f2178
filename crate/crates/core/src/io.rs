//! Spectrum files (CSV and JSON) and the `pswef v1` cache format.
//!
//! Counts are written as decimal strings so big integers survive a round
//! trip; estimates are written as shortest round-trip floats.

use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::high_weight::SpectrumEstimate;
use crate::low_weight::{CountStatus, LowWeightReport};
use crate::wef::{ln_big, CacheKey, WefCache, WeightEnumerator};

pub const CACHE_HEADER: &str = "pswef v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    LowWeight,
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowFlag {
    Exact,
    LowerBound,
    Estimate,
}

impl RowFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RowFlag::Exact => "exact",
            RowFlag::LowerBound => "lower-bound",
            RowFlag::Estimate => "estimate",
        }
    }
}

impl fmt::Display for RowFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RowFlag {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(RowFlag::Exact),
            "lower-bound" => Ok(RowFlag::LowerBound),
            "estimate" => Ok(RowFlag::Estimate),
            other => Err(format!("unknown flag {other:?}")),
        }
    }
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::LowWeight => "low-weight",
            Provenance::Estimate => "estimate",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Provenance::Exact),
            "low-weight" => Ok(Provenance::LowWeight),
            "estimate" => Ok(Provenance::Estimate),
            other => Err(format!("unknown provenance {other:?}")),
        }
    }
}

/// A count: exact integer or a real-valued estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum Count {
    Integer(BigUint),
    Real(f64),
}

impl Count {
    pub fn ln(&self) -> Option<f64> {
        match self {
            Count::Integer(c) if !c.is_zero() => Some(ln_big(c)),
            Count::Real(x) if *x > 0.0 => Some(x.ln()),
            _ => None,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Integer(c) => write!(f, "{c}"),
            Count::Real(x) => write!(f, "{x:e}"),
        }
    }
}

impl FromStr for Count {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            return BigUint::from_str(s).map(Count::Integer).map_err(|e| e.to_string());
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() && x >= 0.0 => Ok(Count::Real(x)),
            _ => Err(format!("invalid count {s:?}")),
        }
    }
}

/// Header of a spectrum file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub n: usize,
    pub k: usize,
    pub construction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precoder: Option<String>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_frozen_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing_factor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// `2^MF/M` for estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Every count is certified exact (exhaustive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

impl SpectrumMeta {
    pub fn new(n: usize, k: usize, construction: impl Into<String>, precoder: Option<String>, provenance: Provenance) -> Self {
        SpectrumMeta {
            n,
            k,
            construction: construction.into(),
            precoder,
            provenance,
            last_frozen_index: None,
            mixing_factor: None,
            list_size: None,
            samples: None,
            scale: None,
            seed: None,
            converged: None,
            certified: None,
        }
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("construction", self.construction.clone()),
            ("provenance", self.provenance.as_str().to_string()),
        ];
        let opt = |out: &mut Vec<_>, key, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        opt(&mut out, "precoder", self.precoder.clone());
        opt(&mut out, "last_frozen_index", self.last_frozen_index.map(|v| v.to_string()));
        opt(&mut out, "mixing_factor", self.mixing_factor.map(|v| v.to_string()));
        opt(&mut out, "list_size", self.list_size.map(|v| v.to_string()));
        opt(&mut out, "samples", self.samples.map(|v| v.to_string()));
        opt(&mut out, "scale", self.scale.clone());
        opt(&mut out, "seed", self.seed.map(|v| v.to_string()));
        opt(&mut out, "converged", self.converged.map(|v| v.to_string()));
        opt(&mut out, "certified", self.certified.map(|v| v.to_string()));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub w: usize,
    pub count: Count,
    /// `ln A_w − k·ln 2`, i.e. normalized by the code size.
    pub normalized_ln: Option<f64>,
    pub flag: RowFlag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFile {
    pub meta: SpectrumMeta,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (csv|json)")),
        }
    }
}

fn normalized(ln: Option<f64>, k: usize) -> Option<f64> {
    ln.map(|l| l - k as f64 * std::f64::consts::LN_2)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl SpectrumFile {
    fn row(w: usize, count: Count, flag: RowFlag, k: usize) -> SpectrumRow {
        SpectrumRow {
            w,
            normalized_ln: normalized(count.ln(), k),
            count,
            flag,
        }
    }

    /// Rows for every nonzero coefficient of an exact spectrum.
    pub fn from_exact(mut meta: SpectrumMeta, spectrum: &WeightEnumerator) -> Self {
        meta.provenance = Provenance::Exact;
        meta.certified = Some(true);
        let k = meta.k;
        let rows = spectrum
            .support()
            .map(|w| Self::row(w, Count::Integer(spectrum.coeff(w)), RowFlag::Exact, k))
            .collect();
        SpectrumFile { meta, rows }
    }

    /// Rows for the nonzero counts of a low-weight search. Counts that were
    /// unchanged at half the list size are written as `exact`.
    pub fn from_low_weight(mut meta: SpectrumMeta, report: &LowWeightReport) -> Self {
        meta.provenance = Provenance::LowWeight;
        meta.list_size = Some(report.list_size);
        meta.mixing_factor = Some(report.mixing_factor);
        meta.last_frozen_index = Some(report.last_frozen_index);
        meta.certified = Some(report.exhausted);
        let k = meta.k;
        let rows = report
            .entries()
            .into_iter()
            .map(|(w, c, s)| {
                let flag = if s == CountStatus::LowerBound { RowFlag::LowerBound } else { RowFlag::Exact };
                Self::row(w, Count::Integer(c), flag, k)
            })
            .collect();
        SpectrumFile { meta, rows }
    }

    /// Rows `Â_w` for every weight seen in the sampled cosets.
    pub fn from_estimate(mut meta: SpectrumMeta, est: &SpectrumEstimate) -> Self {
        meta.provenance = Provenance::Estimate;
        meta.samples = Some(est.samples);
        meta.mixing_factor = Some(est.mixing_factor);
        meta.scale = Some(format!("2^{}/{}", est.mixing_factor, est.samples));
        meta.converged = Some(est.converged);
        meta.certified = Some(false);
        let k = meta.k;
        let rows = est
            .accumulated
            .support()
            .map(|w| {
                let ln = est.ln_estimate(w);
                SpectrumRow {
                    w,
                    count: Count::Real(est.estimate(w)),
                    normalized_ln: normalized(ln, k),
                    flag: RowFlag::Estimate,
                }
            })
            .collect();
        SpectrumFile { meta, rows }
    }

    /// The integer rows as a polynomial; `None` if any row is real-valued.
    pub fn to_enumerator(&self) -> Option<WeightEnumerator> {
        let mut coeffs = vec![BigUint::zero(); self.meta.n + 1];
        for r in &self.rows {
            match &r.count {
                Count::Integer(c) => *coeffs.get_mut(r.w)? = c.clone(),
                Count::Real(_) => return None,
            }
        }
        Some(WeightEnumerator::from_big(coeffs))
    }

    pub fn count(&self, w: usize) -> Option<&Count> {
        self.rows.iter().find(|r| r.w == w).map(|r| &r.count)
    }

    fn check_rows(&self, line_of: impl Fn(usize) -> usize) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.w > self.meta.n {
                return Err(parse_err(line_of(i), format!("weight {} exceeds n = {}", r.w, self.meta.n)));
            }
            if i > 0 && r.w <= self.rows[i - 1].w {
                return Err(parse_err(line_of(i), format!("weight {} does not increase (previous {})", r.w, self.rows[i - 1].w)));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        self.check_rows(|i| i + 1)?;
        let mut out = String::new();
        for (key, value) in self.meta.pairs() {
            writeln!(out, "# {key}={value}").unwrap();
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        wtr.write_record(["w", "count", "normalized_ln", "flag"]).map_err(io)?;
        for r in &self.rows {
            let norm = r.normalized_ln.map(|x| x.to_string()).unwrap_or_default();
            wtr.write_record([r.w.to_string(), r.count.to_string(), norm, r.flag.to_string()])
                .map_err(io)?;
        }
        out.push_str(&String::from_utf8(wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?).unwrap());
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta: Vec<(String, String, usize)> = Vec::new();
        let mut body_start = 0;
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.strip_prefix('#') else {
                body_start = i;
                break;
            };
            body_start = i + 1;
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string(), i + 1));
            }
        }
        let get = |key: &str| meta.iter().find(|(k, _, _)| k == key);
        let req = |key: &'static str| get(key).ok_or_else(|| parse_err(1, format!("missing header field {key:?}")));
        fn num<T: FromStr>(entry: Option<&(String, String, usize)>) -> Result<Option<T>> {
            match entry {
                None => Ok(None),
                Some((k, v, line)) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| parse_err(*line, format!("invalid value {v:?} for {k}"))),
            }
        }
        let (_, prov, prov_line) = req("provenance")?;
        let mut m = SpectrumMeta::new(
            num(Some(req("n")?))?.unwrap(),
            num(Some(req("k")?))?.unwrap(),
            req("construction")?.1.clone(),
            get("precoder").map(|e| e.1.clone()),
            prov.parse().map_err(|e: String| parse_err(*prov_line, e))?,
        );
        m.last_frozen_index = num(get("last_frozen_index"))?;
        m.mixing_factor = num(get("mixing_factor"))?;
        m.list_size = num(get("list_size"))?;
        m.samples = num(get("samples"))?;
        m.scale = get("scale").map(|e| e.1.clone());
        m.seed = num(get("seed"))?;
        m.converged = num(get("converged"))?;
        m.certified = num(get("certified"))?;

        let body: String = text.lines().skip(body_start).collect::<Vec<_>>().join("\n");
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = rdr.headers().map_err(|e| parse_err(body_start + 1, e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["w", "count", "normalized_ln", "flag"] {
            return Err(parse_err(body_start + 1, format!("unexpected column header {:?}", header.iter().collect::<Vec<_>>())));
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize) + body_start;
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize) + body_start;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let w = field(0).parse().map_err(|_| parse_err(line, format!("invalid weight {:?}", field(0))))?;
            let count = field(1).parse().map_err(|e: String| parse_err(line, e))?;
            let normalized_ln = match field(2) {
                "" => None,
                s => Some(s.parse().map_err(|_| parse_err(line, format!("invalid normalized_ln {s:?}")))?),
            };
            let flag = field(3).parse().map_err(|e: String| parse_err(line, e))?;
            rows.push(SpectrumRow { w, count, normalized_ln, flag });
            lines.push(line);
        }
        let file = SpectrumFile { meta: m, rows };
        file.check_rows(|i| lines[i])?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        self.check_rows(|i| i + 1)?;
        let meta = serde_json::to_string_pretty(&self.meta).map_err(|e| Error::Io(e.to_string()))?;
        let mut out = String::from("{\n  \"meta\": ");
        out.push_str(&meta.replace('\n', "\n  "));
        out.push_str(",\n  \"rows\": [");
        for (i, r) in self.rows.iter().enumerate() {
            let row = JsonRow {
                w: r.w,
                count: r.count.to_string(),
                normalized_ln: r.normalized_ln,
                flag: r.flag,
            };
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&serde_json::to_string(&row).map_err(|e| Error::Io(e.to_string()))?);
        }
        out.push_str("\n  ]\n}\n");
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDoc = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
        // rows are written one per line; point errors at the right one
        let row_lines: Vec<usize> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| l.contains("\"w\""))
            .map(|(i, _)| i + 1)
            .collect();
        let line_of = |i: usize| row_lines.get(i).copied().unwrap_or(0);
        let rows = doc
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(SpectrumRow {
                    w: r.w,
                    count: r.count.parse().map_err(|e: String| parse_err(line_of(i), e))?,
                    normalized_ln: r.normalized_ln,
                    flag: r.flag,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let file = SpectrumFile { meta: doc.meta, rows };
        file.check_rows(line_of)?;
        Ok(file)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parses either format, picked by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_csv(text)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    w: usize,
    count: String,
    #[serde(default)]
    normalized_ln: Option<f64>,
    flag: RowFlag,
}

#[derive(Deserialize)]
struct JsonDoc {
    meta: SpectrumMeta,
    rows: Vec<JsonRow>,
}

pub fn write_spectrum(path: &std::path::Path, file: &SpectrumFile, format: Format) -> Result<()> {
    std::fs::write(path, file.render(format)?)?;
    Ok(())
}

pub fn read_spectrum(path: &std::path::Path) -> Result<SpectrumFile> {
    SpectrumFile::parse(&std::fs::read_to_string(path)?)
}

fn bits_to_hex(bits: &[u8]) -> String {
    bits.chunks(4)
        .map(|c| {
            let nib = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
            char::from_digit(nib, 16).unwrap()
        })
        .collect()
}

fn hex_to_bits(hex: &str, len: usize) -> std::result::Result<Vec<u8>, String> {
    if hex.len() != len.div_ceil(4) {
        return Err(format!("prefix hex {hex:?} has the wrong length for {len} bits"));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for ch in hex.chars() {
        let nib = ch.to_digit(16).ok_or_else(|| format!("invalid hex digit {ch:?}"))?;
        bits.extend((0..4).map(|i| ((nib >> (3 - i)) & 1) as u8));
    }
    if bits[len..].iter().any(|&b| b != 0) {
        return Err("nonzero padding bits in prefix".into());
    }
    bits.truncate(len);
    Ok(bits)
}

/// Writes every cache entry in the `pswef v1` format, sorted by key.
pub fn cache_store<W: Write>(mut out: W, cache: &WefCache) -> Result<()> {
    writeln!(out, "{CACHE_HEADER}")?;
    for (key, wef) in cache.entries() {
        let bits = key.bits();
        let coeffs: Vec<String> = wef.coeffs().iter().map(|c| c.to_string()).collect();
        writeln!(out, "{};{};{};{}", key.code_length(), bits_to_hex(&bits), bits.len(), coeffs.join(","))?;
    }
    Ok(())
}

/// Reads a `pswef v1` file into `cache`, returning the number of entries
/// read. Every entry is checked for shape and mass (`Σ = 2^{N−len}`) so a
/// damaged file cannot change any result.
pub fn cache_load<R: BufRead>(input: R, cache: &WefCache) -> Result<usize> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != CACHE_HEADER {
        return Err(Error::CacheVersion(header));
    }
    let mut parsed = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |msg: String| parse_err(line_no, msg);
        let parts: Vec<&str> = line.split(';').collect();
        let [n, hex, len, coeffs] = parts[..] else {
            return Err(fail(format!("expected 4 fields, found {}", parts.len())));
        };
        let n: usize = n.parse().map_err(|_| fail(format!("invalid length {n:?}")))?;
        if n == 0 || !n.is_power_of_two() {
            return Err(fail(format!("length {n} is not a power of two")));
        }
        let len: usize = len.parse().map_err(|_| fail(format!("invalid prefix length {len:?}")))?;
        if len > n {
            return Err(fail(format!("prefix length {len} exceeds {n}")));
        }
        let bits = hex_to_bits(hex, len).map_err(fail)?;
        let coeffs = coeffs
            .split(',')
            .map(|c| BigUint::from_str(c.trim()).map_err(|_| fail(format!("invalid coefficient {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() > n + 1 {
            return Err(fail(format!("{} coefficients for length {n}", coeffs.len())));
        }
        let mass: BigUint = coeffs.iter().sum();
        if mass != BigUint::one() << (n - len) {
            return Err(fail(format!("coefficients sum to {mass}, expected 2^{}", n - len)));
        }
        parsed.push((CacheKey::new(n, &bits), WeightEnumerator::from_big(coeffs)));
    }
    let count = parsed.len();
    for (key, wef) in parsed {
        cache.insert(key, Arc::new(wef));
    }
    Ok(count)
}

pub fn cache_store_path(path: &std::path::Path, cache: &WefCache) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    cache_store(&mut f, cache)?;
    f.flush()?;
    Ok(())
}

pub fn cache_load_path(path: &std::path::Path, cache: &WefCache) -> Result<usize> {
    cache_load(std::io::BufReader::new(std::fs::File::open(path)?), cache)
}
