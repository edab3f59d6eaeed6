//! Binned Shannon entropy, sample standard deviation and symmetric
//! percentage difference.
//!
//! Binning convention: `m` equal-width bins spanning `[min, max]` of the
//! sample. Every bin is half-open `[lo, hi)` except the last, which is closed
//! so the maximum is counted. Probabilities are relative frequencies
//! `count / n`. A zero-range sample gets a single bin holding everything.
//!
//! Because the range is taken from the sample itself, an affine map
//! `x -> a*x + b` (a != 0) only relabels the bins, and the entropy is
//! unchanged. Entropy terms are summed over the sorted counts so the result
//! depends only on the multiset of counts, bit for bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("empty input")]
    EmptyInput,
    #[error("bin count must be at least 1")]
    InvalidBinCount,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("range too narrow for {m} distinct bin edges")]
    RangeTooNarrow { m: usize },
    #[error("need at least 2 values, got {len}")]
    TooShort { len: usize },
    #[error("percentage difference needs positive inputs, got {a} and {b}")]
    NonPositiveInput { a: f64, b: f64 },
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
}

/// Logarithm base of an entropy value: e (nats), 2 (shannons) or 10 (hartleys).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::E => "nats",
            LogBase::Two => "shannons",
            LogBase::Ten => "hartleys",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }

    /// `log_base(x)`.
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            _ => x.ln() / self.ln_base(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "e" | "nat" | "nats" => Ok(LogBase::E),
            "2" | "shannon" | "shannons" | "bits" => Ok(LogBase::Two),
            "10" | "hartley" | "hartleys" => Ok(LogBase::Ten),
            other => Err(format!("unknown log base {other:?} (expected e, 2 or 10)")),
        }
    }
}

/// Discrete probability density of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    probabilities: Vec<f64>,
    n: u64,
}

impl Histogram {
    /// Rebuild a histogram from edges and counts, checking every invariant.
    pub fn from_parts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self, MeasureError> {
        let bad = |s: &str| MeasureError::InvalidHistogram(s.to_string());
        if counts.is_empty() || edges.len() != counts.len() + 1 {
            return Err(bad("need M >= 1 counts and M + 1 edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(bad("non-finite edge"));
        }
        let degenerate = counts.len() == 1 && edges[0] == edges[1];
        if !degenerate && edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("edges must be strictly increasing"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(bad("histogram holds no observations"));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            edges,
            counts,
            probabilities,
            n,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of bins, M.
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.bins() == 1 && self.edges[0] == self.edges[1]
    }

    /// `bin_lo,bin_hi,count,probability`, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,probability\n");
        for i in 0..self.bins() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                self.probabilities[i]
            ));
        }
        out
    }
}

/// Equal-width edges over `[lo, hi]`; the last edge is `hi` exactly.
fn equal_width_edges(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * (i as f64 / m as f64)).collect();
    edges[m] = hi;
    edges
}

pub fn build_histogram(values: &[f64], m: usize) -> Result<Histogram, MeasureError> {
    if values.is_empty() {
        return Err(MeasureError::EmptyInput);
    }
    if m == 0 {
        return Err(MeasureError::InvalidBinCount);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MeasureError::NonFinite);
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });

    if lo == hi {
        return Histogram::from_parts(vec![lo, hi], vec![values.len() as u64]);
    }

    let edges = equal_width_edges(lo, hi, m);
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::RangeTooNarrow { m });
    }
    let width = hi - lo;
    let mut counts = vec![0u64; m];
    for &v in values {
        let k = if v >= hi {
            m - 1
        } else {
            // The arithmetic guess can be off by one next to an edge; settle
            // it against the stored edges so membership is exact.
            let mut k = (((v - lo) / width) * m as f64).floor().clamp(0.0, (m - 1) as f64) as usize;
            while k > 0 && v < edges[k] {
                k -= 1;
            }
            while k + 1 < m && v >= edges[k + 1] {
                k += 1;
            }
            k
        };
        counts[k] += 1;
    }
    Histogram::from_parts(edges, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub base: LogBase,
}

impl EntropyValue {
    pub fn unit(&self) -> &'static str {
        self.base.unit()
    }

    pub fn to_base(self, base: LogBase) -> EntropyValue {
        EntropyValue {
            value: self.value * self.base.ln_base() / base.ln_base(),
            base,
        }
    }
}

/// `-sum p_i log p_i` over occupied bins. Always within `[0, log_base M]`;
/// this is asserted on every call.
pub fn shannon_entropy(h: &Histogram, base: LogBase) -> EntropyValue {
    let n = h.n() as f64;
    let mut counts: Vec<u64> = h.counts().iter().copied().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let nats = counts.iter().fold(0.0f64, |acc, &c| {
        let p = c as f64 / n;
        acc - p * p.ln()
    });
    let value = match base {
        LogBase::E => nats,
        _ => nats / base.ln_base(),
    };
    let bound = base.log(h.bins() as f64);
    assert!(
        value >= 0.0 && value <= bound + 1e-12 * bound.max(1.0),
        "entropy {value} outside [0, {bound}] for {} bins",
        h.bins()
    );
    EntropyValue { value, base }
}

/// Sample standard deviation with the `N - 1` denominator.
pub fn std_dev(values: &[f64]) -> Result<f64, MeasureError> {
    if values.len() < 2 {
        return Err(MeasureError::TooShort { len: values.len() });
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

/// Symmetric percentage difference `100 * |a - b| / ((a + b) / 2)`.
pub fn pct_difference(a: f64, b: f64) -> Result<f64, MeasureError> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(MeasureError::NonPositiveInput { a, b });
    }
    Ok(100.0 * (a - b).abs() / ((a + b) / 2.0))
}

/// Standard deviation and entropy of one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub std: f64,
    pub entropy: EntropyValue,
    /// `log_base(m)`, the largest entropy `m` bins allow.
    pub entropy_max: f64,
    pub n: usize,
    pub m: usize,
}

pub fn measure_set(values: &[f64], m: usize, base: LogBase) -> Result<MeasureSet, MeasureError> {
    let std = std_dev(values)?;
    let hist = build_histogram(values, m)?;
    Ok(MeasureSet {
        std,
        entropy: shannon_entropy(&hist, base),
        entropy_max: base.log(m as f64),
        n: values.len(),
        m,
    })
}
