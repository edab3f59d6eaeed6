//! Seeded synthetic returns and prices.
//!
//! Draws come from ChaCha20 (`rand_chacha`) seeded with `seed_from_u64`,
//! mapped to normals by `rand_distr::StandardNormal` (ziggurat). Both are
//! pure integer/IEEE arithmetic, so a given seed produces the same bytes on
//! every platform. Dates run over weekdays only; there is no holiday calendar.

use chrono::{Datelike, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dates::Date;
use crate::ingest::{PricePoint, PriceSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    Gaussian {
        n: usize,
        mu: f64,
        sigma: f64,
    },
    /// `n1` returns at `sigma1`, then `n2` at `sigma2`, same mean.
    RegimeSwitch {
        n1: usize,
        n2: usize,
        mu: f64,
        sigma1: f64,
        sigma2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(flatten)]
    pub kind: SynthKind,
    pub seed: u64,
    #[serde(with = "crate::event_study::iso_date")]
    pub start_date: Date,
    pub p0: f64,
    pub symbol: String,
}

impl SynthSpec {
    pub fn gaussian(n: usize, mu: f64, sigma: f64, seed: u64) -> Self {
        Self::with_kind(SynthKind::Gaussian { n, mu, sigma }, seed)
    }

    pub fn regime_switch(n1: usize, n2: usize, mu: f64, sigma1: f64, sigma2: f64, seed: u64) -> Self {
        Self::with_kind(
            SynthKind::RegimeSwitch {
                n1,
                n2,
                mu,
                sigma1,
                sigma2,
            },
            seed,
        )
    }

    fn with_kind(kind: SynthKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            start_date: Date::from_ymd_opt(2021, 1, 4).expect("valid date"),
            p0: 100.0,
            symbol: "SYNTH".into(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |s: String| Err(SynthError::InvalidSpec(s));
        let sigma_ok = |s: f64| s.is_finite() && s > 0.0;
        match self.kind {
            SynthKind::Gaussian { n, mu, sigma } => {
                if n < 2 {
                    return bad(format!("n must be at least 2, got {n}"));
                }
                if !mu.is_finite() || !sigma_ok(sigma) {
                    return bad(format!("need finite mu and sigma > 0, got mu={mu} sigma={sigma}"));
                }
            }
            SynthKind::RegimeSwitch {
                n1,
                n2,
                mu,
                sigma1,
                sigma2,
            } => {
                if n1 < 2 || n2 < 2 {
                    return bad(format!("n1 and n2 must be at least 2, got {n1} and {n2}"));
                }
                if !mu.is_finite() || !sigma_ok(sigma1) || !sigma_ok(sigma2) {
                    return bad(format!(
                        "need finite mu and sigmas > 0, got mu={mu} sigma1={sigma1} sigma2={sigma2}"
                    ));
                }
            }
        }
        if !(self.p0.is_finite() && self.p0 > 0.0) {
            return bad(format!("p0 must be positive, got {}", self.p0));
        }
        Ok(())
    }

    /// First trading day of the second regime: the date of price `n1`, so
    /// every return inside the after window is drawn at `sigma2`.
    pub fn regime_change_date(&self) -> Option<Date> {
        match self.kind {
            SynthKind::RegimeSwitch { n1, .. } => weekday_dates(self.start_date, n1 + 1).pop(),
            SynthKind::Gaussian { .. } => None,
        }
    }
}

/// Standard normal draws for a seed.
fn normals(seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || StandardNormal.sample(&mut rng))
}

pub fn gaussian_returns(spec: &SynthSpec) -> Result<Vec<f64>, SynthError> {
    spec.validate()?;
    match spec.kind {
        SynthKind::Gaussian { n, mu, sigma } => Ok(normals(spec.seed).take(n).map(|z| mu + sigma * z).collect()),
        _ => Err(SynthError::InvalidSpec("expected a gaussian spec".into())),
    }
}

pub fn regime_switch_returns(spec: &SynthSpec) -> Result<Vec<f64>, SynthError> {
    spec.validate()?;
    match spec.kind {
        SynthKind::RegimeSwitch {
            n1,
            n2,
            mu,
            sigma1,
            sigma2,
        } => Ok(normals(spec.seed)
            .take(n1 + n2)
            .enumerate()
            .map(|(i, z)| {
                let sigma = if i < n1 { sigma1 } else { sigma2 };
                mu + sigma * z
            })
            .collect()),
        _ => Err(SynthError::InvalidSpec("expected a regime-switch spec".into())),
    }
}

pub fn regime_switch_series(spec: &SynthSpec) -> Result<PriceSeries, SynthError> {
    let r = regime_switch_returns(spec)?;
    to_prices(&r, spec.p0, spec.start_date, &spec.symbol)
}

/// Price series for any spec kind.
pub fn generate_prices(spec: &SynthSpec) -> Result<PriceSeries, SynthError> {
    let r = match spec.kind {
        SynthKind::Gaussian { .. } => gaussian_returns(spec)?,
        SynthKind::RegimeSwitch { .. } => regime_switch_returns(spec)?,
    };
    to_prices(&r, spec.p0, spec.start_date, &spec.symbol)
}

/// `count` consecutive weekdays, starting at `start` or the Monday after it.
pub fn weekday_dates(start: Date, count: usize) -> Vec<Date> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date overflow");
    }
    out
}

/// Compound returns onto `p0`: `P_i = P_{i-1} * exp(R_i)`.
pub fn to_prices(returns: &[f64], p0: f64, start: Date, symbol: &str) -> Result<PriceSeries, SynthError> {
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(SynthError::InvalidSpec(format!("p0 must be positive, got {p0}")));
    }
    let dates = weekday_dates(start, returns.len() + 1);
    let mut price = p0;
    let mut pts = Vec::with_capacity(dates.len());
    pts.push(PricePoint {
        date: dates[0],
        close: p0,
    });
    for (r, &date) in returns.iter().zip(&dates[1..]) {
        price *= r.exp();
        pts.push(PricePoint { date, close: price });
    }
    PriceSeries::new(symbol, pts).map_err(|e| SynthError::InvalidSpec(e.to_string()))
}
