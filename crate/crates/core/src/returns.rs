//! Daily returns from closing prices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dates::Date;
use crate::ingest::PriceSeries;

#[derive(Debug, thiserror::Error)]
pub enum ReturnsError {
    #[error("{symbol}: need at least 2 prices for a return, got {len}")]
    TooShort { symbol: String, len: usize },
}

/// `Log` is `ln(P_i / P_{i-1})`. `Simple` is `(P_i - P_{i-1}) / P_{i-1}`,
/// its first-order approximation, kept only for sensitivity checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnMode {
    #[default]
    Log,
    Simple,
}

impl fmt::Display for ReturnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnMode::Log => "log",
            ReturnMode::Simple => "simple",
        })
    }
}

impl FromStr for ReturnMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnMode::Log),
            "simple" => Ok(ReturnMode::Simple),
            other => Err(format!("unknown return mode {other:?} (expected log or simple)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    /// Day `i`, the later of the two closes.
    pub date: Date,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    symbol: String,
    points: Vec<ReturnPoint>,
}

impl ReturnSeries {
    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn points(&self) -> &[ReturnPoint] {
        &self.points
    }

    /// Number of returns.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries, ReturnsError> {
    returns(prices, ReturnMode::Log)
}

pub fn returns(prices: &PriceSeries, mode: ReturnMode) -> Result<ReturnSeries, ReturnsError> {
    if prices.len() < 2 {
        return Err(ReturnsError::TooShort {
            symbol: prices.symbol().to_string(),
            len: prices.len(),
        });
    }
    let points = prices
        .points()
        .windows(2)
        .map(|w| {
            let value = match mode {
                ReturnMode::Log => (w[1].close / w[0].close).ln(),
                ReturnMode::Simple => (w[1].close - w[0].close) / w[0].close,
            };
            ReturnPoint { date: w[1].date, value }
        })
        .collect();
    Ok(ReturnSeries {
        symbol: prices.symbol().to_string(),
        points,
    })
}
