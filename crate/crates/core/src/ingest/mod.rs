//! Price histories and asset-universe metadata.

mod csv;
mod fetch;
mod universe;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dates::{format_date, Date};

pub use self::csv::{parse_price_csv, to_csv};
pub use self::fetch::{fetch_history, fetch_many, render_url, FetchOptions};
pub use self::universe::{
    default_universe, load_universe, AssetMeta, AssetUniverse, Group, MembershipChange, MembershipEvent,
    DEFAULT_UNIVERSE,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate date {}", format_date(*.0))]
    DuplicateDate(Date),
    #[error("series contains no data rows")]
    EmptySeries,
    #[error("no prices between {} and {}", format_date(*start), format_date(*end))]
    EmptySlice { start: Date, end: Date },
    #[error("start date {} is after end date {}", format_date(*start), format_date(*end))]
    InvalidRange { start: Date, end: Date },
    #[error("invalid price series: {0}")]
    InvalidSeries(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("HTTP status {0}")]
    HttpStatus(u16),
    #[error("endpoint template error: {0}")]
    Template(String),
    #[error("universe parse error at line {line}: {reason}")]
    UniverseParse { line: u64, reason: String },
    #[error("duplicate symbol {0} in universe")]
    DuplicateSymbol(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: Date,
    pub close: f64,
}

/// Daily closes of one asset. Dates strictly increase and every close is a
/// positive finite number; the constructor rejects anything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    symbol: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(symbol: impl Into<String>, points: Vec<PricePoint>) -> Result<Self, IngestError> {
        if points.is_empty() {
            return Err(IngestError::EmptySeries);
        }
        if let Some(p) = points.iter().find(|p| !(p.close.is_finite() && p.close > 0.0)) {
            return Err(IngestError::InvalidSeries(format!(
                "non-positive or non-finite close {} on {}",
                p.close,
                format_date(p.date)
            )));
        }
        for w in points.windows(2) {
            if w[1].date == w[0].date {
                return Err(IngestError::DuplicateDate(w[1].date));
            }
            if w[1].date < w[0].date {
                return Err(IngestError::InvalidSeries(format!(
                    "dates not increasing at {}",
                    format_date(w[1].date)
                )));
            }
        }
        Ok(Self {
            symbol: symbol.into(),
            points,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_date(&self) -> Date {
        self.points[0].date
    }

    pub fn last_date(&self) -> Date {
        self.points[self.points.len() - 1].date
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.close)
    }

    /// Points with `start <= date <= end`, in order.
    pub fn slice_by_dates(&self, start: Date, end: Date) -> Result<Self, IngestError> {
        if start > end {
            return Err(IngestError::InvalidRange { start, end });
        }
        let lo = self.points.partition_point(|p| p.date < start);
        let hi = self.points.partition_point(|p| p.date <= end);
        if lo >= hi {
            return Err(IngestError::EmptySlice { start, end });
        }
        Ok(Self {
            symbol: self.symbol.clone(),
            points: self.points[lo..hi].to_vec(),
        })
    }

    /// Sub-series by index range; the range must be non-empty.
    pub(crate) fn sub_range(&self, range: std::ops::Range<usize>) -> Self {
        debug_assert!(!range.is_empty());
        Self {
            symbol: self.symbol.clone(),
            points: self.points[range].to_vec(),
        }
    }
}

pub fn slice_by_dates(series: &PriceSeries, start: Date, end: Date) -> Result<PriceSeries, IngestError> {
    series.slice_by_dates(start, end)
}
