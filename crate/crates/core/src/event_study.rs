//! Before/after comparisons around an event date.
//!
//! The event day belongs to the after side. Returns are computed inside each
//! window from that window's own prices, so the return that straddles the
//! event (last close before, first close at/after) is in neither sample and
//! each side holds `trading days - 1` returns.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Days, Months};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dates::{format_date, Date};
use crate::ingest::{AssetUniverse, Group, PriceSeries};
use crate::measures::{
    build_histogram, measure_set, pct_difference, shannon_entropy, EntropyValue, LogBase, MeasureError, MeasureSet,
    DEFAULT_BINS,
};
use crate::returns::{returns, ReturnMode, ReturnSeries};

/// A window whose data starts (before side) or stops (after side) more than
/// this many calendar days inside the nominal window is flagged as short.
pub const SHORT_WINDOW_SLACK_DAYS: u64 = 7;

#[derive(Debug, thiserror::Error)]
pub enum EventError {
    #[error("{symbol}: fewer than 2 prices in the {side} window")]
    InsufficientData { symbol: String, side: Side },
    #[error("no price data for index symbol {0}")]
    MissingIndexData(String),
    #[error("{symbol}: no feasible window length on the {side} side")]
    NoWindows { symbol: String, side: Side },
    #[error("window lengths must be strictly increasing and non-empty")]
    InvalidLengths,
    #[error("invalid span: {0}")]
    InvalidSpan(String),
    #[error("{symbol}: {source}")]
    Measure {
        symbol: String,
        #[source]
        source: MeasureError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Before,
    After,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Before => "before",
            Side::After => "after",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "before" => Ok(Side::Before),
            "after" => Ok(Side::After),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

/// Calendar length of each window: `90d`, `6m`, `1y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Span {
    Days(u32),
    Months(u32),
    Years(u32),
}

impl Default for Span {
    fn default() -> Self {
        Span::Years(1)
    }
}

impl Span {
    pub fn subtract_from(self, d: Date) -> Option<Date> {
        match self {
            Span::Days(n) => d.checked_sub_days(Days::new(n.into())),
            Span::Months(n) => d.checked_sub_months(Months::new(n)),
            Span::Years(n) => d.checked_sub_months(Months::new(n.checked_mul(12)?)),
        }
    }

    pub fn add_to(self, d: Date) -> Option<Date> {
        match self {
            Span::Days(n) => d.checked_add_days(Days::new(n.into())),
            Span::Months(n) => d.checked_add_months(Months::new(n)),
            Span::Years(n) => d.checked_add_months(Months::new(n.checked_mul(12)?)),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Span::Days(n) => write!(f, "{n}d"),
            Span::Months(n) => write!(f, "{n}m"),
            Span::Years(n) => write!(f, "{n}y"),
        }
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, unit) = s.split_at(s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len()));
        let n: u32 = num.parse().map_err(|_| format!("invalid span {s:?}"))?;
        if n == 0 {
            return Err("span must be positive".into());
        }
        match unit.to_ascii_lowercase().as_str() {
            "d" => Ok(Span::Days(n)),
            "m" => Ok(Span::Months(n)),
            "y" | "" => Ok(Span::Years(n)),
            _ => Err(format!("invalid span unit in {s:?} (use d, m or y)")),
        }
    }
}

impl Serialize for Span {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters shared by every window computation of one study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyParams {
    #[serde(with = "iso_date")]
    pub event_date: Date,
    pub span: Span,
    pub bins: usize,
    pub base: LogBase,
    pub return_mode: ReturnMode,
}

impl StudyParams {
    pub fn new(event_date: Date) -> Self {
        Self {
            event_date,
            span: Span::default(),
            bins: DEFAULT_BINS,
            base: LogBase::E,
            return_mode: ReturnMode::Log,
        }
    }

    fn bounds(&self) -> Result<(Date, Date), EventError> {
        let start = self
            .span
            .subtract_from(self.event_date)
            .ok_or_else(|| EventError::InvalidSpan(self.span.to_string()))?;
        let end = self
            .span
            .add_to(self.event_date)
            .ok_or_else(|| EventError::InvalidSpan(self.span.to_string()))?;
        Ok((start, end))
    }
}

pub(crate) mod iso_date {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::dates::{format_date, parse_date, Date};

    pub fn serialize<S: Serializer>(d: &Date, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_date(*d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Date, D::Error> {
        let s = String::deserialize(d)?;
        parse_date(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid date {s:?}")))
    }
}

/// One side of an event split, still as prices.
#[derive(Debug, Clone)]
pub struct Window {
    pub prices: PriceSeries,
    pub short: bool,
}

/// Prices of one side's window, or `None` when it holds fewer than 2 prices.
pub fn window_prices(
    prices: &PriceSeries,
    event_date: Date,
    span: Span,
    side: Side,
) -> Result<Option<Window>, EventError> {
    let start = span
        .subtract_from(event_date)
        .ok_or_else(|| EventError::InvalidSpan(span.to_string()))?;
    let end = span
        .add_to(event_date)
        .ok_or_else(|| EventError::InvalidSpan(span.to_string()))?;
    let pts = prices.points();
    let split = pts.partition_point(|p| p.date < event_date);
    let range = match side {
        Side::Before => pts.partition_point(|p| p.date < start)..split,
        Side::After => split..pts.partition_point(|p| p.date < end),
    };
    if range.len() < 2 {
        return Ok(None);
    }
    let window = prices.sub_range(range);
    let slack = Days::new(SHORT_WINDOW_SLACK_DAYS);
    let short = match side {
        Side::Before => window.first_date() > start + slack,
        Side::After => window.last_date() + slack < end.pred_opt().unwrap_or(end),
    };
    Ok(Some(Window { prices: window, short }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSplit {
    #[serde(with = "iso_date")]
    pub event_date: Date,
    pub before: ReturnSeries,
    pub after: ReturnSeries,
    pub short_before: bool,
    pub short_after: bool,
}

pub fn split_at_event(
    prices: &PriceSeries,
    event_date: Date,
    span: Span,
    mode: ReturnMode,
) -> Result<EventSplit, EventError> {
    let side = |side| {
        window_prices(prices, event_date, span, side)?.ok_or_else(|| EventError::InsufficientData {
            symbol: prices.symbol().to_string(),
            side,
        })
    };
    let before = side(Side::Before)?;
    let after = side(Side::After)?;
    let to_returns = |w: &Window| returns(&w.prices, mode).expect("window holds at least 2 prices");
    Ok(EventSplit {
        event_date,
        before: to_returns(&before),
        after: to_returns(&after),
        short_before: before.short,
        short_after: after.short,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub symbol: String,
    pub full_name: String,
    /// `None` for the index row.
    pub group: Option<Group>,
    pub before: Option<MeasureSet>,
    pub after: Option<MeasureSet>,
    pub std_pct_diff: Option<f64>,
    pub entropy_pct_diff: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    #[serde(flatten)]
    pub params: StudyParams,
    /// Always set by [`compare_universe`].
    pub index_row: Option<ComparisonRow>,
    /// Grouped (constant, introduced, removed), universe order within a group.
    pub rows: Vec<ComparisonRow>,
}

fn side_measures(
    prices: &PriceSeries,
    params: &StudyParams,
    side: Side,
    flags: &mut Vec<String>,
) -> Result<Option<MeasureSet>, EventError> {
    let Some(window) = window_prices(prices, params.event_date, params.span, side)? else {
        flags.push(format!("missing_{side}"));
        return Ok(None);
    };
    if window.short {
        flags.push(format!("short_{side}"));
    }
    let r = returns(&window.prices, params.return_mode).expect("window holds at least 2 prices");
    measure_set(&r.values(), params.bins, params.base)
        .map(Some)
        .map_err(|source| EventError::Measure {
            symbol: prices.symbol().to_string(),
            source,
        })
}

pub fn comparison_row(
    prices: &PriceSeries,
    full_name: &str,
    group: Option<Group>,
    params: &StudyParams,
) -> Result<ComparisonRow, EventError> {
    let mut flags = Vec::new();
    let before = side_measures(prices, params, Side::Before, &mut flags)?;
    let after = side_measures(prices, params, Side::After, &mut flags)?;
    let (mut std_pct_diff, mut entropy_pct_diff) = (None, None);
    if let (Some(b), Some(a)) = (&before, &after) {
        std_pct_diff = pct_difference(b.std, a.std).ok();
        entropy_pct_diff = pct_difference(b.entropy.value, a.entropy.value).ok();
        if std_pct_diff.is_none() || entropy_pct_diff.is_none() {
            flags.push("pct_undefined".into());
        }
    }
    Ok(ComparisonRow {
        symbol: prices.symbol().to_string(),
        full_name: full_name.to_string(),
        group,
        before,
        after,
        std_pct_diff,
        entropy_pct_diff,
        flags,
    })
}

/// Per-asset before/after measures for a whole universe plus the index.
///
/// Assets without any price data are left out; assets whose data misses a
/// window keep a row with that side absent. Rows are computed on at most
/// `jobs` threads and returned grouped, keeping universe order within a group.
pub fn compare_universe(
    universe: &AssetUniverse,
    store: &BTreeMap<String, PriceSeries>,
    params: &StudyParams,
    jobs: usize,
) -> Result<ComparisonTable, EventError> {
    params.bounds()?;
    let index_prices = store
        .get(&universe.index_symbol)
        .ok_or_else(|| EventError::MissingIndexData(universe.index_symbol.clone()))?;
    let index_row = comparison_row(index_prices, &universe.index_symbol, None, params)?;

    let mut members: Vec<_> = universe
        .assets
        .iter()
        .filter_map(|a| store.get(&a.symbol).map(|p| (a, p)))
        .collect();
    members.sort_by_key(|(a, _)| a.group);

    let compute = || -> Result<Vec<ComparisonRow>, EventError> {
        members
            .par_iter()
            .map(|(meta, prices)| comparison_row(prices, &meta.full_name, Some(meta.group), params))
            .collect()
    };
    let rows = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(compute)?,
        Err(_) => compute()?,
    };
    Ok(ComparisonTable {
        params: *params,
        index_row: Some(index_row),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Trading days (prices) in the window.
    pub window_length: usize,
    pub n_returns: usize,
    pub entropy: EntropyValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScanResult {
    pub symbol: String,
    pub side: Side,
    pub points: Vec<ScanPoint>,
    /// Requested lengths that could not be evaluated.
    pub skipped: Vec<usize>,
}

/// `20, 30, ...` up to `available`, ending with `available` itself.
pub fn default_scan_lengths(available: usize) -> Vec<usize> {
    let mut lengths: Vec<usize> = (20..=available).step_by(10).collect();
    if available >= 3 && lengths.last() != Some(&available) {
        lengths.push(available);
    }
    lengths
}

/// Entropy of windows anchored at the event: the last `L` trading days
/// strictly before it, or the first `L` on/after it. Each window is binned
/// with its own min-max edges.
pub fn window_scan(
    prices: &PriceSeries,
    event_date: Date,
    lengths: &[usize],
    side: Side,
    bins: usize,
    base: LogBase,
    mode: ReturnMode,
) -> Result<WindowScanResult, EventError> {
    if lengths.is_empty() || lengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EventError::InvalidLengths);
    }
    let pts = prices.points();
    let split = pts.partition_point(|p| p.date < event_date);
    let available = match side {
        Side::Before => split,
        Side::After => pts.len() - split,
    };
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &len in lengths {
        if len < 3 || len > available {
            skipped.push(len);
            continue;
        }
        let range = match side {
            Side::Before => split - len..split,
            Side::After => split..split + len,
        };
        let r = returns(&prices.sub_range(range), mode).expect("window holds at least 3 prices");
        let hist = build_histogram(&r.values(), bins).map_err(|source| EventError::Measure {
            symbol: prices.symbol().to_string(),
            source,
        })?;
        points.push(ScanPoint {
            window_length: len,
            n_returns: r.n(),
            entropy: shannon_entropy(&hist, base),
        });
    }
    if points.is_empty() {
        return Err(EventError::NoWindows {
            symbol: prices.symbol().to_string(),
            side,
        });
    }
    if !skipped.is_empty() {
        log::warn!(
            "{} {side} scan around {}: skipped lengths {:?} ({} trading days available)",
            prices.symbol(),
            format_date(event_date),
            skipped,
            available
        );
    }
    Ok(WindowScanResult {
        symbol: prices.symbol().to_string(),
        side,
        points,
        skipped,
    })
}
