//! Volatility of financial time series measured two ways: the sample standard
//! deviation of daily log-returns and the Shannon entropy of their binned
//! distribution.
//!
//! The crate is organised around a before/after event study:
//!
//! * [`ingest`] loads daily closes (CSV files or an HTTP endpoint) and the
//!   asset-universe metadata describing index membership.
//! * [`returns`] turns closes into daily log-returns.
//! * [`measures`] builds equal-width min-max histograms and computes entropy,
//!   standard deviation and symmetric percentage differences.
//! * [`event_study`] splits histories around an event date, builds the
//!   per-asset comparison table and runs anchored window scans.
//! * [`synth`] generates seeded synthetic series for oracle tests.
//! * [`report`] renders text/CSV/JSON tables and standalone SVG plots.
//! * [`cli`] is the `volentropy` command-line front end.
//!
//! ```
//! use volentropy::measures::{measure_set, LogBase};
//!
//! let m = measure_set(&[-0.02, -0.01, 0.01, 0.02], 2, LogBase::E).unwrap();
//! assert!((m.entropy.value - std::f64::consts::LN_2).abs() < 1e-12);
//! ```

pub mod cli;
pub mod dates;
pub mod event_study;
pub mod ingest;
pub mod measures;
pub mod report;
pub mod returns;
pub mod synth;

mod error;

pub use error::{Error, Result};
pub use event_study::{
    compare_universe, split_at_event, window_scan, ComparisonRow, ComparisonTable, EventSplit, Side, Span,
    WindowScanResult,
};
pub use ingest::{AssetMeta, AssetUniverse, Group, PriceSeries};
pub use measures::{Histogram, LogBase, MeasureSet};
pub use returns::{ReturnMode, ReturnSeries};
