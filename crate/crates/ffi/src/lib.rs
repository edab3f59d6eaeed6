//! C ABI for `volentropy`.
//!
//! Conventions:
//!
//! * Every fallible function returns a `VeStatus`; results go through out
//!   pointers, which are left untouched on failure.
//! * The message of the most recent failure on the calling thread is
//!   available from `ve_last_error_message`.
//! * Objects (`VePrices`, `VeHistogram`, `VeEventSplit`, `VeStore`)
//!   are opaque handles released with their `*_free` function. Strings
//!   returned through `char **` are released with `ve_string_free`.
//! * Array getters take a caller buffer and its capacity, always report the
//!   required length through `len_out`, and fill the buffer only when it is
//!   large enough.
//! * Dates are ISO `YYYY-MM-DD` strings.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use volentropy::dates::parse_date;
use volentropy::event_study::{compare_universe, split_at_event, EventError, EventSplit, Span, StudyParams};
use volentropy::ingest::{default_universe, load_universe, parse_price_csv, IngestError, PriceSeries};
use volentropy::measures::{
    build_histogram, measure_set, pct_difference, shannon_entropy, std_dev, Histogram, LogBase, MeasureSet,
};
use volentropy::report::{render_table, TableFormat};
use volentropy::returns::{returns, ReturnMode};
use volentropy::synth::{generate_prices, SynthSpec};
use volentropy::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    InsufficientData = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeLogBase {
    E = 0,
    Two = 1,
    Ten = 2,
}

impl From<VeLogBase> for LogBase {
    fn from(b: VeLogBase) -> Self {
        match b {
            VeLogBase::E => LogBase::E,
            VeLogBase::Two => LogBase::Two,
            VeLogBase::Ten => LogBase::Ten,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeSide {
    Before = 0,
    After = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeMeasureSet {
    pub std_dev: f64,
    pub entropy: f64,
    /// Largest entropy the bin count allows, in the same base.
    pub entropy_max: f64,
    pub n: usize,
    pub bins: usize,
}

impl From<&MeasureSet> for VeMeasureSet {
    fn from(m: &MeasureSet) -> Self {
        Self {
            std_dev: m.std,
            entropy: m.entropy.value,
            entropy_max: m.entropy_max,
            n: m.n,
            bins: m.m,
        }
    }
}

/// Daily closing prices of one symbol.
pub struct VePrices(PriceSeries);

pub struct VeHistogram(Histogram);

/// Return series on each side of an event date.
pub struct VeEventSplit(EventSplit);

/// Price series keyed by symbol, input to `ve_compare_universe_json`.
pub struct VeStore(BTreeMap<String, PriceSeries>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(VeStatus, String);

impl Failure {
    fn new(status: VeStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Ingest(IngestError::Io { .. }) | Error::Report(_) => VeStatus::Io,
            Error::Ingest(_) => VeStatus::Parse,
            Error::Returns(_) => VeStatus::InsufficientData,
            Error::Event(EventError::InsufficientData { .. } | EventError::NoWindows { .. }) => {
                VeStatus::InsufficientData
            }
            Error::Event(EventError::MissingIndexData(_)) => VeStatus::InsufficientData,
            Error::Event(_) | Error::Measure(_) | Error::Synth(_) => VeStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! impl_from_module_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

impl_from_module_error!(
    IngestError,
    EventError,
    volentropy::measures::MeasureError,
    volentropy::returns::ReturnsError,
    volentropy::synth::SynthError
);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            VeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {msg}"));
            VeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(VeStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(VeStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(VeStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(VeStatus::NullPointer, format!("{name} is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(Failure::new(VeStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(p)
    }
}

fn date_arg(s: &str) -> Result<volentropy::dates::Date, Failure> {
    parse_date(s).ok_or_else(|| Failure::new(VeStatus::InvalidArgument, format!("invalid date {s:?}")))
}

unsafe fn span_arg(p: *const c_char) -> Result<Span, Failure> {
    if p.is_null() {
        return Ok(Span::default());
    }
    str_arg(p, "span")?
        .parse()
        .map_err(|e: String| Failure::new(VeStatus::InvalidArgument, e))
}

/// Copy `src` into a caller buffer of capacity `cap`.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, len_out: *mut usize) -> Result<(), Failure> {
    *out_arg(len_out, "len_out")? = src.len();
    if src.is_empty() {
        return Ok(());
    }
    if cap < src.len() {
        return Err(Failure::new(
            VeStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out_arg(buf, "buf")?, src.len());
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(VeStatus::InvalidArgument, "output contains NUL"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn ve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn ve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn ve_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// prices -------------------------------------------------------------------

/// Parse CSV text of daily closes (date column plus a close column).
#[no_mangle]
pub unsafe extern "C" fn ve_prices_from_csv(
    csv_text: *const c_char,
    symbol: *const c_char,
    out: *mut *mut VePrices,
) -> VeStatus {
    guard(|| {
        let text = str_arg(csv_text, "csv_text")?;
        let symbol = str_arg(symbol, "symbol")?;
        let out = out_arg(out, "out")?;
        let series = parse_price_csv(text.as_bytes(), symbol)?;
        *out = Box::into_raw(Box::new(VePrices(series)));
        Ok(())
    })
}

/// Seeded Gaussian prices: `n` returns, `n + 1` weekday closes from 100.
#[no_mangle]
pub unsafe extern "C" fn ve_prices_synth_gaussian(
    n: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
    out: *mut *mut VePrices,
) -> VeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let series = generate_prices(&SynthSpec::gaussian(n, mu, sigma, seed))?;
        *out = Box::into_raw(Box::new(VePrices(series)));
        Ok(())
    })
}

/// Seeded regime switch: `n1` returns with `sigma1`, then `n2` with `sigma2`.
/// The date of close `n1` (the switch) is written to `change_date_out` as a
/// string to free with `ve_string_free` when that pointer is not NULL.
#[no_mangle]
pub unsafe extern "C" fn ve_prices_synth_regime_switch(
    n1: usize,
    n2: usize,
    mu: f64,
    sigma1: f64,
    sigma2: f64,
    seed: u64,
    out: *mut *mut VePrices,
    change_date_out: *mut *mut c_char,
) -> VeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = SynthSpec::regime_switch(n1, n2, mu, sigma1, sigma2, seed);
        let series = generate_prices(&spec)?;
        if !change_date_out.is_null() {
            let date = spec
                .regime_change_date()
                .map(volentropy::dates::format_date)
                .unwrap_or_default();
            *change_date_out = into_c_string(date)?;
        }
        *out = Box::into_raw(Box::new(VePrices(series)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_prices_len(prices: *const VePrices, len_out: *mut usize) -> VeStatus {
    guard(|| {
        *out_arg(len_out, "len_out")? = ref_arg(prices, "prices")?.0.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_prices_closes(
    prices: *const VePrices,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> VeStatus {
    guard(|| {
        let closes: Vec<f64> = ref_arg(prices, "prices")?.0.closes().collect();
        copy_out(&closes, buf, cap, len_out)
    })
}

/// Daily log returns (or simple returns when `simple` is true).
#[no_mangle]
pub unsafe extern "C" fn ve_prices_returns(
    prices: *const VePrices,
    simple: bool,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> VeStatus {
    guard(|| {
        let mode = if simple { ReturnMode::Simple } else { ReturnMode::Log };
        let r = returns(&ref_arg(prices, "prices")?.0, mode)?;
        copy_out(&r.values(), buf, cap, len_out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_prices_free(prices: *mut VePrices) {
    if !prices.is_null() {
        drop(Box::from_raw(prices));
    }
}

// measures -----------------------------------------------------------------

/// Sample standard deviation (N - 1 denominator).
#[no_mangle]
pub unsafe extern "C" fn ve_std_dev(values: *const f64, len: usize, out: *mut f64) -> VeStatus {
    guard(|| {
        let v = slice_arg(values, len, "values")?;
        let out = out_arg(out, "out")?;
        *out = std_dev(v)?;
        Ok(())
    })
}

/// Symmetric percentage difference `100 |a - b| / ((a + b) / 2)`.
#[no_mangle]
pub unsafe extern "C" fn ve_pct_difference(a: f64, b: f64, out: *mut f64) -> VeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = pct_difference(a, b)?;
        Ok(())
    })
}

/// Entropy of `values` binned into `bins` equal-width min-max bins.
#[no_mangle]
pub unsafe extern "C" fn ve_entropy(
    values: *const f64,
    len: usize,
    bins: usize,
    base: VeLogBase,
    out: *mut f64,
) -> VeStatus {
    guard(|| {
        let v = slice_arg(values, len, "values")?;
        let out = out_arg(out, "out")?;
        *out = shannon_entropy(&build_histogram(v, bins)?, base.into()).value;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_measure_set(
    values: *const f64,
    len: usize,
    bins: usize,
    base: VeLogBase,
    out: *mut VeMeasureSet,
) -> VeStatus {
    guard(|| {
        let v = slice_arg(values, len, "values")?;
        let out = out_arg(out, "out")?;
        *out = (&measure_set(v, bins, base.into())?).into();
        Ok(())
    })
}

// histogram ----------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ve_histogram_build(
    values: *const f64,
    len: usize,
    bins: usize,
    out: *mut *mut VeHistogram,
) -> VeStatus {
    guard(|| {
        let v = slice_arg(values, len, "values")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(VeHistogram(build_histogram(v, bins)?)));
        Ok(())
    })
}

/// Number of bins actually used: 1 when all values are equal.
#[no_mangle]
pub unsafe extern "C" fn ve_histogram_bins(h: *const VeHistogram, out: *mut usize) -> VeStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(h, "h")?.0.bins();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_histogram_counts(
    h: *const VeHistogram,
    buf: *mut u64,
    cap: usize,
    len_out: *mut usize,
) -> VeStatus {
    guard(|| copy_out(ref_arg(h, "h")?.0.counts(), buf, cap, len_out))
}

/// Bin edges, one more than the number of bins.
#[no_mangle]
pub unsafe extern "C" fn ve_histogram_edges(
    h: *const VeHistogram,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> VeStatus {
    guard(|| copy_out(ref_arg(h, "h")?.0.edges(), buf, cap, len_out))
}

#[no_mangle]
pub unsafe extern "C" fn ve_histogram_entropy(h: *const VeHistogram, base: VeLogBase, out: *mut f64) -> VeStatus {
    guard(|| {
        let h = ref_arg(h, "h")?;
        *out_arg(out, "out")? = shannon_entropy(&h.0, base.into()).value;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_histogram_free(h: *mut VeHistogram) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

// event split ----------------------------------------------------------------

/// Split log returns around `event_date`; the event day belongs to the after
/// side. `span` is like "1y", "6m" or "90d"; NULL means one year.
#[no_mangle]
pub unsafe extern "C" fn ve_split_at_event(
    prices: *const VePrices,
    event_date: *const c_char,
    span: *const c_char,
    out: *mut *mut VeEventSplit,
) -> VeStatus {
    guard(|| {
        let prices = ref_arg(prices, "prices")?;
        let event = date_arg(str_arg(event_date, "event_date")?)?;
        let span = span_arg(span)?;
        let out = out_arg(out, "out")?;
        let split = split_at_event(&prices.0, event, span, ReturnMode::Log)?;
        *out = Box::into_raw(Box::new(VeEventSplit(split)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_split_returns(
    split: *const VeEventSplit,
    side: VeSide,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> VeStatus {
    guard(|| {
        let s = &ref_arg(split, "split")?.0;
        let series = match side {
            VeSide::Before => &s.before,
            VeSide::After => &s.after,
        };
        copy_out(&series.values(), buf, cap, len_out)
    })
}

/// Whether the data stops well short of the requested window on `side`.
#[no_mangle]
pub unsafe extern "C" fn ve_split_is_short(split: *const VeEventSplit, side: VeSide, out: *mut bool) -> VeStatus {
    guard(|| {
        let s = &ref_arg(split, "split")?.0;
        *out_arg(out, "out")? = match side {
            VeSide::Before => s.short_before,
            VeSide::After => s.short_after,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_split_measures(
    split: *const VeEventSplit,
    side: VeSide,
    bins: usize,
    base: VeLogBase,
    out: *mut VeMeasureSet,
) -> VeStatus {
    guard(|| {
        let s = &ref_arg(split, "split")?.0;
        let out = out_arg(out, "out")?;
        let values = match side {
            VeSide::Before => s.before.values(),
            VeSide::After => s.after.values(),
        };
        *out = (&measure_set(&values, bins, base.into())?).into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_split_free(split: *mut VeEventSplit) {
    if !split.is_null() {
        drop(Box::from_raw(split));
    }
}

// universe comparison ---------------------------------------------------------

#[no_mangle]
pub extern "C" fn ve_store_new() -> *mut VeStore {
    Box::into_raw(Box::new(VeStore(BTreeMap::new())))
}

/// Add a copy of `prices` under its symbol, replacing any earlier entry.
#[no_mangle]
pub unsafe extern "C" fn ve_store_add(store: *mut VeStore, prices: *const VePrices) -> VeStatus {
    guard(|| {
        let prices = ref_arg(prices, "prices")?;
        let store = store
            .as_mut()
            .ok_or_else(|| Failure::new(VeStatus::NullPointer, "store is NULL"))?;
        store.0.insert(prices.0.symbol().to_string(), prices.0.clone());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ve_store_free(store: *mut VeStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Before/after comparison table as JSON. `universe_text` uses the universe
/// file format; NULL selects the bundled WIG20 universe. `span` NULL means
/// one year. The JSON string is released with `ve_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ve_compare_universe_json(
    universe_text: *const c_char,
    store: *const VeStore,
    event_date: *const c_char,
    span: *const c_char,
    bins: usize,
    base: VeLogBase,
    jobs: usize,
    json_out: *mut *mut c_char,
) -> VeStatus {
    guard(|| {
        let universe = if universe_text.is_null() {
            default_universe()
        } else {
            load_universe(str_arg(universe_text, "universe_text")?)?
        };
        let store = ref_arg(store, "store")?;
        let mut params = StudyParams::new(date_arg(str_arg(event_date, "event_date")?)?);
        params.span = span_arg(span)?;
        params.bins = bins;
        params.base = base.into();
        let json_out = out_arg(json_out, "json_out")?;
        if bins == 0 {
            return Err(Failure::new(VeStatus::InvalidArgument, "bins must be at least 1"));
        }
        let table = compare_universe(&universe, &store.0, &params, jobs.max(1))?;
        *json_out = into_c_string(render_table(&table, TableFormat::Json))?;
        Ok(())
    })
}
