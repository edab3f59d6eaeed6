//! `volentropy` command line.
//!
//! Settings resolve as flags > `VOLENTROPY_*` environment variables >
//! `--config` TOML file > built-in defaults. Every command that writes an
//! output directory also writes `config.toml` there with the resolved
//! settings (output directory and thread count excluded); passing it back
//! with `--config` reproduces the same bytes.
//!
//! Exit codes: 0 success, 1 data or processing error, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::dates::{format_date, parse_date, Date};
use crate::event_study::{
    compare_universe, default_scan_lengths, window_prices, window_scan, Side, Span, StudyParams, WindowScanResult,
};
use crate::ingest::{
    default_universe, fetch_many, load_universe, parse_price_csv, to_csv, AssetUniverse, FetchOptions, PriceSeries,
};
use crate::measures::{build_histogram, measure_set, LogBase, DEFAULT_BINS};
use crate::report::{
    render_histogram_svg, render_scan_plot, render_table, write_report_bundle, PlotStyle, ReportBundle, TableFormat,
};
use crate::returns::{returns, ReturnMode};
use crate::synth::{generate_prices, SynthKind, SynthSpec};

pub const ENV_PREFIX: &str = "VOLENTROPY_";

thread_local! {
    static QUIET: std::cell::Cell<bool> = const { std::cell::Cell::new(false) };
}

/// Progress and summary output, silenced by `--quiet`.
macro_rules! say {
    ($($arg:tt)*) => {
        if !QUIET.with(|q| q.get()) {
            println!($($arg)*);
        }
    };
}

macro_rules! say_raw {
    ($($arg:tt)*) => {
        if !QUIET.with(|q| q.get()) {
            print!($($arg)*);
        }
    };
}

#[derive(Debug, Parser)]
#[command(
    name = "volentropy",
    version,
    about = "Entropy and standard deviation of daily log-returns around an event date",
    after_help = "Settings resolve as: flags > VOLENTROPY_* environment variables > --config file > defaults.\n\
                  Dates accept YYYY-MM-DD or MM/DD/YYYY."
)]
struct Cli {
    /// TOML file with default settings (keys match the long flag names, with underscores)
    #[arg(long, global = true, env = "VOLENTROPY_CONFIG")]
    config: Option<PathBuf>,

    /// Log more (repeat for debug output)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Print nothing but errors and requested data
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Before/after comparison table for an index and its constituents
    Analyze(AnalyzeArgs),
    /// Entropy of event-anchored windows of increasing length
    Scan(ScanArgs),
    /// Return histograms before and after the event
    Hist(HistArgs),
    /// Generate a seeded synthetic price series as CSV
    Synth(SynthArgs),
    /// Download price CSVs from a configured endpoint
    Fetch(FetchArgs),
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// Event date; belongs to the after window
    #[arg(long, env = "VOLENTROPY_EVENT_DATE", value_parser = date_arg)]
    event_date: Option<Date>,
    /// Length of each window, e.g. 1y, 6m, 90d [default: 1y]
    #[arg(long, env = "VOLENTROPY_SPAN")]
    span: Option<Span>,
    /// Number of histogram bins M [default: 20]
    #[arg(short = 'm', long, env = "VOLENTROPY_BINS")]
    bins: Option<usize>,
    /// Entropy logarithm base: e, 2 or 10 [default: e]
    #[arg(long, env = "VOLENTROPY_BASE")]
    base: Option<LogBase>,
    /// Return form: log or simple [default: log]
    #[arg(long, env = "VOLENTROPY_RETURN_MODE")]
    return_mode: Option<ReturnMode>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Directory holding one <SYMBOL>.csv per asset and the index
    #[arg(long, env = "VOLENTROPY_DATA")]
    data: Option<PathBuf>,
    /// Universe file [default: bundled WIG20 universe]
    #[arg(long, env = "VOLENTROPY_UNIVERSE")]
    universe: Option<PathBuf>,
    /// Output directory
    #[arg(long, env = "VOLENTROPY_OUT")]
    out: Option<PathBuf>,
    /// Window lengths for the index scan: "20,30,40" or "20:250:10" [default: 20 to full window, step 10]
    #[arg(long, env = "VOLENTROPY_LENGTHS")]
    lengths: Option<Lengths>,
    /// Worker threads
    #[arg(short, long, env = "VOLENTROPY_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Before,
    After,
    Both,
}

impl SideArg {
    fn sides(self) -> &'static [Side] {
        match self {
            SideArg::Before => &[Side::Before],
            SideArg::After => &[Side::After],
            SideArg::Both => &[Side::Before, Side::After],
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            SideArg::Before => "before",
            SideArg::After => "after",
            SideArg::Both => "both",
        }
    }
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Price CSV
    #[arg(long, env = "VOLENTROPY_INPUT")]
    input: Option<PathBuf>,
    /// Symbol label [default: input file stem]
    #[arg(long, env = "VOLENTROPY_SYMBOL")]
    symbol: Option<String>,
    /// Window lengths in trading days: "20,30,40" or "20:250:10"
    #[arg(long, env = "VOLENTROPY_LENGTHS")]
    lengths: Option<Lengths>,
    #[arg(long, value_enum, env = "VOLENTROPY_SIDE")]
    side: Option<SideArg>,
    #[arg(long, env = "VOLENTROPY_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HistArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long, env = "VOLENTROPY_INPUT")]
    input: Option<PathBuf>,
    #[arg(long, env = "VOLENTROPY_SYMBOL")]
    symbol: Option<String>,
    #[arg(long, env = "VOLENTROPY_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Gaussian,
    RegimeSwitch,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum, env = "VOLENTROPY_KIND")]
    kind: Option<KindArg>,
    /// Number of returns (gaussian) [default: 504]
    #[arg(long)]
    n: Option<usize>,
    /// Returns in the first regime [default: 252]
    #[arg(long)]
    n1: Option<usize>,
    /// Returns in the second regime [default: 252]
    #[arg(long)]
    n2: Option<usize>,
    /// Mean daily return [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Daily return standard deviation (first regime) [default: 0.01]
    #[arg(long)]
    sigma: Option<f64>,
    /// Second-regime standard deviation [default: 2 * sigma]
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, env = "VOLENTROPY_SEED")]
    seed: Option<u64>,
    /// First trading day [default: 2021-01-04]
    #[arg(long, value_parser = date_arg)]
    start_date: Option<Date>,
    /// Initial price [default: 100]
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    symbol: Option<String>,
    /// Output CSV file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FetchArgs {
    /// URL template with {symbol}, {start} and {end} placeholders
    #[arg(long, env = "VOLENTROPY_ENDPOINT")]
    endpoint: Option<String>,
    /// Comma-separated symbols [default: every symbol of the universe, index included]
    #[arg(long, value_delimiter = ',')]
    symbols: Option<Vec<String>>,
    #[arg(long, env = "VOLENTROPY_UNIVERSE")]
    universe: Option<PathBuf>,
    #[arg(long, value_parser = date_arg)]
    start: Option<Date>,
    #[arg(long, value_parser = date_arg)]
    end: Option<Date>,
    #[arg(long, env = "VOLENTROPY_OUT")]
    out: Option<PathBuf>,
    /// Requests in flight
    #[arg(short, long, env = "VOLENTROPY_JOBS")]
    jobs: Option<usize>,
    /// Retries per symbol on transient failures [default: 3]
    #[arg(long)]
    retries: Option<u32>,
}

fn date_arg(s: &str) -> Result<Date, String> {
    parse_date(s).ok_or_else(|| format!("invalid date {s:?} (use YYYY-MM-DD or MM/DD/YYYY)"))
}

/// Strictly increasing window lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lengths(pub Vec<usize>);

impl std::str::FromStr for Lengths {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid lengths {s:?} (use 20,30,40 or START:END:STEP)");
        let v: Vec<usize> = if s.contains(':') {
            let parts: Vec<usize> = s
                .split(':')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            match parts[..] {
                [a, b, step] if step > 0 && a <= b => (a..=b).step_by(step).collect(),
                _ => return Err(bad()),
            }
        } else {
            s.split(',')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        if v.is_empty() || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad());
        }
        Ok(Lengths(v))
    }
}

impl Lengths {
    fn echo(&self) -> String {
        self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    event_date: Option<String>,
    span: Option<String>,
    bins: Option<usize>,
    base: Option<String>,
    return_mode: Option<String>,
    data: Option<PathBuf>,
    universe: Option<PathBuf>,
    input: Option<PathBuf>,
    symbol: Option<String>,
    lengths: Option<String>,
    side: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    endpoint: Option<String>,
    symbols: Option<Vec<String>>,
    start: Option<String>,
    end: Option<String>,
    retries: Option<u32>,
    kind: Option<String>,
    n: Option<usize>,
    n1: Option<usize>,
    n2: Option<usize>,
    mu: Option<f64>,
    sigma: Option<f64>,
    sigma2: Option<f64>,
    seed: Option<u64>,
    start_date: Option<String>,
    p0: Option<f64>,
}

/// Error raised for bad or missing settings; reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_setting<T: std::str::FromStr<Err = String>>(key: &str, value: Option<String>) -> anyhow::Result<Option<T>> {
    value
        .map(|v| v.parse::<T>().map_err(|e| usage(format!("config key {key}: {e}"))))
        .transpose()
}

fn config_date(key: &str, value: Option<String>) -> anyhow::Result<Option<Date>> {
    value
        .map(|v| parse_date(&v).ok_or_else(|| usage(format!("config key {key}: invalid date {v:?}"))))
        .transpose()
}

fn load_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// Run the CLI with `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    QUIET.with(|q| q.set(cli.quiet));
    let level = match cli.verbose {
        0 if cli.quiet => "error",
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    let name = match &cli.command {
        Command::Analyze(_) => "analyze",
        Command::Scan(_) => "scan",
        Command::Hist(_) => "hist",
        Command::Synth(_) => "synth",
        Command::Fetch(_) => "fetch",
    };
    let result = load_config(cli.config.as_deref())
        .and_then(|cfg| match &cfg.command {
            Some(c) if c != name => Err(usage(format!("config file was written by `{c}`, not `{name}`"))),
            _ => Ok(cfg),
        })
        .and_then(|cfg| match cli.command {
            Command::Analyze(a) => analyze(a, cfg),
            Command::Scan(a) => scan(a, cfg),
            Command::Hist(a) => hist(a, cfg),
            Command::Synth(a) => synth(a, cfg),
            Command::Fetch(a) => fetch(a, cfg),
        });
    match result {
        Ok(()) => 0,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e:#}\n\nFor more information, try '--help'.");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn resolve_study(args: StudyArgs, cfg: &mut FileConfig) -> anyhow::Result<StudyParams> {
    let event_date = match args.event_date {
        Some(d) => d,
        None => config_date("event_date", cfg.event_date.take())?
            .ok_or_else(|| usage("missing required setting --event-date"))?,
    };
    let mut params = StudyParams::new(event_date);
    if let Some(span) = args.span.or(parse_setting("span", cfg.span.take())?) {
        params.span = span;
    }
    params.bins = args.bins.or(cfg.bins).unwrap_or(DEFAULT_BINS);
    if params.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    if let Some(base) = args.base.or(parse_setting("base", cfg.base.take())?) {
        params.base = base;
    }
    if let Some(mode) = args
        .return_mode
        .or(parse_setting("return_mode", cfg.return_mode.take())?)
    {
        params.return_mode = mode;
    }
    if params.span.subtract_from(event_date).is_none() || params.span.add_to(event_date).is_none() {
        return Err(usage(format!("span {} out of calendar range", params.span)));
    }
    Ok(params)
}

fn study_echo(command: &str, p: &StudyParams) -> toml::Table {
    let mut t = toml::Table::new();
    t.insert("command".into(), command.into());
    t.insert("event_date".into(), format_date(p.event_date).into());
    t.insert("span".into(), p.span.to_string().into());
    t.insert("bins".into(), (p.bins as i64).into());
    t.insert("base".into(), p.base.as_str().into());
    t.insert("return_mode".into(), p.return_mode.to_string().into());
    t
}

fn path_value(p: &Path) -> toml::Value {
    p.to_string_lossy().into_owned().into()
}

fn echo_string(t: &toml::Table) -> String {
    format!(
        "# volentropy {} effective configuration\n{}",
        env!("CARGO_PKG_VERSION"),
        toml::to_string(t).expect("config echo serializes")
    )
}

fn read_prices(path: &Path, symbol: &str) -> anyhow::Result<PriceSeries> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_price_csv(std::io::BufReader::new(file), symbol).with_context(|| format!("{symbol}: {}", path.display()))
}

fn find_price_file(dir: &Path, symbol: &str) -> Option<PathBuf> {
    [symbol.to_string(), symbol.to_lowercase(), symbol.to_uppercase()]
        .iter()
        .map(|s| dir.join(format!("{s}.csv")))
        .find(|p| p.is_file())
}

fn load_universe_arg(path: Option<&Path>) -> anyhow::Result<AssetUniverse> {
    match path {
        None => Ok(default_universe()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading universe {}", p.display()))?;
            load_universe(&text).with_context(|| format!("universe {}", p.display()))
        }
    }
}

fn require_path(value: Option<PathBuf>, flag: &str) -> anyhow::Result<PathBuf> {
    value.ok_or_else(|| usage(format!("missing required setting --{flag}")))
}

fn symbol_for(input: &Path, symbol: Option<String>) -> String {
    symbol.unwrap_or_else(|| {
        input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "SERIES".into())
    })
}

fn window_values(prices: &PriceSeries, params: &StudyParams, side: Side) -> anyhow::Result<Option<Vec<f64>>> {
    Ok(window_prices(prices, params.event_date, params.span, side)?
        .map(|w| returns(&w.prices, params.return_mode).map(|r| r.values()))
        .transpose()?)
}

fn side_window_len(prices: &PriceSeries, params: &StudyParams, side: Side) -> anyhow::Result<usize> {
    Ok(window_prices(prices, params.event_date, params.span, side)?.map_or(0, |w| w.prices.len()))
}

fn run_scans(
    prices: &PriceSeries,
    params: &StudyParams,
    lengths: Option<&Lengths>,
    sides: &[Side],
) -> anyhow::Result<Vec<WindowScanResult>> {
    let mut scans = Vec::new();
    for &side in sides {
        let ls = match lengths {
            Some(l) => l.0.clone(),
            None => default_scan_lengths(side_window_len(prices, params, side)?),
        };
        if ls.is_empty() {
            log::warn!("{}: no {side} window long enough to scan", prices.symbol());
            continue;
        }
        match window_scan(
            prices,
            params.event_date,
            &ls,
            side,
            params.bins,
            params.base,
            params.return_mode,
        ) {
            Ok(s) => scans.push(s),
            Err(e) => log::warn!("{e}"),
        }
    }
    Ok(scans)
}

fn analyze(args: AnalyzeArgs, mut cfg: FileConfig) -> anyhow::Result<()> {
    let params = resolve_study(args.study, &mut cfg)?;
    let data = require_path(args.data.or(cfg.data.take()), "data")?;
    let out = require_path(args.out.or(cfg.out.take()), "out")?;
    let universe_path = args.universe.or(cfg.universe.take());
    let lengths = match args.lengths {
        Some(l) => Some(l),
        None => parse_setting::<Lengths>("lengths", cfg.lengths.take())?,
    };
    let jobs = args
        .jobs
        .or(cfg.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let universe = load_universe_arg(universe_path.as_deref())?;
    if !data.is_dir() {
        bail!("data directory {} does not exist", data.display());
    }
    let mut store = BTreeMap::new();
    let all_symbols = std::iter::once(&universe.index_symbol).chain(universe.assets.iter().map(|a| &a.symbol));
    for symbol in all_symbols {
        match find_price_file(&data, symbol) {
            Some(path) => {
                store.insert(symbol.clone(), read_prices(&path, symbol)?);
            }
            None if *symbol == universe.index_symbol => bail!(
                "no price data for index symbol {symbol} (expected {})",
                data.join(format!("{symbol}.csv")).display()
            ),
            None => log::warn!("{symbol}: no price file in {}, skipped", data.display()),
        }
    }

    let table = compare_universe(&universe, &store, &params, jobs)?;

    let mut histograms = BTreeMap::new();
    for (symbol, prices) in &store {
        for side in [Side::Before, Side::After] {
            if let Some(values) = window_values(prices, &params, side)? {
                let h = build_histogram(&values, params.bins).with_context(|| format!("{symbol} {side}"))?;
                histograms.insert((symbol.clone(), side), h);
            }
        }
    }
    let index_prices = &store[&universe.index_symbol];
    let scans = run_scans(index_prices, &params, lengths.as_ref(), &[Side::Before, Side::After])?;

    let mut echo = study_echo("analyze", &params);
    echo.insert("data".into(), path_value(&data));
    if let Some(u) = &universe_path {
        echo.insert("universe".into(), path_value(u));
    }
    if let Some(l) = &lengths {
        echo.insert("lengths".into(), l.echo().into());
    }

    let bundle = ReportBundle {
        table,
        histograms,
        scans,
        config_echo: echo_string(&echo),
        style: PlotStyle::default(),
    };
    let manifest = write_report_bundle(&bundle, &out)?;
    say_raw!("{}", render_table(&bundle.table, TableFormat::Text));
    say!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(())
}

fn write_file(dir: &Path, name: &str, content: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
}

fn scan(args: ScanArgs, mut cfg: FileConfig) -> anyhow::Result<()> {
    let params = resolve_study(args.study, &mut cfg)?;
    let input = require_path(args.input.or(cfg.input.take()), "input")?;
    let out = require_path(args.out.or(cfg.out.take()), "out")?;
    let symbol = symbol_for(&input, args.symbol.or(cfg.symbol.take()));
    let lengths = match args.lengths {
        Some(l) => Some(l),
        None => parse_setting::<Lengths>("lengths", cfg.lengths.take())?,
    };
    let side = match args.side {
        Some(s) => s,
        None => match cfg.side.take() {
            Some(s) => SideArg::from_str(&s, true).map_err(|e| usage(format!("config key side: {e}")))?,
            None => SideArg::Both,
        },
    };

    let prices = read_prices(&input, &symbol)?;
    let scans = run_scans(&prices, &params, lengths.as_ref(), side.sides())?;
    if scans.is_empty() {
        bail!("{symbol}: no window length could be evaluated");
    }

    let mut echo = study_echo("scan", &params);
    echo.insert("input".into(), path_value(&input));
    echo.insert("symbol".into(), symbol.clone().into());
    echo.insert("side".into(), side.as_str().into());
    if let Some(l) = &lengths {
        echo.insert("lengths".into(), l.echo().into());
    }
    let echo = echo_string(&echo);

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut csv = String::from("symbol,side,window_length,n_returns,entropy\n");
    for s in &scans {
        for p in &s.points {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                s.symbol, s.side, p.window_length, p.n_returns, p.entropy.value
            ));
            say!(
                "{:<6} {:>5} {:>10.4} {}",
                s.side,
                p.window_length,
                p.entropy.value,
                p.entropy.unit()
            );
        }
    }
    let style = PlotStyle {
        metadata: Some(echo.clone()),
        ..PlotStyle::default()
    };
    let title = format!(
        "{symbol}: entropy by window length around {}",
        format_date(params.event_date)
    );
    write_file(&out, "scan.csv", &csv)?;
    write_file(&out, "scan.svg", &render_scan_plot(&scans, &title, &style)?)?;
    write_file(&out, "config.toml", &echo)?;
    Ok(())
}

fn hist(args: HistArgs, mut cfg: FileConfig) -> anyhow::Result<()> {
    let params = resolve_study(args.study, &mut cfg)?;
    let input = require_path(args.input.or(cfg.input.take()), "input")?;
    let out = require_path(args.out.or(cfg.out.take()), "out")?;
    let symbol = symbol_for(&input, args.symbol.or(cfg.symbol.take()));
    let prices = read_prices(&input, &symbol)?;

    let mut echo = study_echo("hist", &params);
    echo.insert("input".into(), path_value(&input));
    echo.insert("symbol".into(), symbol.clone().into());
    let echo = echo_string(&echo);

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut hists = BTreeMap::new();
    for side in [Side::Before, Side::After] {
        let Some(values) = window_values(&prices, &params, side)? else {
            log::warn!("{symbol}: fewer than 2 prices in the {side} window");
            continue;
        };
        let m = measure_set(&values, params.bins, params.base).with_context(|| format!("{symbol} {side}"))?;
        let h = build_histogram(&values, params.bins)?;
        say!(
            "{symbol} {side:<6} n={:<4} std={:.3} entropy={:.3} {} (max {:.3})",
            m.n,
            m.std,
            m.entropy.value,
            m.entropy.unit(),
            m.entropy_max
        );
        write_file(&out, &format!("{symbol}_{side}.csv"), &h.to_csv())?;
        hists.insert(side, h);
    }
    let style = PlotStyle {
        metadata: Some(echo.clone()),
        ..PlotStyle::default()
    };
    let title = format!("{symbol}: returns before/after {}", format_date(params.event_date));
    let svg = match (hists.get(&Side::Before), hists.get(&Side::After)) {
        (Some(b), a) => render_histogram_svg(b, a, &title, &style),
        (None, Some(a)) => render_histogram_svg(
            a,
            None,
            &title,
            &PlotStyle {
                before_color: style.after_color.clone(),
                ..style.clone()
            },
        ),
        (None, None) => bail!("{symbol}: neither window holds 2 prices"),
    };
    write_file(&out, &format!("{symbol}.svg"), &svg)?;
    write_file(&out, "config.toml", &echo)?;
    Ok(())
}

fn synth(args: SynthArgs, mut cfg: FileConfig) -> anyhow::Result<()> {
    let kind = match args.kind {
        Some(k) => k,
        None => match cfg.kind.take() {
            Some(k) => KindArg::from_str(&k, true).map_err(|e| usage(format!("config key kind: {e}")))?,
            None => KindArg::Gaussian,
        },
    };
    let mu = args.mu.or(cfg.mu).unwrap_or(0.0);
    let sigma = args.sigma.or(cfg.sigma).unwrap_or(0.01);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let kind = match kind {
        KindArg::Gaussian => SynthKind::Gaussian {
            n: args.n.or(cfg.n).unwrap_or(504),
            mu,
            sigma,
        },
        KindArg::RegimeSwitch => SynthKind::RegimeSwitch {
            n1: args.n1.or(cfg.n1).unwrap_or(252),
            n2: args.n2.or(cfg.n2).unwrap_or(252),
            mu,
            sigma1: sigma,
            sigma2: args.sigma2.or(cfg.sigma2).unwrap_or(2.0 * sigma),
        },
    };
    let mut spec = SynthSpec {
        kind,
        seed,
        start_date: SynthSpec::gaussian(2, 0.0, 1.0, 0).start_date,
        p0: args.p0.or(cfg.p0).unwrap_or(100.0),
        symbol: args.symbol.or(cfg.symbol.take()).unwrap_or_else(|| "SYNTH".into()),
    };
    if let Some(d) = args.start_date.or(config_date("start_date", cfg.start_date.take())?) {
        spec.start_date = d;
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let prices = generate_prices(&spec)?;
    let csv = to_csv(&prices);
    match args.out.or(cfg.out.take()) {
        Some(path) => {
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            if let Some(d) = spec.regime_change_date() {
                say!("regime change at {}", format_date(d));
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn fetch(args: FetchArgs, mut cfg: FileConfig) -> anyhow::Result<()> {
    let endpoint = args.endpoint.or(cfg.endpoint.take()).ok_or_else(|| {
        usage(format!(
            "missing endpoint: pass --endpoint, set {ENV_PREFIX}ENDPOINT or `endpoint` in the config file"
        ))
    })?;
    let start = match args.start {
        Some(d) => d,
        None => config_date("start", cfg.start.take())?.ok_or_else(|| usage("missing required setting --start"))?,
    };
    let end = match args.end {
        Some(d) => d,
        None => config_date("end", cfg.end.take())?.ok_or_else(|| usage("missing required setting --end"))?,
    };
    if start > end {
        return Err(usage("--start is after --end"));
    }
    let out = require_path(args.out.or(cfg.out.take()), "out")?;
    let symbols = match args.symbols.or(cfg.symbols.take()) {
        Some(s) => s,
        None => {
            let u = load_universe_arg(args.universe.or(cfg.universe.take()).as_deref())?;
            std::iter::once(u.index_symbol.clone())
                .chain(u.assets.iter().map(|a| a.symbol.clone()))
                .collect()
        }
    };
    let jobs = args.jobs.or(cfg.jobs).unwrap_or(4);
    let opts = FetchOptions {
        retries: args.retries.or(cfg.retries).unwrap_or(3),
        ..FetchOptions::default()
    };
    // validate the template before touching the network
    crate::ingest::render_url(&endpoint, "X", start, end).map_err(|e| usage(e.to_string()))?;

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut failures = Vec::new();
    for (symbol, body) in fetch_many(&endpoint, &symbols, start, end, &opts, jobs) {
        let result = body
            .map_err(anyhow::Error::from)
            .and_then(|text| Ok(parse_price_csv(text.as_bytes(), &symbol)?));
        match result {
            Ok(series) => {
                write_file(&out, &format!("{symbol}.csv"), &to_csv(&series))?;
                say!("{symbol}: {} rows", series.len());
            }
            Err(e) => {
                eprintln!("{symbol}: {e:#}");
                failures.push(symbol);
            }
        }
    }
    if !failures.is_empty() {
        return Err(anyhow!("failed to fetch {}", failures.join(", ")));
    }
    Ok(())
}
