//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any
//! criterion fails. Criterion 9 needs real WIG20 closes in the directory
//! named by `VOLENTROPY_WIG20_DIR` (one `<SYMBOL>.csv` per asset plus
//! `WIG20.csv`) and is skipped otherwise.

mod support;

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use volentropy::dates::parse_date;
use volentropy::event_study::{compare_universe, split_at_event, window_scan, Side, Span, StudyParams};
use volentropy::ingest::{default_universe, parse_price_csv, PricePoint, PriceSeries};
use volentropy::measures::{build_histogram, measure_set, pct_difference, shannon_entropy, std_dev, LogBase};
use volentropy::returns::ReturnMode;
use volentropy::synth::{gaussian_returns, regime_switch_series, SynthSpec};

use support::{fixture, gaussian_oracle, reference_table, scan_bands};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// 1 ---------------------------------------------------------------------

const PCT_TOL: f64 = 0.8;
const EXACT_TOL: f64 = 0.001;

fn pct_fixtures() -> Verdict {
    let table = reference_table();
    let mut misses = Vec::new();
    let mut worst = 0.0f64;
    for r in &table {
        let checks = [
            (
                "std",
                pct_difference(r.std_before(), r.std_after()).unwrap(),
                r.std_pct(),
            ),
            (
                "entropy",
                pct_difference(r.entropy_before(), r.entropy_after()).unwrap(),
                r.entropy_pct(),
            ),
        ];
        for (what, got, printed) in checks {
            let err = (got - printed).abs();
            worst = worst.max(err);
            if err > PCT_TOL {
                misses.push(format!("{} {what}: {got:.3} vs printed {printed}", r.symbol));
            }
        }
    }
    let exact = [
        ("MRC", "std", 8.889),
        ("PGN", "std", 64.0),
        ("CDR", "std", 3.175),
        ("KRU", "entropy", 0.762),
        ("CPS", "entropy", 19.293),
    ];
    for (sym, what, want) in exact {
        let r = table.iter().find(|r| r.symbol == sym).unwrap();
        let got = if what == "std" {
            pct_difference(r.std_before(), r.std_after()).unwrap()
        } else {
            pct_difference(r.entropy_before(), r.entropy_after()).unwrap()
        };
        if (got - want).abs() > EXACT_TOL {
            misses.push(format!("{sym} {what}: {got:.4} vs exact {want}"));
        }
    }
    let cells = table.len() * 2;
    verdict(
        misses.is_empty(),
        format!(
            "{} of {cells} cells within ±{PCT_TOL}pp, 5 exact rows ±{EXACT_TOL}; worst {worst:.3}pp{}",
            cells - misses.iter().filter(|m| m.contains("printed")).count(),
            if misses.is_empty() {
                String::new()
            } else {
                format!("; off: {}", misses.join(", "))
            }
        ),
    )
}

// 2 ---------------------------------------------------------------------

fn entropy_bound() -> Verdict {
    let bound = 20f64.ln();
    let table = reference_table();
    let over: Vec<String> = table
        .iter()
        .flat_map(|r| {
            [(r.entropy_before(), "before"), (r.entropy_after(), "after")].map(|(h, s)| (r.symbol.clone(), h, s))
        })
        .filter(|(_, h, _)| *h > bound)
        .map(|(sym, h, s)| format!("{sym} {s} {h}"))
        .collect();
    // The library asserts the bound inside every entropy computation; the
    // most uniform possible input must land on it, never above.
    let uniform: Vec<f64> = (0..20).map(|i| i as f64 + 0.5).collect();
    let h = shannon_entropy(&build_histogram(&uniform, 20).unwrap(), LogBase::E).value;
    let at_max = (h - bound).abs() < 1e-12;
    verdict(
        over.is_empty() && at_max,
        format!(
            "{} fixture entropies <= ln 20 = {bound:.4}; uniform input gives {h:.12}{}",
            table.len() * 2,
            if over.is_empty() {
                String::new()
            } else {
                format!("; over: {}", over.join(", "))
            }
        ),
    )
}

// 3 ---------------------------------------------------------------------

fn random_case(rng: &mut ChaCha20Rng) -> (Vec<f64>, usize) {
    let n = rng.gen_range(1..=50);
    let m = rng.gen_range(1..=10);
    let values = match rng.gen_range(0..3) {
        // small integers: many values sit exactly on bin edges
        0 => (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect(),
        1 => (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        _ => (0..n)
            .map(|_| rng.gen_range(0..=m) as f64 / m as f64 * 0.03 - 0.01)
            .collect(),
    };
    (values, m)
}

fn membership_counts(values: &[f64], m: usize) -> Vec<u64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![values.len() as u64];
    }
    let mut edges: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * (i as f64 / m as f64)).collect();
    edges[m] = hi;
    (0..m)
        .map(|i| {
            values
                .iter()
                .filter(|&&x| x >= edges[i] && (x < edges[i + 1] || (i == m - 1 && x <= edges[i + 1])))
                .count() as u64
        })
        .collect()
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let (values, m) = random_case(&mut rng);
        let h = build_histogram(&values, m).unwrap();
        let want = membership_counts(&values, m);
        if h.counts() != want.as_slice() {
            return Verdict::Fail(format!(
                "case {case}: counts {:?} vs oracle {want:?} for {values:?}",
                h.counts()
            ));
        }
        let n = values.len() as f64;
        let direct: f64 = want
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum();
        let err = (shannon_entropy(&h, LogBase::E).value - direct).abs();
        worst = worst.max(err);
        if err > 1e-12 {
            return Verdict::Fail(format!("case {case}: entropy off by {err:e}"));
        }
    }
    Verdict::Pass(format!(
        "1000 cases (N<=50, M<=10) counts exact, entropy max err {worst:.1e}"
    ))
}

// 4 ---------------------------------------------------------------------

fn affine_invariance() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.gen_range(2..=300);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let mut a: f64 = rng.gen_range(-50.0..50.0);
        if a.abs() < 1e-3 {
            a = 1.5;
        }
        let b: f64 = rng.gen_range(-10.0..10.0);
        let moved: Vec<f64> = values.iter().map(|x| a * x + b).collect();
        let m0 = measure_set(&values, 20, LogBase::E).unwrap();
        let m1 = measure_set(&moved, 20, LogBase::E).unwrap();
        if m0.entropy.value.to_bits() != m1.entropy.value.to_bits() {
            return Verdict::Fail(format!(
                "case {case}: entropy {} vs {} under a={a}, b={b}",
                m0.entropy.value, m1.entropy.value
            ));
        }
        let rel = (m1.std - a.abs() * m0.std).abs() / (a.abs() * m0.std);
        worst = worst.max(rel);
        if rel > 1e-12 {
            return Verdict::Fail(format!("case {case}: std scaling rel err {rel:e}"));
        }
    }
    Verdict::Pass(format!(
        "200 series: entropy bit-identical, std rel err max {worst:.1e}"
    ))
}

// 5 ---------------------------------------------------------------------

fn gaussian_entropy_oracle() -> Verdict {
    let oracle = gaussian_oracle();
    let mut sum = 0.0;
    let mut outside = Vec::new();
    let reps = 1000;
    for seed in 0..reps {
        let r = gaussian_returns(&SynthSpec::gaussian(oracle.n, 0.0, 1.0, seed)).unwrap();
        let h = shannon_entropy(&build_histogram(&r, 20).unwrap(), LogBase::E).value;
        sum += h;
        if h < oracle.min || h > oracle.max {
            outside.push(format!("seed {seed}: {h:.6}"));
        }
    }
    let mean = sum / reps as f64;
    let diff = (mean - oracle.mean).abs();
    verdict(
        diff <= 0.01 && outside.is_empty(),
        format!(
            "mean {mean:.6} vs oracle {:.6} (|d| {diff:.6} <= 0.01); {} of {reps} outside [{:.6}, {:.6}]",
            oracle.mean,
            outside.len(),
            oracle.min,
            oracle.max
        ),
    )
}

// 6 ---------------------------------------------------------------------

fn event_split_count() -> Verdict {
    let dates = volentropy::synth::weekday_dates(parse_date("2021-03-01").unwrap(), 504);
    let points = dates
        .iter()
        .enumerate()
        .map(|(i, &date)| PricePoint {
            date,
            close: 100.0 + (i % 13) as f64,
        })
        .collect();
    let series = PriceSeries::new("FIX", points).unwrap();
    let event = dates[252];
    let split = split_at_event(&series, event, Span::Years(1), ReturnMode::Log).unwrap();
    verdict(
        split.before.n() == 251 && split.after.n() == 251,
        format!(
            "252 + 252 trading days around {event}: N before {}, N after {}",
            split.before.n(),
            split.after.n()
        ),
    )
}

// 7 ---------------------------------------------------------------------

fn regime_switch_detection() -> Verdict {
    let bands = scan_bands();
    let lengths: Vec<usize> = bands.iter().map(|b| b.length).collect();
    let (mut ratio_ok, mut departed, mut departed_central) = (0, 0, 0);
    for seed in 0..100 {
        let spec = SynthSpec::regime_switch(252, 252, 0.0, 0.01, 0.02, seed);
        let prices = regime_switch_series(&spec).unwrap();
        let event = spec.regime_change_date().unwrap();
        let split = split_at_event(&prices, event, Span::Years(1), ReturnMode::Log).unwrap();
        let ratio = std_dev(&split.after.values()).unwrap() / std_dev(&split.before.values()).unwrap();
        if (1.7..=2.3).contains(&ratio) {
            ratio_ok += 1;
        }
        let scan = window_scan(&prices, event, &lengths, Side::After, 20, LogBase::E, ReturnMode::Log).unwrap();
        let mut out_full = false;
        let mut out_central = false;
        for (p, b) in scan.points.iter().zip(&bands) {
            assert_eq!(p.window_length, b.length);
            let h = p.entropy.value;
            out_full |= h < b.min || h > b.max;
            out_central |= h < b.q025 || h > b.q975;
        }
        departed += out_full as u32;
        departed_central += out_central as u32;
    }
    verdict(
        ratio_ok >= 95 && departed >= 90,
        format!(
            "std ratio in [1.7, 2.3]: {ratio_ok}/100 (need 95); after-scan outside single-regime [min, max] band: \
             {departed}/100 (need 90); outside central 95% band: {departed_central}/100"
        ),
    )
}

// 8 ---------------------------------------------------------------------

fn end_to_end_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let data = fixture("fixtures/mini");
    let run = |out: &str| {
        let out = tmp.path().join(out);
        let code = volentropy::cli::run([
            "volentropy".into(),
            "analyze".into(),
            "--quiet".into(),
            "--data".into(),
            data.clone().into_os_string(),
            "--universe".into(),
            data.join("mini.universe").into_os_string(),
            "--event-date".into(),
            "2022-02-24".into(),
            "--jobs".into(),
            "4".into(),
            "--out".into(),
            out.clone().into_os_string(),
        ]);
        (code, fs::read(out.join("manifest.json")).unwrap_or_default())
    };
    let (c1, m1) = run("a");
    let (c2, m2) = run("b");
    let files = serde_json::from_slice::<serde_json::Value>(&m1)
        .ok()
        .and_then(|v| v["files"].as_array().map(|f| f.len()))
        .unwrap_or(0);
    verdict(
        c1 == 0 && c2 == 0 && !m1.is_empty() && m1 == m2,
        format!("exit codes {c1}/{c2}; {files} files; manifests identical: {}", m1 == m2),
    )
}

// 9 ---------------------------------------------------------------------

const STD_TOL: f64 = 0.002;
const ENTROPY_TOL: f64 = 0.05;

fn data_gated_reproduction() -> Verdict {
    let Some(dir) = std::env::var_os("VOLENTROPY_WIG20_DIR") else {
        return Verdict::Skip("VOLENTROPY_WIG20_DIR not set".into());
    };
    let dir = std::path::PathBuf::from(dir);
    let universe = default_universe();
    let mut store = BTreeMap::new();
    for sym in std::iter::once(&universe.index_symbol).chain(universe.assets.iter().map(|a| &a.symbol)) {
        let path = dir.join(format!("{sym}.csv"));
        if let Ok(f) = fs::File::open(&path) {
            match parse_price_csv(f, sym) {
                Ok(s) => {
                    store.insert(sym.clone(), s);
                }
                Err(e) => return Verdict::Fail(format!("{}: {e}", path.display())),
            }
        }
    }
    let params = StudyParams::new(parse_date("2022-02-24").unwrap());
    let table = match compare_universe(&universe, &store, &params, 4) {
        Ok(t) => t,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let mut report = Vec::new();
    let mut checked = 0;
    for want in reference_table() {
        let Some(row) = table.rows.iter().find(|r| r.symbol == want.symbol) else {
            report.push(format!("{}: no data", want.symbol));
            continue;
        };
        let (Some(b), Some(a)) = (&row.before, &row.after) else {
            report.push(format!("{}: missing side", want.symbol));
            continue;
        };
        let cells = [
            ("std_before", b.std, want.std_before(), STD_TOL),
            ("std_after", a.std, want.std_after(), STD_TOL),
            ("H_before", b.entropy.value, want.entropy_before(), ENTROPY_TOL),
            ("H_after", a.entropy.value, want.entropy_after(), ENTROPY_TOL),
        ];
        for (name, got, printed, tol) in cells {
            checked += 1;
            if (got - printed).abs() > tol {
                report.push(format!("{} {name} {got:.4} vs {printed}", want.symbol));
            }
        }
    }
    for line in &report {
        println!("      {line}");
    }
    verdict(
        report.is_empty(),
        format!(
            "{checked} cells checked (std ±{STD_TOL}, entropy ±{ENTROPY_TOL}); {} discrepancies",
            report.len()
        ),
    )
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "percentage-difference fixtures",
            budget: Duration::from_secs(1),
            run: pct_fixtures,
        },
        Criterion {
            id: 2,
            name: "entropy bound",
            budget: Duration::from_secs(1),
            run: entropy_bound,
        },
        Criterion {
            id: 3,
            name: "histogram/entropy oracle equivalence",
            budget: Duration::from_secs(10),
            run: oracle_equivalence,
        },
        Criterion {
            id: 4,
            name: "affine invariance",
            budget: Duration::from_secs(5),
            run: affine_invariance,
        },
        Criterion {
            id: 5,
            name: "Gaussian entropy oracle",
            budget: Duration::from_secs(60),
            run: gaussian_entropy_oracle,
        },
        Criterion {
            id: 6,
            name: "event-split count",
            budget: Duration::from_secs(1),
            run: event_split_count,
        },
        Criterion {
            id: 7,
            name: "regime-switch detection",
            budget: Duration::from_secs(120),
            run: regime_switch_detection,
        },
        Criterion {
            id: 8,
            name: "end-to-end determinism",
            budget: Duration::from_secs(5),
            run: end_to_end_determinism,
        },
        Criterion {
            id: 9,
            name: "data-gated reproduction",
            budget: Duration::from_secs(30),
            run: data_gated_reproduction,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let v = (c.run)();
        let took = start.elapsed();
        let over = took > c.budget;
        let (tag, detail) = match v {
            Verdict::Pass(d) if over => ("FAIL", format!("{d}; over time budget {:?}", c.budget)),
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => ("FAIL", d),
            Verdict::Skip(d) => ("SKIP", d),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} [{}] {} ({:.2}s): {detail}", c.id, c.name, took.as_secs_f64());
    }
    println!("acceptance: {} criteria, {failed} failed", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
