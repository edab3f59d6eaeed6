//! Fixture loaders shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

/// One printed row of the reference comparison table.
#[derive(Debug, Clone)]
pub struct ReferenceRow {
    pub symbol: String,
    /// std before, std after, std pct, entropy before, entropy after, entropy pct
    pub cells: [f64; 6],
}

impl ReferenceRow {
    pub fn std_before(&self) -> f64 {
        self.cells[0]
    }
    pub fn std_after(&self) -> f64 {
        self.cells[1]
    }
    pub fn std_pct(&self) -> f64 {
        self.cells[2]
    }
    pub fn entropy_before(&self) -> f64 {
        self.cells[3]
    }
    pub fn entropy_after(&self) -> f64 {
        self.cells[4]
    }
    pub fn entropy_pct(&self) -> f64 {
        self.cells[5]
    }
}

pub fn reference_table() -> Vec<ReferenceRow> {
    let text = std::fs::read_to_string(fixture("fixtures/reference_table.csv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("symbol"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 7, "{l}");
            let mut cells = [0.0; 6];
            for (c, v) in cells.iter_mut().zip(&f[1..]) {
                *c = v.parse().unwrap();
            }
            ReferenceRow {
                symbol: f[0].to_string(),
                cells,
            }
        })
        .collect()
}

/// Single-regime entropy band for one window length, frozen from the
/// brute-force oracle in `tests/oracles`.
#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub length: usize,
    pub min: f64,
    pub q025: f64,
    pub q975: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GaussianOracle {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

fn oracle_text() -> String {
    std::fs::read_to_string(fixture("oracles/entropy_band_oracle.out")).unwrap()
}

pub fn gaussian_oracle() -> GaussianOracle {
    let text = oracle_text();
    let first = text.lines().next().unwrap();
    let get = |key: &str| -> f64 {
        first
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .unwrap_or_else(|| panic!("{key} missing from oracle output"))
            .parse()
            .unwrap()
    };
    GaussianOracle {
        n: get("n") as usize,
        mean: get("mean"),
        min: get("min"),
        max: get("max"),
    }
}

pub fn scan_bands() -> Vec<Band> {
    oracle_text()
        .lines()
        .filter(|l| l.starts_with('('))
        .map(|l| {
            let v: Vec<f64> = l
                .trim_matches(|c| c == '(' || c == ')' || c == ',')
                .split(',')
                .map(|x| x.trim().parse().unwrap())
                .collect();
            Band {
                length: v[0] as usize,
                min: v[1],
                q025: v[2],
                q975: v[3],
                max: v[4],
            }
        })
        .collect()
}
