//! Report bundle written to an output directory.
//!
//! Layout:
//!
//! ```text
//! table.txt  table.csv  table.json   comparison table
//! config.toml                        effective configuration
//! hist/<SYMBOL>_before.csv           histogram of each side
//! hist/<SYMBOL>_after.csv
//! hist/<SYMBOL>.svg                  before/after overlay
//! scan.csv  scan.svg                 window scans (when present)
//! manifest.json                      every file above with its SHA-256
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::svg::{render_histogram_svg, render_scan_plot, PlotStyle};
use super::table::{render_table, TableFormat};
use super::ReportError;
use crate::dates::format_date;
use crate::event_study::{ComparisonTable, Side, WindowScanResult};
use crate::measures::Histogram;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub table: ComparisonTable,
    pub histograms: BTreeMap<(String, Side), Histogram>,
    pub scans: Vec<WindowScanResult>,
    /// Effective configuration, TOML. Enough to reproduce every number.
    pub config_echo: String,
    pub style: PlotStyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub files: Vec<ManifestEntry>,
}

fn file_stem(symbol: &str) -> String {
    symbol
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Writer<'a> {
    root: &'a Path,
    entries: Vec<ManifestEntry>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &str, content: &[u8]) -> Result<(), ReportError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| ReportError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, content).map_err(|source| ReportError::Io { path, source })?;
        self.entries.push(ManifestEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(content)),
            bytes: content.len() as u64,
        });
        Ok(())
    }
}

pub fn write_report_bundle(bundle: &ReportBundle, dir: &Path) -> Result<Manifest, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut w = Writer {
        root: dir,
        entries: Vec::new(),
    };
    let style = PlotStyle {
        metadata: Some(bundle.config_echo.clone()),
        ..bundle.style.clone()
    };

    w.write("table.txt", render_table(&bundle.table, TableFormat::Text).as_bytes())?;
    w.write("table.csv", render_table(&bundle.table, TableFormat::Csv).as_bytes())?;
    w.write("table.json", render_table(&bundle.table, TableFormat::Json).as_bytes())?;
    w.write("config.toml", bundle.config_echo.as_bytes())?;

    let event = format_date(bundle.table.params.event_date);
    let mut symbols: Vec<&String> = bundle.histograms.keys().map(|(s, _)| s).collect();
    symbols.dedup();
    for symbol in symbols {
        let stem = file_stem(symbol);
        let before = bundle.histograms.get(&(symbol.clone(), Side::Before));
        let after = bundle.histograms.get(&(symbol.clone(), Side::After));
        for (side, h) in [(Side::Before, before), (Side::After, after)] {
            if let Some(h) = h {
                w.write(&format!("hist/{stem}_{side}.csv"), h.to_csv().as_bytes())?;
            }
        }
        let svg = match (before, after) {
            (Some(b), a) => render_histogram_svg(b, a, &format!("{symbol}: returns before/after {event}"), &style),
            (None, Some(a)) => {
                let after_only = PlotStyle {
                    before_color: style.after_color.clone(),
                    ..style.clone()
                };
                render_histogram_svg(a, None, &format!("{symbol}: returns after {event}"), &after_only)
            }
            (None, None) => continue,
        };
        w.write(&format!("hist/{stem}.svg"), svg.as_bytes())?;
    }

    if bundle.scans.iter().any(|s| !s.points.is_empty()) {
        let mut csv = String::from("symbol,side,window_length,n_returns,entropy\n");
        for s in &bundle.scans {
            for p in &s.points {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.symbol, s.side, p.window_length, p.n_returns, p.entropy.value
                ));
            }
        }
        w.write("scan.csv", csv.as_bytes())?;
        let title = format!("Entropy by window length around {event}");
        w.write("scan.svg", render_scan_plot(&bundle.scans, &title, &style)?.as_bytes())?;
    }

    let mut files = w.entries;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        files,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path: PathBuf = dir.join("manifest.json");
    fs::write(&path, json).map_err(|source| ReportError::Io { path, source })?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dates::parse_date;
    use crate::event_study::StudyParams;
    use crate::measures::build_histogram;

    fn minimal() -> ReportBundle {
        let mut histograms = BTreeMap::new();
        histograms.insert(
            ("IDX".to_string(), Side::Before),
            build_histogram(&[0.1, 0.2, 0.4], 3).unwrap(),
        );
        histograms.insert(
            ("IDX".to_string(), Side::After),
            build_histogram(&[0.0, 0.3, 0.5], 3).unwrap(),
        );
        ReportBundle {
            table: ComparisonTable {
                params: StudyParams::new(parse_date("2022-02-24").unwrap()),
                index_row: None,
                rows: vec![],
            },
            histograms,
            scans: vec![],
            config_echo: "bins = 3\n".into(),
            style: PlotStyle::default(),
        }
    }

    #[test]
    fn manifest_hashes_verify() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_report_bundle(&minimal(), dir.path()).unwrap();
        assert_eq!(m.schema_version, 1);
        assert!(m.files.len() >= 3);
        for f in &m.files {
            let bytes = fs::read(dir.path().join(&f.path)).unwrap();
            assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256, "{}", f.path);
        }
        let on_disk: Manifest = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(on_disk, m);
        assert!(m.files.iter().any(|f| f.path == "hist/IDX.svg"));
    }

    #[test]
    fn written_twice_same_hashes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(
            write_report_bundle(&minimal(), a.path()).unwrap(),
            write_report_bundle(&minimal(), b.path()).unwrap()
        );
    }

    #[test]
    fn unwritable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = write_report_bundle(&minimal(), &blocker.join("out")).unwrap_err();
        assert!(matches!(err, ReportError::Io { .. }));
    }
}
