//! Text, CSV, JSON and SVG renderings of study results.
//!
//! Every renderer is a pure function of its inputs. Nothing time- or
//! host-dependent is written, so identical inputs give identical bytes.

mod bundle;
mod svg;
mod table;

use std::path::PathBuf;

pub use self::bundle::{write_report_bundle, Manifest, ManifestEntry, ReportBundle, MANIFEST_SCHEMA_VERSION};
pub use self::svg::{render_histogram_svg, render_scan_plot, scan_y_range, PlotStyle, CANVAS_HEIGHT, CANVAS_WIDTH};
pub use self::table::{render_table, TableFormat};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scan plot needs at least one scan with one point")]
    EmptyScan,
}
