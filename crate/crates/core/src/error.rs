use crate::event_study::EventError;
use crate::ingest::IngestError;
use crate::measures::MeasureError;
use crate::report::ReportError;
use crate::returns::ReturnsError;
use crate::synth::SynthError;

/// Crate-wide error, wrapping the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Returns(#[from] ReturnsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
