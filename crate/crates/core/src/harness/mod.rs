//! Experiment engine: configs, grid search, fitted pipelines, reports and
//! synthetic data.

pub mod config;
pub mod grid;
pub mod pipeline;
pub mod report;
pub mod run;
pub mod synth;

use std::io;

pub use config::{ExperimentId, ExperimentSpec, FeatureSource, parse_config, parse_config_str, preset};
pub use grid::{FeatureSpec, GridPoint, enumerate_grid};
pub use pipeline::{Pipeline, Resources};
pub use report::{Report, emit_report, format_percent};
pub use run::{RunResult, evaluate_grid, run_experiment, run_experiment_with};
pub use synth::{Splits, SynthParams, generate_affix_corpus, generate_synthetic};

use crate::codec::CodecError;
use crate::corpus::CorpusError;
use crate::fasttext::FastTextError;
use crate::metrics::MetricsError;
use crate::morph::MorphError;
use crate::surface::SurfaceError;
use crate::svc::SvcError;
use crate::tfidf::TfidfError;

/// Environment variable bounding the experiment worker pool.
pub const WORKERS_ENV: &str = "DIALECTID_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown config key \"{0}\"")]
    UnknownKey(String),
    #[error("invalid value for \"{0}\"")]
    InvalidValue(String),
    #[error("config schema violation: {0}")]
    SchemaViolation(String),
    #[error("the grid has no points")]
    EmptyGrid,
    #[error("no results to report")]
    EmptyResults,
    #[error("document {id} has label \"{label}\" which the training data lacks")]
    LabelMismatch { id: String, label: String },
    #[error("grid point {index} ({config}): {source}")]
    AtGridPoint {
        index: usize,
        config: String,
        source: Box<HarnessError>,
    },
    #[error("{0}")]
    Internal(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Tfidf(#[from] TfidfError),
    #[error(transparent)]
    FastText(#[from] FastTextError),
    #[error(transparent)]
    Svc(#[from] SvcError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Broad error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Internal,
}

impl HarnessError {
    pub fn class(&self) -> ErrorClass {
        match self {
            Self::UnknownKey(_)
            | Self::InvalidValue(_)
            | Self::SchemaViolation(_)
            | Self::EmptyGrid
            | Self::Surface(SurfaceError::MissingStoplist)
            | Self::Morph(MorphError::UnknownMode(_))
            | Self::Tfidf(TfidfError::InvalidConfig(_) | TfidfError::InvalidWeight(_))
            | Self::FastText(FastTextError::InvalidParams(_))
            | Self::Svc(SvcError::InvalidParams(_)) => ErrorClass::Config,
            Self::AtGridPoint { source, .. } => source.class(),
            Self::Internal(_) | Self::Metrics(_) => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
