//! Semi-supervised handling of novel terrain: simplex-constrained mixtures
//! over known class centroids, auto-labeling, and centroid-bank growth.

mod autolabel;
mod simplex;

pub use autolabel::{
    auto_label, process_stream, read_event_log, update_bank, write_event_log, AutoLabelRecord,
    Centroid, CentroidBank, LabelDecision, Provenance, MERGE_RADIUS,
};
pub use simplex::{estimate_mixture, MixtureEstimate};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemiError {
    #[error("need at least 2 centroids, got {0}")]
    TooFewCentroids(usize),
    #[error("feature dimension {got} does not match bank dimension {expected}")]
    Shape { expected: usize, got: usize },
    #[error("label `{0}` is not in the bank")]
    UnknownLabel(String),
    #[error("label `{0}` already exists in the bank")]
    DuplicateLabel(String),
    #[error("simplex solver failed to reach KKT residual {residual} <= {tolerance} in {iterations} iterations")]
    Solver { residual: f64, tolerance: f64, iterations: usize },
    #[error(transparent)]
    Novelty(#[from] crate::novelty::NoveltyError),
    #[error(transparent)]
    Readout(#[from] crate::readout::ReadoutError),
    #[error("event log: {0}")]
    Io(#[from] std::io::Error),
    #[error("event log: {0}")]
    Json(#[from] serde_json::Error),
}
