//! Novelty detection in the eigenspace of training features, plus roughness
//! regression for unknown terrain.
//!
//! One pooled PCA basis is fitted over all known classes; a feature is novel
//! when its squared Mahalanobis distance in that basis exceeds a chi-square
//! quantile.

mod detector;
mod roughness;

pub use detector::{detect_novel, fit_detector, mahalanobis_distance, EigenSpaceDetector};
pub use roughness::{fit_roughness, predict_roughness, r_squared, RoughnessRegressor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoveltyError {
    #[error("need more than {d} samples to fit a {d}-dimensional eigenspace, got {n}")]
    SampleSize { n: usize, d: usize },
    #[error("requested dimension {requested} exceeds feature dimension {max}")]
    Dimension { requested: usize, max: usize },
    #[error("near-zero variance beyond dimension {usable_d}; requested {requested}")]
    Rank { usable_d: usize, requested: usize },
    #[error("confidence q = {0} outside (0, 1)")]
    Confidence(f64),
    #[error("feature dimension {got} does not match detector dimension {expected}")]
    Shape { expected: usize, got: usize },
    #[error("roughness targets are degenerate: need >= 3 distinct values, got {0}")]
    DegenerateTargets(usize),
    #[error("regression is singular")]
    Singular,
    #[error("inconsistent feature dimensions in training set")]
    Inconsistent,
    #[error("empty training set")]
    Empty,
    #[error("detector file: {0}")]
    Io(#[from] std::io::Error),
    #[error("detector file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported detector format version {0}")]
    FormatVersion(u32),
}
