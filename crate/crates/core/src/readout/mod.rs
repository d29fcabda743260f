//! The trainable half of reservoir computing: fixed-length features from tap
//! signals and a one-hot ridge-regression readout.

mod features;
mod model;

pub use features::{extract_dataset_features, extract_features, spectral_band_features};
pub use model::{classify, evaluate, train_readout, Standardization};
pub(crate) use model::solve_spd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nalgebra::DMatrix;

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("window of {samples} samples is too short (need >= 10)")]
    Window { samples: usize },
    #[error("signal duration {duration_s} s shorter than settle {settle_s} s + window {window_s} s")]
    DurationTooShort { duration_s: f64, settle_s: f64, window_s: f64 },
    #[error("feature dimension {got} does not match model dimension {expected}")]
    Shape { expected: usize, got: usize },
    #[error("label `{0}` is not among the model classes")]
    UnknownLabel(String),
    #[error("normal equations are singular; use ridge_lambda > 0")]
    Singular,
    #[error("need at least 2 classes, got {0}")]
    ClassCount(usize),
    #[error("class `{0}` has no training samples")]
    EmptyClass(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid feature vector: {0}")]
    InvalidFeature(String),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {0}")]
    FormatVersion(u32),
    #[error(transparent)]
    Whisker(#[from] crate::whisker::WhiskerError),
}

/// Per-tap steady-state RMS deflections — the reservoir's output for one
/// traversal window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// RMS deflection per tap (m), nonnegative.
    pub values: Vec<f64>,
    pub tap_positions: Vec<f64>,
    pub window_s: f64,
}

impl FeatureVector {
    pub fn validate(&self) -> Result<(), ReadoutError> {
        if self.values.len() != self.tap_positions.len() {
            return Err(ReadoutError::InvalidFeature(format!(
                "{} values vs {} tap positions",
                self.values.len(),
                self.tap_positions.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ReadoutError::InvalidFeature(format!("value {v}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Linear readout: standardized features (plus bias) to one-hot class
/// scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    /// `(M+1) x K`; row 0 is the bias.
    pub weights: DMatrix<f64>,
    pub class_names: Vec<String>,
    pub ridge_lambda: f64,
    pub standardization: Standardization,
}

impl ReadoutModel {
    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Classification counts (rows true, columns predicted) plus derived rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub per_class_recall: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}
