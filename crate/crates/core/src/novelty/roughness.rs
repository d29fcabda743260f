//! Ridge regression of terrain roughness on reservoir features.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::NoveltyError;
use crate::readout::{solve_spd, FeatureVector, Standardization};
use crate::terrain::LabeledDataset;

/// Internal ridge weight. Standardized features make the Gram matrix order
/// `n`, so this is far below rounding and only guards conditioning.
const ROUGHNESS_LAMBDA: f64 = 1e-9;

/// Affine map from standardized features to roughness sigma (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessRegressor {
    /// `M + 1` weights, bias first.
    pub weights: Vec<f64>,
    pub standardization: Standardization,
}

/// Fit roughness: ridge regression of each record's `roughness_sigma_m` on
/// its standardized feature vector. Needs at least three distinct roughness
/// levels in the training set.
pub fn fit_roughness(
    train: &LabeledDataset<FeatureVector>,
) -> Result<RoughnessRegressor, NoveltyError> {
    let n = train.records.len();
    if n == 0 {
        return Err(NoveltyError::Empty);
    }
    let dim = train.records[0].payload.dim();
    if train.records.iter().any(|r| r.payload.dim() != dim) {
        return Err(NoveltyError::Inconsistent);
    }
    let mut levels: Vec<f64> = train.records.iter().map(|r| r.roughness_sigma_m).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 3 {
        return Err(NoveltyError::DegenerateTargets(levels.len()));
    }

    let rows: Vec<&[f64]> = train.records.iter().map(|r| r.payload.values.as_slice()).collect();
    let standardization = Standardization::fit(&rows);

    let mut x = DMatrix::<f64>::zeros(n, dim + 1);
    let mut y = DMatrix::<f64>::zeros(n, 1);
    for (i, r) in train.records.iter().enumerate() {
        x[(i, 0)] = 1.0;
        let z = standardization.apply(&r.payload.values);
        for j in 0..dim {
            x[(i, j + 1)] = z[j];
        }
        y[(i, 0)] = r.roughness_sigma_m;
    }

    let mut gram = x.transpose() * &x;
    for j in 1..=dim {
        gram[(j, j)] += ROUGHNESS_LAMBDA;
    }
    let rhs = x.transpose() * y;
    let w = solve_spd(gram, &rhs).ok_or(NoveltyError::Singular)?;

    Ok(RoughnessRegressor {
        weights: w.column(0).iter().copied().collect(),
        standardization,
    })
}

/// Predicted roughness sigma (m), clamped at zero.
pub fn predict_roughness(
    regressor: &RoughnessRegressor,
    feature: &FeatureVector,
) -> Result<f64, NoveltyError> {
    let dim = regressor.weights.len() - 1;
    if feature.dim() != dim {
        return Err(NoveltyError::Shape { expected: dim, got: feature.dim() });
    }
    let z = regressor.standardization.apply(&feature.values);
    let raw = regressor.weights[0]
        + DVector::from_column_slice(&regressor.weights[1..]).dot(&z);
    Ok(raw.max(0.0))
}

/// Coefficient of determination of `predicted` against `actual`.
pub fn r_squared(predicted: &[f64], actual: &[f64]) -> f64 {
    assert_eq!(predicted.len(), actual.len());
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    let ss_res: f64 = predicted.iter().zip(actual).map(|(p, a)| (a - p).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

const ROUGHNESS_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RoughnessFile {
    format_version: u32,
    #[serde(flatten)]
    regressor: RoughnessRegressor,
}

impl RoughnessRegressor {
    pub fn save_json(&self, path: &Path) -> Result<(), NoveltyError> {
        let file = RoughnessFile { format_version: ROUGHNESS_FORMAT_VERSION, regressor: self.clone() };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, NoveltyError> {
        let file: RoughnessFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.format_version != ROUGHNESS_FORMAT_VERSION {
            return Err(NoveltyError::FormatVersion(file.format_version));
        }
        Ok(file.regressor)
    }
}
