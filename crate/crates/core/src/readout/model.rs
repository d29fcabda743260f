//! Ridge-regression readout: training, classification, evaluation, and JSON
//! persistence.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, FeatureVector, ReadoutError, ReadoutModel};
use crate::terrain::LabeledDataset;

/// Per-dimension affine normalization fitted on training features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    /// Sample standard deviations; dimensions with zero variance fall back
    /// to scale 1 so they pass through centered.
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let dim = rows.first().map_or(0, |r| r.len());
        let mut means = vec![0.0; dim];
        for r in rows {
            for (m, v) in means.iter_mut().zip(*r) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut scales = vec![0.0; dim];
        if n > 1 {
            for r in rows {
                for ((s, m), v) in scales.iter_mut().zip(&means).zip(*r) {
                    *s += (v - m).powi(2);
                }
            }
            for s in &mut scales {
                *s = (*s / (n - 1) as f64).sqrt();
            }
        }
        for s in &mut scales {
            if *s <= 0.0 || !s.is_finite() {
                *s = 1.0;
            }
        }
        Self { means, scales }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, values: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            values.len(),
            values
                .iter()
                .zip(&self.means)
                .zip(&self.scales)
                .map(|((v, m), s)| (v - m) / s),
        )
    }
}

/// Cholesky solve that also rejects numerically singular systems: a pivot
/// ratio below 1e-7 means the normal equations lost about half the mantissa,
/// which only happens with rank-deficient features and no ridge.
pub(crate) fn solve_spd(gram: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = gram.cholesky()?;
    let l = chol.l();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0_f64;
    for i in 0..l.nrows() {
        min_pivot = min_pivot.min(l[(i, i)]);
        max_pivot = max_pivot.max(l[(i, i)]);
    }
    if !(min_pivot > 1e-7 * max_pivot) {
        return None;
    }
    Some(chol.solve(rhs))
}

/// Fit the readout by the direct normal-equations solve
/// `(XᵀX + λ diag(0,1,…,1)) W = XᵀY` with standardized features, a bias
/// column (unpenalized), and one-hot targets, factored by Cholesky.
/// Class order is the dataset's sorted label set.
pub fn train_readout(
    train: &LabeledDataset<FeatureVector>,
    ridge_lambda: f64,
) -> Result<ReadoutModel, ReadoutError> {
    if train.records.is_empty() {
        return Err(ReadoutError::EmptyDataset);
    }
    let classes = train.class_names.clone();
    let k = classes.len();
    if k < 2 {
        return Err(ReadoutError::ClassCount(k));
    }
    for c in &classes {
        if !train.records.iter().any(|r| &r.label == c) {
            return Err(ReadoutError::EmptyClass(c.clone()));
        }
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(ReadoutError::InvalidFeature(format!("ridge_lambda = {ridge_lambda}")));
    }

    let n = train.records.len();
    let dim = train.records[0].payload.dim();
    for r in &train.records {
        r.payload.validate()?;
        if r.payload.dim() != dim {
            return Err(ReadoutError::Shape { expected: dim, got: r.payload.dim() });
        }
    }

    let rows: Vec<&[f64]> = train.records.iter().map(|r| r.payload.values.as_slice()).collect();
    let standardization = Standardization::fit(&rows);

    let mut x = DMatrix::<f64>::zeros(n, dim + 1);
    let mut y = DMatrix::<f64>::zeros(n, k);
    for (i, r) in train.records.iter().enumerate() {
        x[(i, 0)] = 1.0;
        let z = standardization.apply(&r.payload.values);
        for j in 0..dim {
            x[(i, j + 1)] = z[j];
        }
        let class = classes.iter().position(|c| c == &r.label).expect("label in class set");
        y[(i, class)] = 1.0;
    }

    let mut gram = x.transpose() * &x;
    for j in 1..=dim {
        gram[(j, j)] += ridge_lambda;
    }
    let rhs = x.transpose() * y;
    let weights = solve_spd(gram, &rhs).ok_or(ReadoutError::Singular)?;

    Ok(ReadoutModel { weights, class_names: classes, ridge_lambda, standardization })
}

/// Scores for one feature vector and the argmax label; exact ties go to the
/// lowest class index.
pub fn classify(
    model: &ReadoutModel,
    feature: &FeatureVector,
) -> Result<(String, Vec<f64>), ReadoutError> {
    if feature.dim() != model.n_features() {
        return Err(ReadoutError::Shape { expected: model.n_features(), got: feature.dim() });
    }
    let z = model.standardization.apply(&feature.values);
    let mut aug = DVector::<f64>::zeros(model.n_features() + 1);
    aug[0] = 1.0;
    aug.rows_mut(1, model.n_features()).copy_from(&z);
    let scores = model.weights.transpose() * aug;

    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Ok((model.class_names[best].clone(), scores.iter().copied().collect()))
}

/// Confusion matrix over a labeled set (rows true, columns predicted).
pub fn evaluate(
    model: &ReadoutModel,
    test: &LabeledDataset<FeatureVector>,
) -> Result<ConfusionMatrix, ReadoutError> {
    if test.records.is_empty() {
        return Err(ReadoutError::EmptyDataset);
    }
    let k = model.n_classes();
    let mut counts = vec![vec![0u64; k]; k];
    for r in &test.records {
        let row = model
            .class_names
            .iter()
            .position(|c| c == &r.label)
            .ok_or_else(|| ReadoutError::UnknownLabel(r.label.clone()))?;
        let (_, scores) = classify(model, &r.payload)?;
        let mut col = 0;
        for i in 1..k {
            if scores[i] > scores[col] {
                col = i;
            }
        }
        counts[row][col] += 1;
    }
    let total: u64 = counts.iter().flatten().sum();
    let trace: u64 = (0..k).map(|i| counts[i][i]).sum();
    let per_class_recall = (0..k)
        .map(|i| {
            let row_total: u64 = counts[i].iter().sum();
            if row_total == 0 { f64::NAN } else { counts[i][i] as f64 / row_total as f64 }
        })
        .collect();
    Ok(ConfusionMatrix {
        class_names: model.class_names.clone(),
        counts,
        accuracy: trace as f64 / total as f64,
        per_class_recall,
    })
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ReadoutModelFile {
    format_version: u32,
    class_names: Vec<String>,
    ridge_lambda: f64,
    standardization: Standardization,
    /// Row-major `(M+1) x K`, bias row first.
    weights: Vec<Vec<f64>>,
}

impl ReadoutModel {
    pub fn save_json(&self, path: &Path) -> Result<(), ReadoutError> {
        let file = ReadoutModelFile {
            format_version: MODEL_FORMAT_VERSION,
            class_names: self.class_names.clone(),
            ridge_lambda: self.ridge_lambda,
            standardization: self.standardization.clone(),
            weights: (0..self.weights.nrows())
                .map(|i| self.weights.row(i).iter().copied().collect())
                .collect(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, ReadoutError> {
        let file: ReadoutModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(ReadoutError::FormatVersion(file.format_version));
        }
        let rows = file.weights.len();
        let cols = file.class_names.len();
        let weights = DMatrix::from_fn(rows, cols, |i, j| file.weights[i][j]);
        Ok(Self {
            weights,
            class_names: file.class_names,
            ridge_lambda: file.ridge_lambda,
            standardization: file.standardization,
        })
    }
}
