//! Centroid bank, auto-labeling of novel terrain, and the event log.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{estimate_mixture, MixtureEstimate, SemiError};
use crate::novelty::{detect_novel, EigenSpaceDetector};
use crate::readout::{classify, FeatureVector, ReadoutModel};
use crate::terrain::{LabeledDataset, Split};

/// How a centroid entered the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Supervised,
    AutoLabeled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub name: String,
    pub mean: Vec<f64>,
    pub count: usize,
    pub provenance: Provenance,
}

/// Known-class centroids plus the running counter used to mint labels for
/// novel classes (`new1`, `new2`, …).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidBank {
    pub centroids: Vec<Centroid>,
    next_novel_id: usize,
}

impl Default for CentroidBank {
    fn default() -> Self {
        Self::new()
    }
}

impl CentroidBank {
    pub fn new() -> Self {
        Self { centroids: Vec::new(), next_novel_id: 1 }
    }

    /// Supervised centroids from the train split of a labeled feature set.
    pub fn from_dataset(train: &LabeledDataset<FeatureVector>) -> Result<Self, SemiError> {
        let mut bank = Self::new();
        for class in &train.class_names {
            let members: Vec<&FeatureVector> = train
                .records
                .iter()
                .filter(|r| &r.label == class && r.split == Split::Train)
                .map(|r| &r.payload)
                .collect();
            if members.is_empty() {
                continue;
            }
            let dim = members[0].dim();
            let mut mean = vec![0.0; dim];
            for f in &members {
                for (m, v) in mean.iter_mut().zip(&f.values) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= members.len() as f64;
            }
            bank.insert(Centroid {
                name: class.clone(),
                mean,
                count: members.len(),
                provenance: Provenance::Supervised,
            })?;
        }
        Ok(bank)
    }

    pub fn insert(&mut self, centroid: Centroid) -> Result<(), SemiError> {
        if self.centroids.iter().any(|c| c.name == centroid.name) {
            return Err(SemiError::DuplicateLabel(centroid.name));
        }
        if let Some(first) = self.centroids.first() {
            if first.mean.len() != centroid.mean.len() {
                return Err(SemiError::Shape {
                    expected: first.mean.len(),
                    got: centroid.mean.len(),
                });
            }
        }
        self.centroids.push(centroid);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, |c| c.mean.len())
    }

    pub fn get(&self, label: &str) -> Option<&Centroid> {
        self.centroids.iter().find(|c| c.name == label)
    }
}

/// Outcome of one auto-label decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelDecision {
    Known { label: String },
    Novel { label: String, mixture: MixtureEstimate },
}

impl LabelDecision {
    pub fn label(&self) -> &str {
        match self {
            LabelDecision::Known { label } | LabelDecision::Novel { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoLabelRecord {
    pub step: usize,
    pub decision: LabelDecision,
    /// Mahalanobis distance that drove the novelty decision.
    pub distance: f64,
}

/// Eigenspace Mahalanobis radius within which a novel feature joins a
/// previously minted class instead of minting a new one.
pub const MERGE_RADIUS: f64 = 3.0;

/// Classify-or-mint for one feature. Non-novel features keep the readout's
/// label and leave the bank unchanged. Novel features first try to merge
/// with the nearest auto-labeled centroid within [`MERGE_RADIUS`]
/// (eigenspace distance, ties to the earliest minted); otherwise a fresh
/// `newK` class is minted with this feature as its centroid. Either way the
/// record carries the mixture description of the feature over the bank that
/// existed before the decision.
pub fn auto_label(
    detector: &EigenSpaceDetector,
    bank: &CentroidBank,
    model: &ReadoutModel,
    feature: &FeatureVector,
    step: usize,
) -> Result<(AutoLabelRecord, CentroidBank), SemiError> {
    let (novel, distance) = detect_novel(detector, feature)?;
    if !novel {
        let (label, _) = classify(model, feature)?;
        return Ok((
            AutoLabelRecord { step, decision: LabelDecision::Known { label }, distance },
            bank.clone(),
        ));
    }

    let mixture = estimate_mixture(bank, feature)?;
    let mut merged: Option<(usize, f64)> = None;
    for (i, c) in bank.centroids.iter().enumerate() {
        if c.provenance == Provenance::AutoLabeled {
            let d = detector.eigenspace_distance(&feature.values, &c.mean);
            if d <= MERGE_RADIUS && merged.map_or(true, |(_, best)| d < best) {
                merged = Some((i, d));
            }
        }
    }

    let mut new_bank = bank.clone();
    let label = match merged {
        Some((i, _)) => bank.centroids[i].name.clone(),
        None => {
            let label = format!("new{}", new_bank.next_novel_id);
            new_bank.next_novel_id += 1;
            new_bank.insert(Centroid {
                name: label.clone(),
                mean: feature.values.clone(),
                count: 1,
                provenance: Provenance::AutoLabeled,
            })?;
            label
        }
    };

    Ok((
        AutoLabelRecord { step, decision: LabelDecision::Novel { label, mixture }, distance },
        new_bank,
    ))
}

/// Running-mean centroid update; pure value-in, value-out.
pub fn update_bank(
    bank: &CentroidBank,
    label: &str,
    feature: &FeatureVector,
) -> Result<CentroidBank, SemiError> {
    let mut next = bank.clone();
    let dim = next.dim();
    if feature.dim() != dim {
        return Err(SemiError::Shape { expected: dim, got: feature.dim() });
    }
    let c = next
        .centroids
        .iter_mut()
        .find(|c| c.name == label)
        .ok_or_else(|| SemiError::UnknownLabel(label.to_string()))?;
    let n = c.count as f64;
    for (m, v) in c.mean.iter_mut().zip(&feature.values) {
        *m = (*m * n + v) / (n + 1.0);
    }
    c.count += 1;
    Ok(next)
}

/// Fold [`auto_label`] over a feature stream. Samples that merge into a
/// minted class also update its running centroid; supervised centroids stay
/// fixed (readout retraining is an explicit separate step).
pub fn process_stream(
    detector: &EigenSpaceDetector,
    bank: &CentroidBank,
    model: &ReadoutModel,
    features: &[FeatureVector],
) -> Result<(Vec<AutoLabelRecord>, CentroidBank), SemiError> {
    let mut bank = bank.clone();
    let mut records = Vec::with_capacity(features.len());
    for (step, feature) in features.iter().enumerate() {
        let (record, next_bank) = auto_label(detector, &bank, model, feature, step)?;
        bank = next_bank;
        if let LabelDecision::Novel { label, .. } = &record.decision {
            let just_minted =
                bank.get(label).map_or(false, |c| c.count == 1 && c.mean == feature.values);
            if !just_minted {
                bank = update_bank(&bank, label, feature)?;
            }
        }
        records.push(record);
    }
    Ok((records, bank))
}

/// Write records as line-delimited JSON.
pub fn write_event_log(path: &Path, records: &[AutoLabelRecord]) -> Result<(), SemiError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_event_log(path: &Path) -> Result<Vec<AutoLabelRecord>, SemiError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}
