//! Labeled record collections and their CSV persistence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    sample_profile, traverse_to_excitation, ExcitationSignal, TerrainClass, TerrainError, Traversal,
};
use crate::readout::FeatureVector;
use crate::seed::splitmix64_stream;

/// Train/test membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

/// One labeled sample: an excitation signal or its extracted feature vector
/// plus the generation metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<P> {
    pub payload: P,
    pub label: String,
    pub speed_m_s: f64,
    pub roughness_sigma_m: f64,
    pub seed: u64,
    pub split: Split,
}

/// A non-empty set of labeled records over a declared class set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<P> {
    pub records: Vec<Record<P>>,
    /// Sorted unique label set.
    pub class_names: Vec<String>,
}

impl<P> LabeledDataset<P> {
    pub fn new(records: Vec<Record<P>>) -> Result<Self, TerrainError> {
        if records.is_empty() {
            return Err(TerrainError::Argument("empty dataset".into()));
        }
        let mut class_names: Vec<String> = records.iter().map(|r| r.label.clone()).collect();
        class_names.sort();
        class_names.dedup();
        Ok(Self { records, class_names })
    }

    /// Map every payload, keeping the metadata.
    pub fn map_payload<Q, E>(
        &self,
        mut f: impl FnMut(&Record<P>) -> Result<Q, E>,
    ) -> Result<LabeledDataset<Q>, E> {
        let mut records = Vec::with_capacity(self.records.len());
        for r in &self.records {
            records.push(Record {
                payload: f(r)?,
                label: r.label.clone(),
                speed_m_s: r.speed_m_s,
                roughness_sigma_m: r.roughness_sigma_m,
                seed: r.seed,
                split: r.split,
            });
        }
        Ok(LabeledDataset { records, class_names: self.class_names.clone() })
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Record<P>> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

/// Seed of the record at `index` (cell-major enumeration order): the
/// `(index + 1)`-th output of the splitmix64 stream seeded with
/// `master_seed`.
pub fn record_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64_stream(master_seed, index as u64 + 1)
}

/// Whether trial `trial` of a cell of `trials_per_cell` trials belongs to
/// the train split under `train_fraction` (the leading trials train).
pub fn trial_in_train(trial: usize, trials_per_cell: usize, train_fraction: f64) -> bool {
    trial < (train_fraction * trials_per_cell as f64).round() as usize
}

/// Generate one excitation record per `(class, traversal, trial)` cell.
///
/// Enumeration is class-major, then traversal, then trial, and each record's
/// profile is seeded by [`record_seed`], so any record is reproducible from
/// `(master_seed, index)` alone. The train/test split is stratified per cell
/// with the leading `round(train_fraction * trials_per_cell)` trials
/// training.
pub fn make_dataset(
    classes: &[TerrainClass],
    traversals: &[Traversal],
    trials_per_cell: usize,
    master_seed: u64,
    profile_dx_m: f64,
    train_fraction: f64,
) -> Result<LabeledDataset<ExcitationSignal>, TerrainError> {
    if classes.is_empty() {
        return Err(TerrainError::EmptyClasses);
    }
    if traversals.is_empty() {
        return Err(TerrainError::Argument("empty traversal list".into()));
    }
    if trials_per_cell < 1 {
        return Err(TerrainError::Argument("trials_per_cell must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(TerrainError::Argument(format!("train_fraction = {train_fraction}")));
    }
    for c in classes {
        c.validate()?;
    }
    for t in traversals {
        t.validate()?;
    }

    let mut records = Vec::with_capacity(classes.len() * traversals.len() * trials_per_cell);
    let mut index = 0usize;
    for class in classes {
        for traversal in traversals {
            let needed = traversal.speed_m_s * traversal.duration_s;
            let length = (needed.max(10.0 * class.correlation_length_m)) * 1.001 + profile_dx_m;
            for trial in 0..trials_per_cell {
                let seed = record_seed(master_seed, index);
                let profile = sample_profile(class, length, profile_dx_m, seed)?;
                let excitation = traverse_to_excitation(&profile, traversal, class.hardness)?;
                records.push(Record {
                    payload: excitation,
                    label: class.name.clone(),
                    speed_m_s: traversal.speed_m_s,
                    roughness_sigma_m: class.roughness_sigma_m,
                    seed,
                    split: if trial_in_train(trial, trials_per_cell, train_fraction) {
                        Split::Train
                    } else {
                        Split::Test
                    },
                });
                index += 1;
            }
        }
    }
    LabeledDataset::new(records)
}

/// Write a feature table: one tap column per position (named `tap_<pos>`),
/// then `label,speed,sigma,seed`.
pub fn write_feature_csv(
    dataset: &LabeledDataset<FeatureVector>,
    path: &Path,
) -> Result<(), TerrainError> {
    let first = &dataset.records[0].payload;
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> =
        first.tap_positions.iter().map(|p| format!("tap_{p}")).collect();
    header.extend(["label", "speed", "sigma", "seed"].map(String::from));
    writer.write_record(&header)?;
    for r in &dataset.records {
        let mut row: Vec<String> = r.payload.values.iter().map(|v| v.to_string()).collect();
        row.push(r.label.clone());
        row.push(r.speed_m_s.to_string());
        row.push(r.roughness_sigma_m.to_string());
        row.push(r.seed.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a feature table written by [`write_feature_csv`]. The split is not
/// stored in the table; it is recomputed from row order with the same
/// leading-trials rule used at generation (records grouped by
/// `(label, speed)` in file order).
pub fn read_feature_csv(
    path: &Path,
    train_fraction: f64,
) -> Result<LabeledDataset<FeatureVector>, TerrainError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    let tap_positions: Vec<f64> = header
        .iter()
        .take_while(|h| h.starts_with("tap_"))
        .map(|h| {
            h[4..]
                .parse::<f64>()
                .map_err(|e| TerrainError::Parse(format!("tap column `{h}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let n_taps = tap_positions.len();
    if n_taps == 0 || header.len() != n_taps + 4 {
        return Err(TerrainError::Parse(format!(
            "expected <taps...>,label,speed,sigma,seed header, got {header:?}"
        )));
    }

    let mut raw = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| -> Result<f64, TerrainError> {
            row[i].parse::<f64>().map_err(|e| TerrainError::Parse(format!("row field {i}: {e}")))
        };
        let values: Vec<f64> = (0..n_taps).map(field).collect::<Result<_, _>>()?;
        let label = row[n_taps].to_string();
        let speed = field(n_taps + 1)?;
        let sigma = field(n_taps + 2)?;
        let seed = row[n_taps + 3]
            .parse::<u64>()
            .map_err(|e| TerrainError::Parse(format!("seed: {e}")))?;
        raw.push((values, label, speed, sigma, seed));
    }

    // Recompute the split: occurrence index within each (label, speed) cell.
    let mut cell_sizes: std::collections::BTreeMap<(String, String), usize> =
        std::collections::BTreeMap::new();
    for (_, label, speed, _, _) in &raw {
        *cell_sizes.entry((label.clone(), speed.to_string())).or_default() += 1;
    }
    let mut seen: std::collections::BTreeMap<(String, String), usize> =
        std::collections::BTreeMap::new();
    let mut records = Vec::with_capacity(raw.len());
    for (values, label, speed, sigma, seed) in raw {
        let key = (label.clone(), speed.to_string());
        let trial = {
            let c = seen.entry(key.clone()).or_default();
            let t = *c;
            *c += 1;
            t
        };
        let split = if trial_in_train(trial, cell_sizes[&key], train_fraction) {
            Split::Train
        } else {
            Split::Test
        };
        records.push(Record {
            payload: FeatureVector {
                values,
                tap_positions: tap_positions.clone(),
                window_s: 0.0,
            },
            label,
            speed_m_s: speed,
            roughness_sigma_m: sigma,
            seed,
            split,
        });
    }
    LabeledDataset::new(records)
}
