//! Synthetic terrain: stochastic height profiles per terrain class and the
//! base-excitation signals produced by traversing them.
//!
//! A terrain class is a stationary Gaussian random field (squared-exponential
//! correlation) plus an optional periodic macro-texture, parameterized by
//! `(roughness sigma, correlation length, hardness, macro amplitude/wavelength)`.
//! Traversal at speed `v` turns a profile into a time series through a
//! hardness-shaped contact map.

mod dataset;
mod excitation;
mod field;

pub use dataset::{make_dataset, read_feature_csv, record_seed, write_feature_csv, LabeledDataset, Record, Split};
pub use excitation::{contact_map, traverse_to_excitation, CONTACT_KAPPA};
pub use field::sample_profile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("invalid terrain class `{name}`: {reason}")]
    InvalidClass { name: String, reason: String },
    #[error("invalid traversal: {0}")]
    InvalidTraversal(String),
    #[error("profile step {dx_m} m too coarse for correlation length {correlation_length_m} m (need dx < l/2)")]
    Resolution { dx_m: f64, correlation_length_m: f64 },
    #[error("profile length {length_m} m shorter than 10 correlation lengths ({min_m} m)")]
    TooShort { length_m: f64, min_m: f64 },
    #[error("traversal needs {needed_m} m but profile extends {available_m} m")]
    Extent { needed_m: f64, available_m: f64 },
    #[error("empty class list")]
    EmptyClasses,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dataset I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset parse: {0}")]
    Parse(String),
}

/// A terrain surface family: roughness field parameters plus contact
/// hardness. Named presets are plain data; see [`default_classes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainClass {
    pub name: String,
    /// Height standard deviation of the stochastic micro-texture (m).
    pub roughness_sigma_m: f64,
    /// Squared-exponential kernel scale (m).
    pub correlation_length_m: f64,
    /// Contact compliance scale in (0, 1]; 1 is fully rigid (identity
    /// contact map).
    pub hardness: f64,
    /// Amplitude of the periodic macro-texture (m); 0 disables it.
    pub macro_amplitude_m: f64,
    /// Wavelength of the macro-texture (m); must be > 0 when the amplitude
    /// is nonzero.
    pub macro_wavelength_m: f64,
}

impl TerrainClass {
    pub fn validate(&self) -> Result<(), TerrainError> {
        let fail = |reason: String| TerrainError::InvalidClass { name: self.name.clone(), reason };
        if self.name.is_empty() {
            return Err(fail("empty name".into()));
        }
        if !self.roughness_sigma_m.is_finite() || self.roughness_sigma_m < 0.0 {
            return Err(fail(format!("roughness_sigma_m = {}", self.roughness_sigma_m)));
        }
        if !self.correlation_length_m.is_finite() || self.correlation_length_m <= 0.0 {
            return Err(fail(format!("correlation_length_m = {}", self.correlation_length_m)));
        }
        if !(self.hardness > 0.0 && self.hardness <= 1.0) {
            return Err(fail(format!("hardness = {} outside (0, 1]", self.hardness)));
        }
        if !self.macro_amplitude_m.is_finite() || self.macro_amplitude_m < 0.0 {
            return Err(fail(format!("macro_amplitude_m = {}", self.macro_amplitude_m)));
        }
        if self.macro_amplitude_m > 0.0
            && (!self.macro_wavelength_m.is_finite() || self.macro_wavelength_m <= 0.0)
        {
            return Err(fail(format!(
                "macro_wavelength_m = {} with nonzero macro amplitude",
                self.macro_wavelength_m
            )));
        }
        Ok(())
    }
}

/// One sampled terrain realization on a uniform spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainProfile {
    pub dx_m: f64,
    pub heights_m: Vec<f64>,
    pub class_name: String,
    pub seed: u64,
}

impl TerrainProfile {
    /// Axial extent covered by the profile (m).
    pub fn extent_m(&self) -> f64 {
        (self.heights_m.len().saturating_sub(1)) as f64 * self.dx_m
    }

    /// Height at position `x_m` by linear interpolation (clamped ends).
    pub fn height_at(&self, x_m: f64) -> f64 {
        let n = self.heights_m.len();
        if n == 1 {
            return self.heights_m[0];
        }
        let pos = (x_m / self.dx_m).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        self.heights_m[i] * (1.0 - frac) + self.heights_m[i + 1] * frac
    }
}

/// Constant-speed traversal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traversal {
    pub speed_m_s: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
}

impl Traversal {
    pub fn validate(&self) -> Result<(), TerrainError> {
        for (v, name) in [
            (self.speed_m_s, "speed_m_s"),
            (self.sample_rate_hz, "sample_rate_hz"),
            (self.duration_s, "duration_s"),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(TerrainError::InvalidTraversal(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Uniformly sampled base-displacement time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSignal {
    pub dt_s: f64,
    pub base_displacement_m: Vec<f64>,
}

/// The six shipped terrain presets. The names follow common ground surfaces;
/// the parameter values are synthetic stand-ins chosen so the classes are
/// separable by the default whisker, not measurements of real materials.
pub fn default_classes() -> Vec<TerrainClass> {
    vec![
        TerrainClass {
            name: "flat".into(),
            roughness_sigma_m: 0.10e-3,
            correlation_length_m: 4.0e-3,
            hardness: 1.0,
            macro_amplitude_m: 0.0,
            macro_wavelength_m: 1.0,
        },
        TerrainClass {
            name: "carpet".into(),
            roughness_sigma_m: 0.45e-3,
            correlation_length_m: 8.0e-3,
            hardness: 0.35,
            macro_amplitude_m: 0.0,
            macro_wavelength_m: 1.0,
        },
        TerrainClass {
            name: "grass".into(),
            roughness_sigma_m: 1.30e-3,
            correlation_length_m: 9.0e-3,
            hardness: 0.5,
            macro_amplitude_m: 0.0,
            macro_wavelength_m: 1.0,
        },
        TerrainClass {
            name: "sand".into(),
            roughness_sigma_m: 0.85e-3,
            correlation_length_m: 2.5e-3,
            hardness: 0.7,
            macro_amplitude_m: 0.0,
            macro_wavelength_m: 1.0,
        },
        TerrainClass {
            name: "gravel".into(),
            roughness_sigma_m: 2.2e-3,
            correlation_length_m: 1.6e-3,
            hardness: 0.9,
            macro_amplitude_m: 0.0,
            macro_wavelength_m: 1.0,
        },
        TerrainClass {
            name: "brick".into(),
            roughness_sigma_m: 0.55e-3,
            correlation_length_m: 3.0e-3,
            hardness: 1.0,
            macro_amplitude_m: 1.2e-3,
            macro_wavelength_m: 8.0e-3,
        },
    ]
}
