//! The tapered whisker as a physical reservoir.
//!
//! A tapered cantilever beam is discretized with two-node Euler–Bernoulli
//! elements (4 DOF per element: transverse deflection and rotation at each
//! node), clamped at the base. Terrain traversal enters as prescribed support
//! motion, so the equations of motion for the relative coordinates are
//!
//! ```text
//! M q̈ + C q̇ + K q = -M ι ÿ_b(t)
//! ```
//!
//! with `ι` the unit transverse base-motion participation vector and `ÿ_b`
//! the base acceleration. Tap points along the axis expose deflection time
//! series — the reservoir's output channels.

mod element;
mod modal;
mod newmark;
mod taps;

pub use modal::modal_analysis;
pub use newmark::{mechanical_energy, simulate_response};
pub use taps::tap_signals;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Errors from whisker construction, analysis, and simulation.
#[derive(Debug, Error)]
pub enum WhiskerError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("resolution too coarse: n_elements = {0}, need at least 4")]
    Resolution(usize),
    #[error("mode count {requested} out of range 1..={max}")]
    ModeCount { requested: usize, max: usize },
    #[error("eigensolver failed to converge (symmetric QR residual above tolerance after iteration cap); matrix order {order}")]
    Eigensolver { order: usize },
    #[error("factorization of the mass matrix failed; matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("excitation is invalid: {0}")]
    BadExcitation(String),
    #[error("non-finite state at step {step} of {total}")]
    Divergence { step: usize, total: usize },
    #[error("tap list is empty")]
    EmptyTaps,
    #[error("tap position {0} outside (0, 1]")]
    TapOutOfRange(f64),
}

/// Tapered cantilever geometry. The radius varies linearly from
/// `base_radius_m` at the clamp to `tip_radius_m` at the free end.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WhiskerGeometry {
    pub length_m: f64,
    pub base_radius_m: f64,
    pub tip_radius_m: f64,
    pub n_elements: usize,
}

impl WhiskerGeometry {
    pub fn new(
        length_m: f64,
        base_radius_m: f64,
        tip_radius_m: f64,
        n_elements: usize,
    ) -> Result<Self, WhiskerError> {
        let g = Self { length_m, base_radius_m, tip_radius_m, n_elements };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), WhiskerError> {
        let finite_pos = |v: f64, name: &str| {
            if !v.is_finite() || v <= 0.0 {
                Err(WhiskerError::InvalidGeometry(format!("{name} must be finite and > 0, got {v}")))
            } else {
                Ok(())
            }
        };
        finite_pos(self.length_m, "length_m")?;
        finite_pos(self.base_radius_m, "base_radius_m")?;
        finite_pos(self.tip_radius_m, "tip_radius_m")?;
        if self.tip_radius_m > self.base_radius_m {
            return Err(WhiskerError::InvalidGeometry(format!(
                "tip radius {} exceeds base radius {}",
                self.tip_radius_m, self.base_radius_m
            )));
        }
        if self.n_elements < 4 {
            return Err(WhiskerError::Resolution(self.n_elements));
        }
        Ok(())
    }

    /// Taper ratio tip/base in (0, 1]; 1 is the straight whisker.
    pub fn taper_ratio(&self) -> f64 {
        self.tip_radius_m / self.base_radius_m
    }

    /// Radius at axial fraction `s` in [0, 1] (linear interpolation).
    pub fn radius_at(&self, s: f64) -> f64 {
        self.base_radius_m + (self.tip_radius_m - self.base_radius_m) * s
    }
}

/// Isotropic material plus Rayleigh damping coefficients
/// (`C = rayleigh_alpha * M + rayleigh_beta * K`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Material {
    pub youngs_modulus_pa: f64,
    pub density_kg_m3: f64,
    pub rayleigh_alpha: f64,
    pub rayleigh_beta: f64,
}

impl Material {
    pub fn new(
        youngs_modulus_pa: f64,
        density_kg_m3: f64,
        rayleigh_alpha: f64,
        rayleigh_beta: f64,
    ) -> Result<Self, WhiskerError> {
        let m = Self { youngs_modulus_pa, density_kg_m3, rayleigh_alpha, rayleigh_beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), WhiskerError> {
        if !self.youngs_modulus_pa.is_finite() || self.youngs_modulus_pa <= 0.0 {
            return Err(WhiskerError::InvalidMaterial(format!(
                "youngs_modulus_pa must be finite and > 0, got {}",
                self.youngs_modulus_pa
            )));
        }
        if !self.density_kg_m3.is_finite() || self.density_kg_m3 <= 0.0 {
            return Err(WhiskerError::InvalidMaterial(format!(
                "density_kg_m3 must be finite and > 0, got {}",
                self.density_kg_m3
            )));
        }
        for (v, name) in [(self.rayleigh_alpha, "rayleigh_alpha"), (self.rayleigh_beta, "rayleigh_beta")] {
            if !v.is_finite() || v < 0.0 {
                return Err(WhiskerError::InvalidMaterial(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Assembled clamped-base system. All matrices act on the free DOFs only
/// (base node eliminated): free node `i` (1-based along the axis) owns
/// deflection DOF `2*(i-1)` and rotation DOF `2*(i-1)+1`.
#[derive(Debug, Clone)]
pub struct DiscretizedWhisker {
    pub mass_matrix: DMatrix<f64>,
    pub stiffness_matrix: DMatrix<f64>,
    pub damping_matrix: DMatrix<f64>,
    /// Unit rigid transverse base-motion participation: 1 at every
    /// deflection DOF, 0 at every rotation DOF.
    pub influence_vector: DVector<f64>,
    /// Free node index (0-based, node at `x = (i+1) * L / n_elements`)
    /// to its (deflection, rotation) DOF indices.
    pub dof_map: Vec<(usize, usize)>,
    pub geometry: WhiskerGeometry,
    pub material: Material,
}

impl DiscretizedWhisker {
    /// Number of free DOFs.
    pub fn n_dofs(&self) -> usize {
        self.mass_matrix.nrows()
    }

    /// Number of free nodes.
    pub fn n_nodes(&self) -> usize {
        self.dof_map.len()
    }

    /// Axial fraction of free node `i`.
    pub fn node_fraction(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.geometry.n_elements as f64
    }
}

/// Natural frequencies and mass-normalized mode shapes
/// (`φᵀ M φ = I`), frequencies ascending in Hz.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub natural_frequencies_hz: Vec<f64>,
    /// One column per mode, rows indexed like the free DOFs.
    pub mode_shapes: DMatrix<f64>,
}

/// Time response of the free DOFs, relative to the moving base.
#[derive(Debug, Clone)]
pub struct ResponseTrajectory {
    pub dt_s: f64,
    /// `T x n` displacements (m); row per time step.
    pub node_displacements: DMatrix<f64>,
    /// `T x n` velocities (m/s).
    pub node_velocities: DMatrix<f64>,
}

impl ResponseTrajectory {
    pub fn n_steps(&self) -> usize {
        self.node_displacements.nrows()
    }
}

/// Deflection time series at the requested tap points, one column per tap,
/// tap positions strictly increasing.
#[derive(Debug, Clone)]
pub struct ReservoirSignal {
    pub dt_s: f64,
    pub tap_positions: Vec<f64>,
    /// `T x M` deflections (m).
    pub samples: DMatrix<f64>,
}

impl ReservoirSignal {
    pub fn n_taps(&self) -> usize {
        self.tap_positions.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.nrows() as f64 * self.dt_s
    }
}

pub use element::build_whisker;
