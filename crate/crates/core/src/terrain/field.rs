//! Gaussian random field profiles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{TerrainClass, TerrainError, TerrainProfile};
use crate::seed::derive_named;

/// Sample one profile realization of `class` on a grid of step `dx_m`.
///
/// Seeded white noise is filtered with a squared-exponential kernel
/// `g(x) = exp(-x² / (2 l²))` truncated at ±4 l, and the weights are
/// normalized so every height is exactly `N(0, sigma²)`; the sample standard
/// deviation therefore converges to `roughness_sigma_m` as the profile
/// grows. The optional macro-texture adds
/// `macro_amplitude_m * sin(2 pi x / macro_wavelength_m)`.
///
/// The noise stream is keyed by `(class name, seed)`, so identical inputs
/// reproduce identical profiles.
pub fn sample_profile(
    class: &TerrainClass,
    length_m: f64,
    dx_m: f64,
    seed: u64,
) -> Result<TerrainProfile, TerrainError> {
    class.validate()?;
    if !dx_m.is_finite() || dx_m <= 0.0 {
        return Err(TerrainError::Argument(format!("dx_m = {dx_m}")));
    }
    if !length_m.is_finite() || length_m <= 0.0 {
        return Err(TerrainError::Argument(format!("length_m = {length_m}")));
    }
    let ell = class.correlation_length_m;
    if dx_m >= ell / 2.0 {
        return Err(TerrainError::Resolution { dx_m, correlation_length_m: ell });
    }
    let min_length = 10.0 * ell;
    if length_m < min_length {
        return Err(TerrainError::TooShort { length_m, min_m: min_length });
    }

    let n = (length_m / dx_m).floor() as usize + 1;
    let mut heights = vec![0.0_f64; n];

    if class.roughness_sigma_m > 0.0 {
        let half_width = (4.0 * ell / dx_m).ceil() as usize;
        let weights: Vec<f64> = (-(half_width as i64)..=half_width as i64)
            .map(|j| {
                let x = j as f64 * dx_m;
                (-x * x / (2.0 * ell * ell)).exp()
            })
            .collect();
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let gain = class.roughness_sigma_m / norm;

        let mut rng = ChaCha8Rng::seed_from_u64(derive_named(seed, &class.name));
        let noise: Vec<f64> = (0..n + 2 * half_width)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();

        for (i, h) in heights.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                acc += w * noise[i + j];
            }
            *h = gain * acc;
        }
    }

    if class.macro_amplitude_m > 0.0 {
        let k = 2.0 * std::f64::consts::PI / class.macro_wavelength_m;
        for (i, h) in heights.iter_mut().enumerate() {
            *h += class.macro_amplitude_m * (k * i as f64 * dx_m).sin();
        }
    }

    Ok(TerrainProfile { dx_m, heights_m: heights, class_name: class.name.clone(), seed })
}
