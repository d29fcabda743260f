//! Traversal-to-excitation conversion with a hardness-shaped contact map.

use super::{ExcitationSignal, TerrainError, TerrainProfile, Traversal};

/// Curvature of the contact nonlinearity (1/m). With heights on the
/// millimeter scale the quadratic term stays a small fraction of the linear
/// one, enriching the spectrum without dominating it.
pub const CONTACT_KAPPA: f64 = 50.0;

/// Hardness-shaped contact map: the identity for `hardness = 1`, otherwise
/// `g(u) = u + (1 - hardness) * CONTACT_KAPPA * u²`. The quadratic term
/// rectifies soft contact and puts a second harmonic on periodic input.
pub fn contact_map(u: f64, hardness: f64) -> f64 {
    if hardness >= 1.0 {
        u
    } else {
        u + (1.0 - hardness) * CONTACT_KAPPA * u * u
    }
}

/// Resample a traversal of `profile` at constant speed into base
/// displacement: `y_b(t) = g(h(v t))` with `h` the linearly interpolated
/// height and `g` the contact map.
pub fn traverse_to_excitation(
    profile: &TerrainProfile,
    traversal: &Traversal,
    hardness: f64,
) -> Result<ExcitationSignal, TerrainError> {
    traversal.validate()?;
    if !(hardness > 0.0 && hardness <= 1.0) {
        return Err(TerrainError::Argument(format!("hardness = {hardness} outside (0, 1]")));
    }
    let needed = traversal.speed_m_s * traversal.duration_s;
    let available = profile.extent_m();
    if needed > available {
        return Err(TerrainError::Extent { needed_m: needed, available_m: available });
    }

    let dt = 1.0 / traversal.sample_rate_hz;
    let n = (traversal.duration_s * traversal.sample_rate_hz).floor() as usize + 1;
    let samples = (0..n)
        .map(|k| {
            let x = traversal.speed_m_s * k as f64 * dt;
            contact_map(profile.height_at(x), hardness)
        })
        .collect();

    Ok(ExcitationSignal { dt_s: dt, base_displacement_m: samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex, FftPlanner};

    fn sine_profile(wavelength: f64, amp: f64, length: f64, dx: f64) -> TerrainProfile {
        let n = (length / dx).floor() as usize + 1;
        TerrainProfile {
            dx_m: dx,
            heights_m: (0..n)
                .map(|i| amp * (2.0 * std::f64::consts::PI * i as f64 * dx / wavelength).sin())
                .collect(),
            class_name: "sine".into(),
            seed: 0,
        }
    }

    /// Magnitude spectrum; returns (frequency resolution, magnitudes).
    fn spectrum(signal: &[f64], dt: f64) -> (f64, Vec<f64>) {
        let n = signal.len();
        let mut buf: Vec<Complex<f64>> = signal.iter().map(|&x| Complex::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let mags = buf.iter().take(n / 2).map(|c| c.norm()).collect();
        (1.0 / (n as f64 * dt), mags)
    }

    fn peak_frequency(signal: &[f64], dt: f64) -> f64 {
        let (df, mags) = spectrum(signal, dt);
        let (idx, _) = mags
            .iter()
            .enumerate()
            .skip(1) // ignore DC
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        idx as f64 * df
    }

    #[test]
    fn dominant_frequency_is_speed_over_wavelength() {
        let wavelength = 0.02;
        let profile = sine_profile(wavelength, 1e-3, 2.0, 5e-4);
        // Whole number of periods in the window keeps the bins aligned.
        for speed in [0.2, 0.4] {
            let trav = Traversal { speed_m_s: speed, sample_rate_hz: 2000.0, duration_s: 2.0 };
            let exc = traverse_to_excitation(&profile, &trav, 1.0).unwrap();
            let f0 = speed / wavelength;
            let peak = peak_frequency(&exc.base_displacement_m[1..], exc.dt_s);
            let df = 1.0 / ((exc.base_displacement_m.len() - 1) as f64 * exc.dt_s);
            assert!(
                (peak - f0).abs() <= df,
                "speed {speed}: peak {peak} Hz vs expected {f0} Hz (bin {df})"
            );
        }
    }

    #[test]
    fn hard_contact_is_identity_at_sample_points() {
        let profile = sine_profile(0.05, 2e-3, 1.0, 1e-3);
        let trav = Traversal { speed_m_s: 0.25, sample_rate_hz: 1000.0, duration_s: 3.0 };
        let exc = traverse_to_excitation(&profile, &trav, 1.0).unwrap();
        for (k, &y) in exc.base_displacement_m.iter().enumerate() {
            let x = trav.speed_m_s * k as f64 * exc.dt_s;
            assert_eq!(y, profile.height_at(x));
        }
    }

    #[test]
    fn soft_contact_creates_second_harmonic() {
        let wavelength = 0.02;
        let profile = sine_profile(wavelength, 2e-3, 3.0, 2e-4);
        let trav = Traversal { speed_m_s: 0.2, sample_rate_hz: 2000.0, duration_s: 10.0 };
        let f0 = trav.speed_m_s / wavelength; // 10 Hz; 100 whole periods

        let hard = traverse_to_excitation(&profile, &trav, 1.0).unwrap();
        let soft = traverse_to_excitation(&profile, &trav, 0.5).unwrap();

        // Drop the final sample so the window is a whole number of periods.
        let take = hard.base_displacement_m.len() - 1;
        let (df, hard_mags) = spectrum(&hard.base_displacement_m[..take], hard.dt_s);
        let (_, soft_mags) = spectrum(&soft.base_displacement_m[..take], soft.dt_s);
        let bin = |f: f64| (f / df).round() as usize;

        let fundamental = soft_mags[bin(f0)];
        let soft_h2 = soft_mags[bin(2.0 * f0)];
        let hard_h2 = hard_mags[bin(2.0 * f0)];
        assert!(
            soft_h2 > 1e-3 * fundamental,
            "second harmonic missing under soft contact: {soft_h2} vs fundamental {fundamental}"
        );
        assert!(
            hard_h2 < 1e-9 * fundamental,
            "second harmonic present under hard contact: {hard_h2}"
        );
    }

    #[test]
    fn traversal_longer_than_profile_is_an_extent_error() {
        let profile = sine_profile(0.05, 1e-3, 0.5, 1e-3);
        let trav = Traversal { speed_m_s: 0.5, sample_rate_hz: 1000.0, duration_s: 2.0 };
        assert!(matches!(
            traverse_to_excitation(&profile, &trav, 1.0),
            Err(TerrainError::Extent { .. })
        ));
    }
}
