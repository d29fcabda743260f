//! Feature extraction from reservoir signals.

use rustfft::{num_complex::Complex, FftPlanner};

use super::{FeatureVector, ReadoutError};
use crate::terrain::{ExcitationSignal, LabeledDataset};
use crate::whisker::{simulate_response, tap_signals, DiscretizedWhisker, ReservoirSignal};

/// Per-tap RMS over the trailing window, after discarding the settle prefix.
/// The window is the last `round(window_s / dt)` samples; the signal must be
/// at least `settle_s + window_s` long so the window sits past the settle.
pub fn extract_features(
    signal: &ReservoirSignal,
    settle_s: f64,
    window_s: f64,
) -> Result<FeatureVector, ReadoutError> {
    let dt = signal.dt_s;
    let window_n = (window_s / dt).round() as usize;
    if window_n < 10 {
        return Err(ReadoutError::Window { samples: window_n });
    }
    let duration = signal.duration_s();
    if duration < settle_s + window_s {
        return Err(ReadoutError::DurationTooShort { duration_s: duration, settle_s, window_s });
    }

    let t = signal.samples.nrows();
    let start = t - window_n;
    let values = (0..signal.n_taps())
        .map(|c| {
            let sum: f64 = (start..t).map(|i| signal.samples[(i, c)].powi(2)).sum();
            (sum / window_n as f64).sqrt()
        })
        .collect();

    Ok(FeatureVector { values, tap_positions: signal.tap_positions.clone(), window_s })
}

/// Run the whisker over every excitation record and extract features.
pub fn extract_dataset_features(
    whisker: &DiscretizedWhisker,
    taps: &[f64],
    dataset: &LabeledDataset<ExcitationSignal>,
    settle_s: f64,
    window_s: f64,
) -> Result<LabeledDataset<FeatureVector>, ReadoutError> {
    dataset.map_payload(|record| {
        let trajectory = simulate_response(whisker, &record.payload)?;
        let signal = tap_signals(whisker, &trajectory, taps)?;
        extract_features(&signal, settle_s, window_s)
    })
}

/// Explicit frequency-analysis baseline: RMS amplitude in `n_bands` equal
/// frequency bands of the tip channel over the trailing window. This is what
/// the reservoir's tap geometry replaces; the experiment reports train a
/// second readout on these for comparison.
pub fn spectral_band_features(
    signal: &ReservoirSignal,
    settle_s: f64,
    window_s: f64,
    n_bands: usize,
) -> Result<Vec<f64>, ReadoutError> {
    let dt = signal.dt_s;
    let window_n = (window_s / dt).round() as usize;
    if window_n < 10 {
        return Err(ReadoutError::Window { samples: window_n });
    }
    let duration = signal.duration_s();
    if duration < settle_s + window_s {
        return Err(ReadoutError::DurationTooShort { duration_s: duration, settle_s, window_s });
    }

    let t = signal.samples.nrows();
    let tip = signal.n_taps() - 1;
    let mut buf: Vec<Complex<f64>> = (t - window_n..t)
        .map(|i| Complex::new(signal.samples[(i, tip)], 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(window_n).process(&mut buf);

    let half = window_n / 2;
    let mut bands = vec![0.0_f64; n_bands];
    for (k, c) in buf.iter().enumerate().take(half).skip(1) {
        let band = k * n_bands / half;
        bands[band.min(n_bands - 1)] += c.norm_sqr();
    }
    // Parseval scaling so the bands sum to the window's mean-square power.
    let scale = 2.0 / (window_n as f64 * window_n as f64);
    Ok(bands.into_iter().map(|p| (p * scale).sqrt()).collect())
}
