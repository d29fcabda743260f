//! Tap extraction: deflection channels at axial measurement points.

use nalgebra::DMatrix;

use super::{DiscretizedWhisker, ReservoirSignal, ResponseTrajectory, WhiskerError};

/// Deflection time series at the free node nearest each requested axial
/// fraction. Output columns are sorted by ascending tap position with exact
/// duplicates removed.
pub fn tap_signals(
    whisker: &DiscretizedWhisker,
    trajectory: &ResponseTrajectory,
    tap_positions: &[f64],
) -> Result<ReservoirSignal, WhiskerError> {
    if tap_positions.is_empty() {
        return Err(WhiskerError::EmptyTaps);
    }
    for &s in tap_positions {
        if !(s > 0.0 && s <= 1.0) || !s.is_finite() {
            return Err(WhiskerError::TapOutOfRange(s));
        }
    }

    let mut taps: Vec<f64> = tap_positions.to_vec();
    taps.sort_by(f64::total_cmp);
    taps.dedup();

    let ne = whisker.geometry.n_elements;
    let t = trajectory.n_steps();
    let mut samples = DMatrix::<f64>::zeros(t, taps.len());
    for (col, &s) in taps.iter().enumerate() {
        // Nearest free node: node i sits at fraction (i+1)/ne.
        let node = ((s * ne as f64).round() as usize).clamp(1, ne) - 1;
        let dof = whisker.dof_map[node].0;
        samples.set_column(col, &trajectory.node_displacements.column(dof));
    }

    Ok(ReservoirSignal { dt_s: trajectory.dt_s, tap_positions: taps, samples })
}
