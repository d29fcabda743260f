//! Newmark average-acceleration integration under base excitation.

use nalgebra::{DMatrix, DVector};

use super::{DiscretizedWhisker, ResponseTrajectory, WhiskerError};
use crate::terrain::ExcitationSignal;

/// Base acceleration from base displacement by second-order differences:
/// central in the interior, one-sided four-point at the ends (neighbor copy
/// for series too short for the four-point stencil).
fn base_acceleration(y: &[f64], dt: f64) -> Vec<f64> {
    let t = y.len();
    let inv = 1.0 / (dt * dt);
    let mut a = vec![0.0; t];
    for i in 1..t.saturating_sub(1) {
        a[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv;
    }
    if t >= 4 {
        a[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) * inv;
        a[t - 1] = (2.0 * y[t - 1] - 5.0 * y[t - 2] + 4.0 * y[t - 3] - y[t - 4]) * inv;
    } else if t >= 2 {
        a[0] = a[1.min(t - 1)];
        a[t - 1] = a[t - 2];
    }
    a
}

/// Integrate `M q̈ + C q̇ + K q = -M ι ÿ_b(t)` from rest with the Newmark
/// average-acceleration scheme (γ = 1/2, β = 1/4), sampled at the
/// excitation's time step.
pub fn simulate_response(
    whisker: &DiscretizedWhisker,
    excitation: &ExcitationSignal,
) -> Result<ResponseTrajectory, WhiskerError> {
    let dt = excitation.dt_s;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(WhiskerError::BadExcitation(format!("dt_s must be finite and > 0, got {dt}")));
    }
    let y = &excitation.base_displacement_m;
    if y.is_empty() {
        return Err(WhiskerError::BadExcitation("empty excitation".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(WhiskerError::BadExcitation(format!("non-finite sample at index {i}")));
    }

    let n = whisker.n_dofs();
    let t_steps = y.len();
    let accel = base_acceleration(y, dt);
    let m_iota = &whisker.mass_matrix * &whisker.influence_vector;

    // Effective stiffness for gamma = 1/2, beta = 1/4.
    let k_eff = &whisker.stiffness_matrix
        + &whisker.damping_matrix * (2.0 / dt)
        + &whisker.mass_matrix * (4.0 / (dt * dt));
    let factor = k_eff.cholesky().ok_or(WhiskerError::MassNotPositiveDefinite)?;

    let mass_chol = whisker
        .mass_matrix
        .clone()
        .cholesky()
        .ok_or(WhiskerError::MassNotPositiveDefinite)?;

    let mut disp = DMatrix::<f64>::zeros(t_steps, n);
    let mut vel = DMatrix::<f64>::zeros(t_steps, n);

    let mut q = DVector::<f64>::zeros(n);
    let mut v = DVector::<f64>::zeros(n);
    // Initial acceleration consistent with zero initial state.
    let mut a = mass_chol.solve(&(&m_iota * -accel[0]));

    for step in 1..t_steps {
        let force = &m_iota * -accel[step];
        let rhs = force
            + &whisker.mass_matrix * (&q * (4.0 / (dt * dt)) + &v * (4.0 / dt) + &a)
            + &whisker.damping_matrix * (&q * (2.0 / dt) + &v);
        let q_next = factor.solve(&rhs);
        let a_next = (&q_next - &q - &v * dt) * (4.0 / (dt * dt)) - &a;
        let v_next = &v + (&a + &a_next) * (dt / 2.0);

        if q_next.iter().any(|x| !x.is_finite()) {
            return Err(WhiskerError::Divergence { step, total: t_steps });
        }

        q = q_next;
        v = v_next;
        a = a_next;
        disp.row_mut(step).copy_from(&q.transpose());
        vel.row_mut(step).copy_from(&v.transpose());
    }

    Ok(ResponseTrajectory { dt_s: dt, node_displacements: disp, node_velocities: vel })
}

/// Total mechanical energy `½ vᵀMv + ½ qᵀKq` at one trajectory step.
pub fn mechanical_energy(whisker: &DiscretizedWhisker, trajectory: &ResponseTrajectory, step: usize) -> f64 {
    let q = trajectory.node_displacements.row(step).transpose();
    let v = trajectory.node_velocities.row(step).transpose();
    0.5 * (v.dot(&(&whisker.mass_matrix * &v)) + q.dot(&(&whisker.stiffness_matrix * &q)))
}
