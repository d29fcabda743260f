//! Generalized eigenanalysis `K φ = ω² M φ`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use super::{DiscretizedWhisker, ModalBasis, WhiskerError};

/// Lowest `m` natural frequencies (Hz) and mass-normalized mode shapes.
///
/// The problem is reduced to standard form through the Cholesky factor of
/// the *stiffness* matrix: with `K = L Lᵀ` the eigenvalues `μ` of
/// `L⁻¹ M L⁻ᵀ` are `1/ω²`, so the lowest modes are the largest eigenvalues
/// of the reduced matrix and keep full relative accuracy even when the
/// discretization carries very stiff high modes. Eigenvectors `y` give
/// `φ = ω L⁻ᵀ y`, which is mass-normalized.
pub fn modal_analysis(whisker: &DiscretizedWhisker, m: usize) -> Result<ModalBasis, WhiskerError> {
    let n = whisker.n_dofs();
    if m < 1 || m > n {
        return Err(WhiskerError::ModeCount { requested: m, max: n });
    }

    // The clamped beam has positive-definite K.
    let chol = whisker
        .stiffness_matrix
        .clone()
        .cholesky()
        .ok_or(WhiskerError::Eigensolver { order: n })?;
    let l = chol.l();

    // B = L^-1 M L^-T, built by two triangular solves.
    let mut b = whisker.mass_matrix.clone();
    l.solve_lower_triangular_mut(&mut b);
    b.transpose_mut();
    l.solve_lower_triangular_mut(&mut b);
    // Symmetrize rounding noise before the QR iteration.
    let b = (&b + b.transpose()) * 0.5;

    let eig = SymmetricEigen::try_new(b, f64::EPSILON, 0)
        .ok_or(WhiskerError::Eigensolver { order: n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut freqs = Vec::with_capacity(m);
    let mut shapes = DMatrix::<f64>::zeros(n, m);
    for (col, &idx) in order.iter().take(m).enumerate() {
        let mu = eig.eigenvalues[idx];
        if !(mu > 0.0) {
            return Err(WhiskerError::Eigensolver { order: n });
        }
        let omega = mu.sqrt().recip();
        freqs.push(omega / (2.0 * std::f64::consts::PI));
        let mut phi = eig.eigenvectors.column(idx).clone_owned();
        l.tr_solve_lower_triangular_mut(&mut phi);
        shapes.set_column(col, &(phi * omega));
    }

    Ok(ModalBasis { natural_frequencies_hz: freqs, mode_shapes: shapes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whisker::{build_whisker, Material, WhiskerGeometry};
    use approx::assert_relative_eq;

    const LAMBDA: [f64; 3] = [1.875_104_07, 4.694_091_13, 7.854_757_44];

    fn steel(alpha: f64, beta: f64) -> Material {
        Material::new(200e9, 7850.0, alpha, beta).unwrap()
    }

    /// Closed-form cantilever frequency f_k = (lambda_k^2 / 2 pi) sqrt(EI / (rho A L^4)).
    fn closed_form_hz(mode: usize, geo: &WhiskerGeometry, mat: &Material) -> f64 {
        let r = geo.base_radius_m;
        let area = std::f64::consts::PI * r * r;
        let second_moment = std::f64::consts::PI * r.powi(4) / 4.0;
        let stiff = mat.youngs_modulus_pa * second_moment
            / (mat.density_kg_m3 * area * geo.length_m.powi(4));
        LAMBDA[mode].powi(2) / (2.0 * std::f64::consts::PI) * stiff.sqrt()
    }

    #[test]
    fn uniform_beam_matches_closed_form_within_one_percent() {
        let geo = WhiskerGeometry::new(0.15, 1.5e-3, 1.5e-3, 100).unwrap();
        let mat = steel(0.0, 0.0);
        let w = build_whisker(geo, mat).unwrap();
        let basis = modal_analysis(&w, 3).unwrap();
        for k in 0..3 {
            let expected = closed_form_hz(k, &geo, &mat);
            let got = basis.natural_frequencies_hz[k];
            assert!(
                (got - expected).abs() / expected < 0.01,
                "mode {k}: got {got} Hz, closed form {expected} Hz"
            );
        }
    }

    #[test]
    fn frequency_ratio_matches_closed_form() {
        let geo = WhiskerGeometry::new(0.15, 1.5e-3, 1.5e-3, 100).unwrap();
        let w = build_whisker(geo, steel(0.0, 0.0)).unwrap();
        let basis = modal_analysis(&w, 2).unwrap();
        let ratio = basis.natural_frequencies_hz[1] / basis.natural_frequencies_hz[0];
        let expected = (LAMBDA[1] / LAMBDA[0]).powi(2);
        assert!((ratio - expected).abs() / expected < 0.01);
    }

    #[test]
    fn density_doubling_scales_frequencies_by_inv_sqrt2() {
        let geo = WhiskerGeometry::new(0.15, 1.5e-3, 0.45e-3, 20).unwrap();
        let base = build_whisker(geo, steel(0.0, 0.0)).unwrap();
        let heavy = build_whisker(geo, Material::new(200e9, 2.0 * 7850.0, 0.0, 0.0).unwrap()).unwrap();
        let fb = modal_analysis(&base, base.n_dofs()).unwrap().natural_frequencies_hz;
        let fh = modal_analysis(&heavy, heavy.n_dofs()).unwrap().natural_frequencies_hz;
        for (b, h) in fb.iter().zip(&fh) {
            assert_relative_eq!(h * 2.0_f64.sqrt(), *b, max_relative = 1e-6);
        }
    }

    #[test]
    fn full_basis_is_mass_orthonormal() {
        let geo = WhiskerGeometry::new(0.12, 1.2e-3, 0.4e-3, 10).unwrap();
        let w = build_whisker(geo, steel(0.5, 1e-5)).unwrap();
        let basis = modal_analysis(&w, w.n_dofs()).unwrap();
        let gram = basis.mode_shapes.transpose() * &w.mass_matrix * &basis.mode_shapes;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - expect).abs() < 1e-8,
                    "gram[{i},{j}] = {}",
                    gram[(i, j)]
                );
            }
        }
    }

    #[test]
    fn taper_shifts_fundamental_by_more_than_five_percent() {
        let uniform = WhiskerGeometry::new(0.15, 1.5e-3, 1.5e-3, 40).unwrap();
        let tapered = WhiskerGeometry::new(0.15, 1.5e-3, 0.45e-3, 40).unwrap();
        let f_uniform = modal_analysis(&build_whisker(uniform, steel(0.0, 0.0)).unwrap(), 1)
            .unwrap()
            .natural_frequencies_hz[0];
        let f_tapered = modal_analysis(&build_whisker(tapered, steel(0.0, 0.0)).unwrap(), 1)
            .unwrap()
            .natural_frequencies_hz[0];
        assert!((f_tapered - f_uniform).abs() / f_uniform > 0.05);
    }

    #[test]
    fn convergence_is_monotone_as_elements_double() {
        let mat = steel(0.0, 0.0);
        let mut errors: Vec<[f64; 3]> = Vec::new();
        for ne in [4, 8, 16, 32] {
            let geo = WhiskerGeometry::new(0.15, 1.5e-3, 1.5e-3, ne).unwrap();
            let w = build_whisker(geo, mat).unwrap();
            let f = modal_analysis(&w, 3).unwrap().natural_frequencies_hz;
            let mut e = [0.0; 3];
            for k in 0..3 {
                let exact = closed_form_hz(k, &geo, &mat);
                e[k] = (f[k] - exact).abs() / exact;
            }
            errors.push(e);
        }
        for k in 0..3 {
            assert!(errors[1][k] < 0.01, "mode {k} error at 8 elements: {}", errors[1][k]);
            for step in 1..errors.len() {
                assert!(
                    errors[step][k] <= errors[step - 1][k] * (1.0 + 1e-9),
                    "mode {k} error grew on refinement: {:?}",
                    errors.iter().map(|e| e[k]).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn mode_count_bounds_are_checked() {
        let geo = WhiskerGeometry::new(0.1, 1e-3, 1e-3, 4).unwrap();
        let w = build_whisker(geo, steel(0.0, 0.0)).unwrap();
        assert!(matches!(modal_analysis(&w, 0), Err(WhiskerError::ModeCount { .. })));
        assert!(matches!(modal_analysis(&w, 9), Err(WhiskerError::ModeCount { .. })));
    }
}
