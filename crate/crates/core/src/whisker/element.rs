//! Hermite two-node Euler–Bernoulli elements and global assembly.

use nalgebra::{DMatrix, DVector, Matrix4};

use super::{DiscretizedWhisker, Material, WhiskerError, WhiskerGeometry};

/// Element stiffness for a prismatic Euler–Bernoulli segment,
/// DOFs `[w1, th1, w2, th2]`.
fn element_stiffness(ei: f64, l: f64) -> Matrix4<f64> {
    let c = ei / (l * l * l);
    let l2 = l * l;
    Matrix4::new(
        12.0 * c, 6.0 * l * c, -12.0 * c, 6.0 * l * c,
        6.0 * l * c, 4.0 * l2 * c, -6.0 * l * c, 2.0 * l2 * c,
        -12.0 * c, -6.0 * l * c, 12.0 * c, -6.0 * l * c,
        6.0 * l * c, 2.0 * l2 * c, -6.0 * l * c, 4.0 * l2 * c,
    )
}

/// Consistent element mass (translational inertia).
fn element_mass(rho_a: f64, l: f64) -> Matrix4<f64> {
    let c = rho_a * l / 420.0;
    let l2 = l * l;
    Matrix4::new(
        156.0 * c, 22.0 * l * c, 54.0 * c, -13.0 * l * c,
        22.0 * l * c, 4.0 * l2 * c, 13.0 * l * c, -3.0 * l2 * c,
        54.0 * c, 13.0 * l * c, 156.0 * c, -22.0 * l * c,
        -13.0 * l * c, -3.0 * l2 * c, -22.0 * l * c, 4.0 * l2 * c,
    )
}

/// Assemble the clamped-base whisker. Per-element section properties are
/// evaluated from the linearly interpolated radius at the element midpoint:
/// `A = pi r^2`, `I = pi r^4 / 4`.
pub fn build_whisker(
    geometry: WhiskerGeometry,
    material: Material,
) -> Result<DiscretizedWhisker, WhiskerError> {
    geometry.validate()?;
    material.validate()?;

    let ne = geometry.n_elements;
    let le = geometry.length_m / ne as f64;
    let n = 2 * ne; // free DOFs after eliminating the clamped base node

    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);

    for e in 0..ne {
        let s_mid = (e as f64 + 0.5) / ne as f64;
        let r = geometry.radius_at(s_mid);
        let area = std::f64::consts::PI * r * r;
        let second_moment = std::f64::consts::PI * r.powi(4) / 4.0;
        let ke = element_stiffness(material.youngs_modulus_pa * second_moment, le);
        let me = element_mass(material.density_kg_m3 * area, le);

        // Global DOFs of the element's two nodes; the base node (e == 0,
        // first node) is clamped and its rows/columns are dropped.
        let gdof = |local: usize| -> Option<usize> {
            let node = e + local / 2; // global node index, 0 = base
            if node == 0 {
                None
            } else {
                Some(2 * (node - 1) + local % 2)
            }
        };
        for i in 0..4 {
            let Some(gi) = gdof(i) else { continue };
            for j in 0..4 {
                let Some(gj) = gdof(j) else { continue };
                k[(gi, gj)] += ke[(i, j)];
                m[(gi, gj)] += me[(i, j)];
            }
        }
    }

    let c = &m * material.rayleigh_alpha + &k * material.rayleigh_beta;

    let mut influence = DVector::<f64>::zeros(n);
    for node in 0..ne {
        influence[2 * node] = 1.0;
    }

    let dof_map = (0..ne).map(|i| (2 * i, 2 * i + 1)).collect();

    Ok(DiscretizedWhisker {
        mass_matrix: m,
        stiffness_matrix: k,
        damping_matrix: c,
        influence_vector: influence,
        dof_map,
        geometry,
        material,
    })
}
