//! Simplex-constrained least squares by a primal active-set method.
//!
//! Solves `min ‖Σᵢ wᵢ cᵢ - f‖²` subject to `w ≥ 0`, `Σ w = 1`. The equality
//! constraint is kept in a bordered KKT system over the currently passive
//! (nonzero) weights; bound constraints enter and leave the active set the
//! usual way: a blocking step when the equality solve leaves the feasible
//! region, and release of the most negative bound multiplier (ties to the
//! lowest index) at a feasible stationary point. The method terminates in a
//! finite number of pivots with KKT residual at rounding level.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{CentroidBank, SemiError};
use crate::readout::FeatureVector;

/// Convex-combination weights over the bank's centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureEstimate {
    /// One weight per centroid, bank order; `wᵢ ≥ 0`, `Σ w = 1`.
    pub weights: Vec<f64>,
    /// Centroid names matching `weights`.
    pub class_names: Vec<String>,
    /// Data misfit `‖Σ wᵢ cᵢ - f‖` at the solution.
    pub residual_norm: f64,
    /// First-order optimality residual actually reached by the solver.
    pub kkt_residual: f64,
    /// True when duplicate centroids (or a degenerate KKT system) made the
    /// optimum non-unique; the returned solution favors the lowest index.
    pub non_unique: bool,
}

const KKT_TOLERANCE: f64 = 1e-9;

/// Express `feature` as a convex combination of the bank's centroids.
pub fn estimate_mixture(
    bank: &CentroidBank,
    feature: &FeatureVector,
) -> Result<MixtureEstimate, SemiError> {
    let k = bank.centroids.len();
    if k < 2 {
        return Err(SemiError::TooFewCentroids(k));
    }
    let dim = bank.dim();
    if feature.dim() != dim {
        return Err(SemiError::Shape { expected: dim, got: feature.dim() });
    }

    // Collapse exact duplicate centroids onto their lowest index so the
    // reduced problem has a unique optimum that favors early columns.
    let mut representative: Vec<usize> = (0..k).collect();
    let mut non_unique = false;
    for i in 0..k {
        for j in 0..i {
            if representative[j] == j && bank.centroids[i].mean == bank.centroids[j].mean {
                representative[i] = j;
                non_unique = true;
                break;
            }
        }
    }
    let kept: Vec<usize> = (0..k).filter(|&i| representative[i] == i).collect();

    let a = DMatrix::<f64>::from_fn(dim, kept.len(), |r, c| bank.centroids[kept[c]].mean[r]);
    let f = DVector::from_column_slice(&feature.values);
    let (w_kept, kkt_residual, degenerate) = solve_simplex_ls(&a, &f)?;

    let mut weights = vec![0.0; k];
    for (slot, &orig) in kept.iter().enumerate() {
        weights[orig] = w_kept[slot];
    }
    let combo = &a * &w_kept;
    let residual_norm = (combo - f).norm();

    Ok(MixtureEstimate {
        weights,
        class_names: bank.centroids.iter().map(|c| c.name.clone()).collect(),
        residual_norm,
        kkt_residual,
        non_unique: non_unique || degenerate,
    })
}

/// Active-set core: returns `(w, kkt_residual, degenerate)`.
fn solve_simplex_ls(
    a: &DMatrix<f64>,
    f: &DVector<f64>,
) -> Result<(DVector<f64>, f64, bool), SemiError> {
    let k = a.ncols();
    let gram = a.transpose() * a;
    let target = a.transpose() * f;
    let scale = gram.diagonal().amax().max(1.0);

    let mut passive: Vec<bool> = vec![true; k];
    let mut w = DVector::from_element(k, 1.0 / k as f64);
    let mut degenerate = false;

    // Each pivot either removes or adds one constraint; 3k² bounds the
    // active-set walk generously.
    let max_pivots = 3 * k * k + 10;
    for _ in 0..max_pivots {
        let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
        let p = idx.len();

        // Bordered KKT system over the passive set.
        let mut kkt = DMatrix::<f64>::zeros(p + 1, p + 1);
        let mut rhs = DVector::<f64>::zeros(p + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                kkt[(r, c)] = gram[(i, j)];
            }
            kkt[(r, p)] = 1.0;
            kkt[(p, r)] = 1.0;
            rhs[r] = target[i];
        }
        rhs[p] = 1.0;

        let solution = match kkt.clone().lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                // Affinely dependent passive columns: regularize minimally
                // and flag the optimum as non-unique.
                degenerate = true;
                let mut reg = kkt;
                for d in 0..p {
                    reg[(d, d)] += 1e-12 * scale;
                }
                reg.lu().solve(&rhs).ok_or(SemiError::Solver {
                    residual: f64::INFINITY,
                    tolerance: KKT_TOLERANCE,
                    iterations: max_pivots,
                })?
            }
        };

        let mut w_new = DVector::<f64>::zeros(k);
        for (r, &i) in idx.iter().enumerate() {
            w_new[i] = solution[r];
        }

        if idx.iter().any(|&i| w_new[i] < 0.0) {
            // Blocking step: walk from the feasible iterate toward the
            // equality solution until the first weight hits zero.
            let mut alpha = 1.0_f64;
            for &i in &idx {
                if w_new[i] < 0.0 {
                    alpha = alpha.min(w[i] / (w[i] - w_new[i]));
                }
            }
            for &i in &idx {
                w[i] += alpha * (w_new[i] - w[i]);
            }
            // Deactivate every passive weight pinned at (or crossing) zero.
            for &i in &idx {
                if w[i] <= 1e-14 {
                    w[i] = 0.0;
                    passive[i] = false;
                }
            }
            continue;
        }

        w = w_new;
        let nu = solution[p];

        // Bound multipliers on the active set (stationarity is
        // `g + ν 1 = μ` with `μ = 0` on the passive set); release the most
        // negative.
        let gradient = &gram * &w - &target;
        let mut release: Option<(usize, f64)> = None;
        for i in 0..k {
            if !passive[i] {
                let mu = gradient[i] + nu;
                if mu < -KKT_TOLERANCE * scale {
                    let better = match release {
                        Some((_, best)) => mu < best,
                        None => true,
                    };
                    if better {
                        release = Some((i, mu));
                    }
                }
            }
        }
        match release {
            Some((i, _)) => passive[i] = true,
            None => {
                let kkt_residual = kkt_residual(&gram, &target, &w, nu, &passive, scale);
                if kkt_residual <= KKT_TOLERANCE {
                    return Ok((w, kkt_residual, degenerate));
                }
                return Err(SemiError::Solver {
                    residual: kkt_residual,
                    tolerance: KKT_TOLERANCE,
                    iterations: max_pivots,
                });
            }
        }
    }

    Err(SemiError::Solver {
        residual: f64::INFINITY,
        tolerance: KKT_TOLERANCE,
        iterations: max_pivots,
    })
}

/// Scaled first-order residual: feasibility of the simplex constraints,
/// stationarity on the passive set, and dual feasibility on the active set.
fn kkt_residual(
    gram: &DMatrix<f64>,
    target: &DVector<f64>,
    w: &DVector<f64>,
    nu: f64,
    passive: &[bool],
    scale: f64,
) -> f64 {
    let gradient = gram * w - target;
    let mut res: f64 = (w.sum() - 1.0).abs();
    for i in 0..w.len() {
        res = res.max((-w[i]).max(0.0));
        if passive[i] {
            res = res.max((gradient[i] + nu).abs() / scale);
        } else {
            res = res.max((-(gradient[i] + nu)).max(0.0) / scale);
        }
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semi::{Centroid, Provenance};

    fn bank_from(means: &[&[f64]]) -> CentroidBank {
        let mut bank = CentroidBank::new();
        for (i, m) in means.iter().enumerate() {
            bank.insert(Centroid {
                name: format!("c{i}"),
                mean: m.to_vec(),
                count: 1,
                provenance: Provenance::Supervised,
            })
            .unwrap();
        }
        bank
    }

    fn feature(values: Vec<f64>) -> FeatureVector {
        let taps = (1..=values.len()).map(|i| i as f64 / values.len() as f64).collect();
        FeatureVector { values, tap_positions: taps, window_s: 1.0 }
    }

    #[test]
    fn planted_three_quarters_one_quarter_is_recovered() {
        let gravel = [3.0, 1.0, 0.5];
        let flat = [0.2, 0.1, 0.05];
        let other = [1.0, 2.5, 1.5];
        let bank = bank_from(&[&gravel, &flat, &other]);
        let mix: Vec<f64> = (0..3).map(|i| 0.75 * gravel[i] + 0.25 * flat[i]).collect();
        let est = estimate_mixture(&bank, &feature(mix)).unwrap();
        assert!((est.weights[0] - 0.75).abs() < 1e-6, "weights {:?}", est.weights);
        assert!((est.weights[1] - 0.25).abs() < 1e-6);
        assert!(est.weights[2].abs() < 1e-6);
        assert!(est.residual_norm <= 1e-9);
        assert!(est.kkt_residual <= 1e-9);
        assert!(!est.non_unique);
    }

    #[test]
    fn vertex_feature_gets_unit_weight() {
        let bank = bank_from(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let est = estimate_mixture(&bank, &feature(vec![0.0, 1.0])).unwrap();
        assert!((est.weights[1] - 1.0).abs() < 1e-9, "weights {:?}", est.weights);
        assert!(est.weights[0].abs() < 1e-12 && est.weights[2].abs() < 1e-12);
    }

    #[test]
    fn outside_hull_lands_on_boundary_with_residual() {
        let bank = bank_from(&[&[1.0, 0.0], &[0.0, 1.0]]);
        // Far outside the segment between the two centroids.
        let est = estimate_mixture(&bank, &feature(vec![3.0, 0.0])).unwrap();
        assert!(est.residual_norm > 0.5);
        assert!((est.weights[0] - 1.0).abs() < 1e-9, "weights {:?}", est.weights);
        assert_eq!(est.weights[1], 0.0);
    }

    #[test]
    fn duplicate_centroids_favor_lowest_index_and_flag() {
        let bank = bank_from(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let est = estimate_mixture(&bank, &feature(vec![0.6, 0.4])).unwrap();
        assert!(est.non_unique);
        assert!((est.weights[0] - 0.6).abs() < 1e-9, "weights {:?}", est.weights);
        assert_eq!(est.weights[1], 0.0);
        assert!((est.weights[2] - 0.4).abs() < 1e-9);
    }

    #[test]
    fn too_few_centroids_and_shape_errors() {
        let bank = bank_from(&[&[1.0, 0.0]]);
        assert!(matches!(
            estimate_mixture(&bank, &feature(vec![1.0, 0.0])),
            Err(SemiError::TooFewCentroids(1))
        ));
        let bank = bank_from(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            estimate_mixture(&bank, &feature(vec![1.0, 0.0, 0.0])),
            Err(SemiError::Shape { .. })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn simplex_feasibility_always_holds(
            seedling in 0u64..1_000_000,
            k in 2usize..6,
            dim in 1usize..6,
        ) {
            use crate::seed::splitmix64_stream;
            // Deterministic pseudo-random centroids and feature from the seed.
            let unit = |s: u64| splitmix64_stream(seedling, s) as f64 / u64::MAX as f64;
            let means: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..dim).map(|j| 4.0 * unit((i * dim + j) as u64 + 1) - 2.0).collect())
                .collect();
            let f: Vec<f64> = (0..dim).map(|j| 6.0 * unit(1000 + j as u64) - 3.0).collect();

            let mut bank = CentroidBank::new();
            for (i, m) in means.iter().enumerate() {
                bank.insert(Centroid {
                    name: format!("c{i}"),
                    mean: m.clone(),
                    count: 1,
                    provenance: Provenance::Supervised,
                }).unwrap();
            }
            let est = estimate_mixture(&bank, &feature(f)).unwrap();
            for w in &est.weights {
                proptest::prop_assert!(*w >= -1e-12);
            }
            let total: f64 = est.weights.iter().sum();
            proptest::prop_assert!((total - 1.0).abs() <= 1e-9);
            proptest::prop_assert!(est.kkt_residual <= 1e-9);
        }
    }
}
