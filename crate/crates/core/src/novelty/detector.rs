//! PCA projection with a Mahalanobis chi-square gate.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::NoveltyError;
use crate::readout::FeatureVector;

/// Mean and top-`d` eigenpairs of the training feature covariance, plus the
/// chi-square novelty threshold `τ = χ²_d(q)` on the squared distance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpaceDetector {
    pub mean: DVector<f64>,
    /// `M x d`, orthonormal columns, eigenvalue-descending.
    pub components: DMatrix<f64>,
    /// Projected variances, descending, all positive.
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
    pub confidence_q: f64,
}

impl EigenSpaceDetector {
    pub fn feature_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn subspace_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Mahalanobis distance between two raw feature vectors in this
    /// detector's eigenspace (the mean cancels).
    pub fn eigenspace_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(a) - DVector::from_column_slice(b);
        let z = self.components.transpose() * diff;
        z.iter()
            .zip(&self.eigenvalues)
            .map(|(zi, lam)| zi * zi / lam)
            .sum::<f64>()
            .sqrt()
    }
}

/// Fit the pooled eigenspace of `train_features` and set the novelty gate at
/// confidence `q`. Directions whose eigenvalue falls below `1e-12` of the
/// leading one are rejected as rank-deficient.
pub fn fit_detector(
    train_features: &[FeatureVector],
    d: usize,
    q: f64,
) -> Result<EigenSpaceDetector, NoveltyError> {
    if train_features.is_empty() {
        return Err(NoveltyError::Empty);
    }
    let m = train_features[0].dim();
    if train_features.iter().any(|f| f.dim() != m) {
        return Err(NoveltyError::Inconsistent);
    }
    if d < 1 || d > m {
        return Err(NoveltyError::Dimension { requested: d, max: m });
    }
    let n = train_features.len();
    if n <= d {
        return Err(NoveltyError::SampleSize { n, d });
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(NoveltyError::Confidence(q));
    }

    let mut mean = DVector::<f64>::zeros(m);
    for f in train_features {
        mean += DVector::from_column_slice(&f.values);
    }
    mean /= n as f64;

    let mut cov = DMatrix::<f64>::zeros(m, m);
    for f in train_features {
        let c = DVector::from_column_slice(&f.values) - &mean;
        cov.syger(1.0 / (n - 1) as f64, &c, &c, 1.0);
    }
    // syger fills the lower triangle; mirror it.
    for i in 0..m {
        for j in i + 1..m {
            cov[(i, j)] = cov[(j, i)];
        }
    }

    let eig = nalgebra::linalg::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let leading = eig.eigenvalues[order[0]].max(0.0);
    let usable_d = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > 1e-12 * leading)
        .count();
    if usable_d < d {
        return Err(NoveltyError::Rank { usable_d, requested: d });
    }

    let mut components = DMatrix::<f64>::zeros(m, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        components.set_column(col, &eig.eigenvectors.column(idx));
        eigenvalues.push(eig.eigenvalues[idx]);
    }

    let threshold = ChiSquared::new(d as f64)
        .expect("d >= 1")
        .inverse_cdf(q);

    Ok(EigenSpaceDetector { mean, components, eigenvalues, threshold, confidence_q: q })
}

/// Mahalanobis distance of `feature` in the detector's eigenspace:
/// `z = Pᵀ (f - μ)`, distance `sqrt(Σ zᵢ² / λᵢ)`.
pub fn mahalanobis_distance(
    detector: &EigenSpaceDetector,
    feature: &FeatureVector,
) -> Result<f64, NoveltyError> {
    if feature.dim() != detector.feature_dim() {
        return Err(NoveltyError::Shape { expected: detector.feature_dim(), got: feature.dim() });
    }
    let centered = DVector::from_column_slice(&feature.values) - &detector.mean;
    let z = detector.components.transpose() * centered;
    let d2: f64 = z
        .iter()
        .zip(&detector.eigenvalues)
        .map(|(zi, lam)| zi * zi / lam)
        .sum();
    Ok(d2.sqrt())
}

/// Novelty flag plus the distance that produced it: novel iff
/// `distance² > τ`.
pub fn detect_novel(
    detector: &EigenSpaceDetector,
    feature: &FeatureVector,
) -> Result<(bool, f64), NoveltyError> {
    let distance = mahalanobis_distance(detector, feature)?;
    Ok((distance * distance > detector.threshold, distance))
}

const DETECTOR_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct DetectorFile {
    format_version: u32,
    mean: Vec<f64>,
    /// Row-major `M x d`.
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    threshold: f64,
    confidence_q: f64,
}

impl EigenSpaceDetector {
    pub fn save_json(&self, path: &Path) -> Result<(), NoveltyError> {
        let file = DetectorFile {
            format_version: DETECTOR_FORMAT_VERSION,
            mean: self.mean.iter().copied().collect(),
            components: (0..self.components.nrows())
                .map(|i| self.components.row(i).iter().copied().collect())
                .collect(),
            eigenvalues: self.eigenvalues.clone(),
            threshold: self.threshold,
            confidence_q: self.confidence_q,
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, NoveltyError> {
        let file: DetectorFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.format_version != DETECTOR_FORMAT_VERSION {
            return Err(NoveltyError::FormatVersion(file.format_version));
        }
        let m = file.mean.len();
        let d = file.eigenvalues.len();
        Ok(Self {
            mean: DVector::from_vec(file.mean),
            components: DMatrix::from_fn(m, d, |i, j| file.components[i][j]),
            eigenvalues: file.eigenvalues,
            threshold: file.threshold,
            confidence_q: file.confidence_q,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn feature(values: Vec<f64>) -> FeatureVector {
        let taps = (1..=values.len()).map(|i| i as f64 / values.len() as f64).collect();
        FeatureVector { values, tap_positions: taps, window_s: 1.0 }
    }

    fn gaussian_cloud(
        rng: &mut ChaCha8Rng,
        n: usize,
        center: &[f64],
        scales: &[f64],
    ) -> Vec<FeatureVector> {
        (0..n)
            .map(|_| {
                feature(
                    center
                        .iter()
                        .zip(scales)
                        .map(|(c, s)| {
                            let z: f64 = StandardNormal.sample(rng);
                            c + s * z
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn isotropic_cloud_has_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cloud = gaussian_cloud(&mut rng, 10_000, &[5.0, 5.0, 5.0], &[1.0, 1.0, 1.0]);
        let det = fit_detector(&cloud, 3, 0.99).unwrap();
        for lam in &det.eigenvalues {
            assert!((lam - 1.0).abs() < 0.2, "eigenvalue {lam}");
        }
    }

    #[test]
    fn threshold_matches_chi_square_quantile() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cloud = gaussian_cloud(&mut rng, 200, &[2.0, 2.0, 2.0, 2.0], &[1.0, 0.8, 0.6, 0.4]);
        let det = fit_detector(&cloud, 3, 0.99).unwrap();
        assert!((det.threshold - 11.3449).abs() < 1e-3, "threshold {}", det.threshold);
    }

    #[test]
    fn planar_data_reconstructs_exactly_with_d2() {
        // Points in the plane spanned by two fixed directions in R^4.
        let u = [0.5, 0.5, 0.5, 0.5];
        let v = [0.5, -0.5, 0.5, -0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud: Vec<FeatureVector> = (0..300)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                let b = 0.5 * b;
                feature((0..4).map(|i| 10.0 + a * u[i] + b * v[i]).collect())
            })
            .collect();
        let det = fit_detector(&cloud, 2, 0.99).unwrap();
        for f in &cloud {
            let centered = DVector::from_column_slice(&f.values) - &det.mean;
            let recon = &det.components * (det.components.transpose() * &centered);
            assert!((recon - centered).norm() <= 1e-10);
        }
    }

    #[test]
    fn distance_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cloud = gaussian_cloud(&mut rng, 5000, &[4.0, 6.0, 8.0], &[1.0, 1.0, 1.0]);
        let det = fit_detector(&cloud, 3, 0.99).unwrap();

        // Center maps to zero and is not novel.
        let center = feature(det.mean.iter().copied().collect());
        assert_eq!(mahalanobis_distance(&det, &center).unwrap(), 0.0);
        let (novel, d) = detect_novel(&det, &center).unwrap();
        assert!(!novel);
        assert_eq!(d, 0.0);

        // One standardized step along the first component is distance 1.
        let step: Vec<f64> = det
            .mean
            .iter()
            .zip(det.components.column(0).iter())
            .map(|(m, p)| m + det.eigenvalues[0].sqrt() * p)
            .collect();
        let d = mahalanobis_distance(&det, &feature(step)).unwrap();
        assert!((d - 1.0).abs() < 1e-10, "distance {d}");
    }

    #[test]
    fn unit_eigenvalues_reduce_to_euclidean_norm() {
        let det = EigenSpaceDetector {
            mean: DVector::from_vec(vec![1.0, 2.0]),
            components: DMatrix::identity(2, 2),
            eigenvalues: vec![1.0, 1.0],
            threshold: 9.21,
            confidence_q: 0.99,
        };
        let f = feature(vec![4.0, 6.0]);
        let d = mahalanobis_distance(&det, &f).unwrap();
        assert!((d - (3.0f64.powi(2) + 4.0f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coverage_calibration_on_held_out_gaussians() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let scales = [1.0, 0.7, 0.4];
        let train = gaussian_cloud(&mut rng, 10_000, &[5.0, 5.0, 5.0], &scales);
        let det = fit_detector(&train, 3, 0.99).unwrap();
        let test = gaussian_cloud(&mut rng, 10_000, &[5.0, 5.0, 5.0], &scales);
        let flagged = test
            .iter()
            .filter(|f| detect_novel(&det, f).unwrap().0)
            .count();
        let rate = flagged as f64 / test.len() as f64;
        assert!(
            (0.002..=0.025).contains(&rate),
            "flag rate {rate} outside [0.2%, 2.5%]"
        );
    }

    #[test]
    fn far_feature_is_novel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cloud = gaussian_cloud(&mut rng, 2000, &[3.0, 3.0, 3.0], &[1.0, 1.0, 1.0]);
        let det = fit_detector(&cloud, 3, 0.99).unwrap();
        let step: Vec<f64> = det
            .mean
            .iter()
            .zip(det.components.column(0).iter())
            .map(|(m, p)| m + 10.0 * det.eigenvalues[0].sqrt() * p)
            .collect();
        let (novel, d) = detect_novel(&det, &feature(step)).unwrap();
        assert!(novel);
        assert!((d - 10.0).abs() < 1e-8);
    }

    #[test]
    fn novel_class_recall_at_six_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let train = gaussian_cloud(&mut rng, 5000, &[10.0, 10.0, 10.0], &[1.0, 1.0, 1.0]);
        let det = fit_detector(&train, 3, 0.99).unwrap();
        // Novel cloud centered 6 standardized units along a mixed direction.
        let dir = [1.0 / 3.0f64.sqrt(); 3];
        let center: Vec<f64> = (0..3).map(|i| 10.0 + 6.0 * dir[i]).collect();
        let novel_cloud = gaussian_cloud(&mut rng, 200, &center, &[1.0, 1.0, 1.0]);
        let hits = novel_cloud
            .iter()
            .filter(|f| detect_novel(&det, f).unwrap().0)
            .count();
        assert!(hits >= 190, "recall {hits}/200");
    }

    #[test]
    fn rotating_feature_space_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        // Anisotropic cloud with a clear eigengap so the d=2 subspace is
        // stable under refitting.
        let train = gaussian_cloud(&mut rng, 4000, &[5.0, 5.0, 5.0], &[3.0, 2.0, 0.1]);
        let probes = gaussian_cloud(&mut rng, 50, &[5.0, 5.0, 5.0], &[3.0, 2.0, 0.1]);

        // Deterministic orthogonal matrix from a QR factorization.
        let raw = DMatrix::<f64>::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin() + if i == j { 2.0 } else { 0.0 });
        let q = raw.qr().q();
        let rotate = |f: &FeatureVector| {
            let v = &q * DVector::from_column_slice(&f.values);
            feature(v.iter().copied().collect())
        };

        let det = fit_detector(&train, 2, 0.99).unwrap();
        let train_rot: Vec<FeatureVector> = train.iter().map(&rotate).collect();
        let det_rot = fit_detector(&train_rot, 2, 0.99).unwrap();

        for p in &probes {
            let d0 = mahalanobis_distance(&det, p).unwrap();
            let d1 = mahalanobis_distance(&det_rot, &rotate(p)).unwrap();
            assert!((d0 - d1).abs() < 1e-8, "distance changed under rotation: {d0} vs {d1}");
        }
    }

    #[test]
    fn threshold_is_monotone_in_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let train = gaussian_cloud(&mut rng, 1000, &[5.0, 5.0, 5.0], &[1.0, 1.0, 1.0]);
        let probes = gaussian_cloud(&mut rng, 500, &[5.0, 5.0, 5.0], &[1.4, 1.4, 1.4]);
        let mut prev_tau = 0.0;
        let mut prev_flagged: Option<Vec<bool>> = None;
        for q in [0.5, 0.9, 0.99, 0.999] {
            let det = fit_detector(&train, 3, q).unwrap();
            assert!(det.threshold >= prev_tau);
            prev_tau = det.threshold;
            let flagged: Vec<bool> =
                probes.iter().map(|f| detect_novel(&det, f).unwrap().0).collect();
            if let Some(prev) = prev_flagged {
                for (now, before) in flagged.iter().zip(&prev) {
                    assert!(!(*now && !before), "flagged set grew with q");
                }
            }
            prev_flagged = Some(flagged);
        }
    }

    #[test]
    fn error_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cloud = gaussian_cloud(&mut rng, 3, &[1.0, 1.0, 1.0], &[0.1, 0.1, 0.1]);
        assert!(matches!(fit_detector(&cloud, 3, 0.99), Err(NoveltyError::SampleSize { .. })));
        assert!(matches!(fit_detector(&cloud, 4, 0.99), Err(NoveltyError::Dimension { .. })));
        assert!(matches!(fit_detector(&cloud, 2, 1.0), Err(NoveltyError::Confidence(_))));

        // Rank-deficient: all points on a line in R^3.
        let line: Vec<FeatureVector> = (0..100)
            .map(|i| feature(vec![i as f64, 2.0 * i as f64, 3.0 * i as f64]))
            .collect();
        match fit_detector(&line, 3, 0.99) {
            Err(NoveltyError::Rank { usable_d, requested }) => {
                assert_eq!(usable_d, 1);
                assert_eq!(requested, 3);
            }
            other => panic!("expected rank error, got {other:?}"),
        }

        let det = fit_detector(&gaussian_cloud(&mut rng, 100, &[1.0, 1.0], &[1.0, 1.0]), 2, 0.99).unwrap();
        assert!(matches!(
            mahalanobis_distance(&det, &feature(vec![1.0, 2.0, 3.0])),
            Err(NoveltyError::Shape { .. })
        ));
    }

    #[test]
    fn detector_json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cloud = gaussian_cloud(&mut rng, 500, &[2.0, 3.0, 4.0], &[1.0, 0.5, 0.2]);
        let det = fit_detector(&cloud, 2, 0.99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("detector.json");
        det.save_json(&path).unwrap();
        let back = EigenSpaceDetector::load_json(&path).unwrap();
        assert_eq!(det, back);
    }
}
