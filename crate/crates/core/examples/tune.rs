//! Scratch probe for picking shipped defaults. Not part of the deliverable.

use whisker_rc::readout::{evaluate, extract_dataset_features, train_readout};
use whisker_rc::terrain::{make_dataset, Split, TerrainClass, Traversal};
use whisker_rc::whisker::{build_whisker, Material, WhiskerGeometry};
use whisker_rc::LabeledDataset;

fn classes_v2() -> Vec<TerrainClass> {
    let mk = |name: &str, sigma: f64, ell: f64, hard: f64, ma: f64, mw: f64| TerrainClass {
        name: name.into(),
        roughness_sigma_m: sigma * 1e-3,
        correlation_length_m: ell * 1e-3,
        hardness: hard,
        macro_amplitude_m: ma * 1e-3,
        macro_wavelength_m: mw * 1e-3,
    };
    vec![
        mk("flat", 0.10, 1.0, 1.0, 0.0, 1.0),
        mk("carpet", 0.45, 5.0, 0.35, 0.0, 1.0),
        mk("grass", 0.60, 5.0, 0.5, 0.0, 1.0),
        mk("sand", 0.80, 0.8, 0.7, 0.0, 1.0),
        mk("gravel", 1.20, 1.8, 0.9, 0.0, 1.0),
        mk("brick", 0.50, 1.2, 1.0, 0.8, 2.5),
    ]
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(30);
    let taps: Vec<f64> = if args.get(2).map(String::as_str) == Some("6taps") {
        vec![0.2, 0.35, 0.5, 0.65, 0.8, 1.0]
    } else {
        vec![0.25, 0.5, 0.75, 1.0]
    };
    let geo = WhiskerGeometry::new(0.15, 1.5e-3, 0.45e-3, 12).unwrap();
    let mat = Material::new(200e9, 7850.0, 28.0, 1e-5).unwrap();
    let w = build_whisker(geo, mat).unwrap();
    let classes = classes_v2();
    let dx = 1e-4;

    for speed in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let trav = Traversal { speed_m_s: speed, sample_rate_hz: 2000.0, duration_s: 1.0 };
        let t0 = std::time::Instant::now();
        let ds = make_dataset(&classes, &[trav], trials, 12345, dx, 0.8).unwrap();
        let feats = extract_dataset_features(&w, &taps, &ds, 0.3, 0.7).unwrap();
        let train: Vec<_> =
            feats.records.iter().filter(|r| r.split == Split::Train).cloned().collect();
        let test: Vec<_> =
            feats.records.iter().filter(|r| r.split == Split::Test).cloned().collect();
        let model = train_readout(&LabeledDataset::new(train).unwrap(), 1e-6).unwrap();
        let cm = evaluate(&model, &LabeledDataset::new(test).unwrap()).unwrap();
        println!(
            "speed {speed}: accuracy {:.3} ({:.1} s)",
            cm.accuracy,
            t0.elapsed().as_secs_f64()
        );
        if args.iter().any(|a| a == "confusion") {
            for (i, name) in cm.class_names.iter().enumerate() {
                println!("  {name:8} {:?}", cm.counts[i]);
            }
            // Class centroids of standardized-ish features (mean per tap, in um).
            for name in &feats.class_names {
                let members: Vec<_> =
                    feats.records.iter().filter(|r| &r.label == name).collect();
                let m = members[0].payload.values.len();
                let mut mean = vec![0.0; m];
                let mut var = vec![0.0; m];
                for r in &members {
                    for (j, v) in r.payload.values.iter().enumerate() {
                        mean[j] += v * 1e6;
                    }
                }
                for v in &mut mean {
                    *v /= members.len() as f64;
                }
                for r in &members {
                    for (j, v) in r.payload.values.iter().enumerate() {
                        var[j] += (v * 1e6 - mean[j]).powi(2);
                    }
                }
                let cv: Vec<f64> = var
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| ((v / (members.len() - 1) as f64).sqrt() / m * 100.0).round())
                    .collect();
                let mean_r: Vec<f64> = mean.iter().map(|v| (v * 100.0).round() / 100.0).collect();
                println!("    {name:8} um {mean_r:?} cv% {cv:?}");
            }
        }
    }
}
