//! Trains on the banana shape hidden among 58 noise features, then checks
//! that off-curve points in the (x1, x2) plane stand out, and writes the
//! score grid for plotting.
//!
//! cargo run --release --example banana_boundary -- [epochs] [batch_size] [seed]

use gsaal::baselines::{KnnModel, KNN_DEFAULT_K};
use gsaal::datagen::{generate_shape, plant_points, NoiseFill, Shape, ShapeSpec, BANANA_OFF_CURVE};
use gsaal::eval::{export_grid_csv, roc_auc, GridBounds};
use gsaal::gsaal::{fit, TrainConfig};
use gsaal::subspace::{default_k, draw_masks};

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[((v.len() - 1) as f64 * q).round() as usize]
}

fn main() -> gsaal::Result<()> {
    let epochs = arg(1, 100) as usize;
    let batch = arg(2, 500) as usize;
    let seed = arg(3, 42);

    let train = generate_shape(&ShapeSpec::new(Shape::Banana, 960, seed));
    let held_out = generate_shape(&ShapeSpec::new(Shape::Banana, 240, seed + 1000));
    let planted = plant_points(&BANANA_OFF_CURVE, 58, NoiseFill::Zero, seed);

    let masks = draw_masks(60, default_k(60), seed)?;
    let mut cfg = TrainConfig::with_epochs(epochs, seed);
    cfg.batch_size = batch;
    let start = std::time::Instant::now();
    let (model, trace) = fit(&train.points, &masks, &cfg)?;
    println!("trained {} epochs in {:.1?}", epochs, start.elapsed());
    if let Some(last) = trace.last() {
        println!("last generator loss {:.4}, detector losses {:?}", last.generator_loss, last.detector_losses);
    }

    let inlier_scores = model.score(&held_out.points)?;
    let planted_scores = model.score(&planted)?;
    let p95 = percentile(&inlier_scores, 0.95);
    println!("inlier 95th percentile {p95:.4}");
    for (&(x, y), s) in BANANA_OFF_CURVE.iter().zip(&planted_scores) {
        println!("  ({x:>4}, {y:>4}) score {s:.4} {}", if *s > p95 { "above" } else { "BELOW" });
    }

    let test = held_out.points.vstack(&planted)?;
    let mut labels = vec![0u8; held_out.len()];
    labels.extend(std::iter::repeat_n(1, planted.rows()));
    let gsaal_auc = roc_auc(&model.score(&test)?, &labels)?;
    let knn = KnnModel::new(train.points.clone(), KNN_DEFAULT_K)?;
    let knn_auc = roc_auc(&knn.score(&test)?, &labels)?;
    println!("AUC gsaal {gsaal_auc:.4}  knn {knn_auc:.4}");

    let out = std::env::temp_dir().join("banana_grid.csv");
    let bounds = GridBounds { x1: (-0.2, 1.3), x2: (-0.2, 1.3) };
    let grid = export_grid_csv(&model, bounds, 60, &out)?;
    let (x1, x2, s) = grid.argmin();
    println!("grid written to {}; lowest score {s:.4} at ({x1:.3}, {x2:.3})", out.display());
    Ok(())
}
