//! AUC of GSAAL as the number of detectors grows, on the banana shape hidden
//! among noise features with points planted off the curve.
//!
//! cargo run --release --example k_sensitivity -- [epochs] [seed]

use gsaal::datagen::{generate_shape, plant_points, LabeledDataset, NoiseFill, Shape, ShapeSpec, BANANA_OFF_CURVE};
use gsaal::eval::sensitivity_sweep;
use gsaal::gsaal::TrainConfig;

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> gsaal::Result<()> {
    let epochs = arg(1, 100) as usize;
    let seed = arg(2, 42);
    let mut spec = ShapeSpec::new(Shape::Banana, 600, seed);
    spec.noise_features = 18;
    let inliers = generate_shape(&spec);
    let planted = plant_points(&BANANA_OFF_CURVE, 18, NoiseFill::Zero, seed);
    let data = inliers.concat(&LabeledDataset::new(planted, vec![1; BANANA_OFF_CURVE.len()])?)?;

    let reports = sensitivity_sweep(&data, &[1, 2, 5, 10, 20, 30], &TrainConfig::with_epochs(epochs, seed))?;
    println!("k   auc     fit_s");
    for r in reports {
        println!("{:<3} {:.4}  {:.2}", r.k_used, r.auc, r.wall_times.fit_seconds);
    }
    Ok(())
}
