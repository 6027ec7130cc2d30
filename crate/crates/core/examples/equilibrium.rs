//! Adversarial equilibrium on a 4-D Gaussian: after joint training every
//! detector's loss should sit near ln 2 and its output near 1/2, because the
//! generator reproduces the inlier distribution in each subspace.
//!
//! cargo run --release --example equilibrium -- [epochs] [batch_size] [seed] [generator_lr] [detector_lr] [stop_epoch]
//!
//! Defaults match the acceptance run: 500 joint epochs, batch 64, both
//! learning rates 0.01.

use gsaal::gsaal::{fit, sample_noise, TrainConfig};
use gsaal::subspace::draw_masks;
use gsaal::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn gaussian(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> gsaal::Result<()> {
    let epochs: usize = arg(1, 500);
    let batch: usize = arg(2, 64);
    let seed: u64 = arg(3, 42);

    let data = gaussian(500, 4, seed);
    let masks = draw_masks(4, 4, seed)?;
    let mut cfg = TrainConfig::with_epochs(epochs, seed);
    cfg.batch_size = batch;
    cfg.generator_lr = arg(4, 0.01);
    cfg.detector_lr = arg(5, 0.01);
    cfg.stop_epoch = arg(6, epochs);
    let (model, trace) = fit(&data, &masks, &cfg)?;

    let stride = (epochs / 10).max(1);
    for e in trace.epochs.iter().filter(|e| e.epoch % stride == 0 || e.epoch + 1 == epochs) {
        let losses: Vec<String> = e.detector_losses.iter().map(|l| format!("{l:.4}")).collect();
        println!("epoch {:>4}  generator {:+.4}  detectors [{}]", e.epoch, e.generator_loss, losses.join(", "));
    }

    let fresh = gaussian(2000, 4, seed + 1);
    let outputs = model.detector_outputs(&fresh)?;
    for j in 0..model.k() {
        println!("detector {j} ({}) mean output on fresh inliers {:.4}", model.detectors()[j].mask, mean(&outputs.column(j)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
    let generated = model.denormalize(&model.generator().forward(&sample_noise(2000, 4, &mut rng))?)?;
    let fmt = |v: Vec<f64>| v.iter().map(|x| format!("{x:+.3}")).collect::<Vec<_>>().join(" ");
    let means = generated.column_means();
    println!("generated mean {}  sd {}", fmt(means.clone()), fmt(generated.column_stds(&means)));
    let last = trace.last().expect("epochs > 0");
    let worst = last.detector_losses.iter().map(|l| (l - std::f64::consts::LN_2).abs()).fold(0.0, f64::max);
    let outs: Vec<f64> = (0..model.k()).map(|j| mean(&outputs.column(j))).collect();
    let lo = outs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = outs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("max |loss - ln 2| {worst:.4}; detector outputs in [{lo:.4}, {hi:.4}]");
    Ok(())
}
