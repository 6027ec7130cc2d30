//! Inlier-assumption robustness: GSAAL and LOF on inliers from one family
//! against ten batches of outliers of one type (`local` or `cluster`).
//! Prints the AUC per test batch and the means.
//!
//! cargo run --release --example ia_robustness -- [epochs] [batch_size] [seed] [family] [type] [generator_lr] [detector_lr] [stop_epoch]
//!
//! `family` is one of gaussian, mixture, uniform, ring.

use gsaal::baselines::{LofModel, LOF_DEFAULT_K};
use gsaal::datagen::{generate_ia_dataset, IaSpec, InlierFamily, OutlierType, ReferenceModel};
use gsaal::eval::roc_auc;
use gsaal::gsaal::{fit, TrainConfig};
use gsaal::subspace::{default_k, draw_masks};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> gsaal::Result<()> {
    let epochs: usize = arg(1, 100);
    let batch: usize = arg(2, 500);
    let seed: u64 = arg(3, 42);
    let family = InlierFamily::from_name(&arg(4, "gaussian".to_string())).expect("family");
    let outlier_type = OutlierType::from_name(&arg(5, "cluster".to_string())).expect("outlier type");
    let reference = match outlier_type {
        OutlierType::Local => ReferenceModel::Lof,
        OutlierType::Cluster => ReferenceModel::ClusterShift,
    };

    let spec = IaSpec::new(family, outlier_type, seed);
    let data = generate_ia_dataset(&spec, reference)?;
    for w in &data.warnings {
        println!("warning: {w}");
    }

    let masks = draw_masks(spec.d, default_k(spec.d), seed)?;
    let mut cfg = TrainConfig::with_epochs(epochs, seed);
    cfg.batch_size = batch;
    cfg.generator_lr = arg(6, cfg.generator_lr);
    cfg.detector_lr = arg(7, cfg.detector_lr);
    cfg.stop_epoch = arg(8, cfg.stop_epoch);
    let start = std::time::Instant::now();
    let (model, _) = fit(&data.train, &masks, &cfg)?;
    println!("trained on {} x {} in {:.1?}", data.train.rows(), spec.d, start.elapsed());
    let lof = LofModel::new(data.train.clone(), LOF_DEFAULT_K)?;

    let (mut g_sum, mut l_sum) = (0.0, 0.0);
    for (i, batch) in data.tests.iter().enumerate() {
        let g = roc_auc(&model.score(&batch.points)?, &batch.labels)?;
        let l = roc_auc(&lof.score(&batch.points)?, &batch.labels)?;
        println!("batch {i}: gsaal {g:.4}  lof {l:.4}");
        g_sum += g;
        l_sum += l;
    }
    let n = data.tests.len() as f64;
    println!("mean AUC: gsaal {:.4}  lof {:.4}", g_sum / n, l_sum / n);
    Ok(())
}
