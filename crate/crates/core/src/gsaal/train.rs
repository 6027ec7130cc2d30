use std::f64::consts::LN_2;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{detector_width, normalization_stats, normalize_with, Detector, GsaalModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{bce_grad, bce_loss, clamp_prob, Direction, Mlp, OutputActivation, SgdConfig, PROB_EPS};
use crate::subspace::MaskSet;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// First epoch (0-based) of the active-learning phase.
    pub stop_epoch: usize,
    pub detector_lr: f64,
    pub generator_lr: f64,
    /// Capped at the number of training rows.
    pub batch_size: usize,
    pub early_stop_tol: f64,
    pub early_stop_patience: usize,
    /// Epoch from which the early-stop band is monitored; `None` means
    /// `stop_epoch`, i.e. only during active learning.
    pub early_stop_from: Option<usize>,
    pub generator_init: GeneratorInit,
    pub seed: u64,
}

/// Starting weights of the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorInit {
    /// Identity layers: `G(z) = z` on the unit-cube noise.
    Identity,
    /// Glorot-uniform, like the detectors.
    Glorot,
}

impl GeneratorInit {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorInit::Identity => "identity",
            GeneratorInit::Glorot => "glorot",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "identity" => Some(GeneratorInit::Identity),
            "glorot" => Some(GeneratorInit::Glorot),
            _ => None,
        }
    }
}

impl TrainConfig {
    pub const DEFAULT_EPOCHS: usize = 100;

    /// Defaults with `stop_epoch` at 80% of `epochs`.
    pub fn with_epochs(epochs: usize, seed: u64) -> Self {
        Self {
            epochs,
            stop_epoch: default_stop_epoch(epochs),
            detector_lr: 0.01,
            generator_lr: 0.001,
            batch_size: 500,
            early_stop_tol: 0.02,
            early_stop_patience: 5,
            early_stop_from: None,
            generator_init: GeneratorInit::Identity,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.stop_epoch == 0 || self.stop_epoch > self.epochs {
            return Err(Error::Config(format!(
                "stop_epoch must lie in 1..={}, got {}",
                self.epochs, self.stop_epoch
            )));
        }
        if !(self.early_stop_tol > 0.0) {
            return Err(Error::Config("early_stop_tol must be positive".into()));
        }
        if self.early_stop_patience == 0 {
            return Err(Error::Config("early_stop_patience must be positive".into()));
        }
        for lr in [self.detector_lr, self.generator_lr] {
            SgdConfig {
                learning_rate: lr,
                batch_size: self.batch_size,
                seed: self.seed,
            }
            .validate()?;
        }
        Ok(())
    }

    fn monitor_from(&self) -> usize {
        self.early_stop_from.unwrap_or(self.stop_epoch)
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::with_epochs(Self::DEFAULT_EPOCHS, 42)
    }
}

pub fn default_stop_epoch(epochs: usize) -> usize {
    ((epochs as f64 * 0.8).round() as usize).clamp(1, epochs.max(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Joint,
    ActiveLearning,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Joint => "joint",
            Phase::ActiveLearning => "active_learning",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: Phase,
    /// Generator objective `(1/k) Σ_j mean log(1 - D_j(u_j G(z)))`.
    pub generator_loss: f64,
    /// Mean binary cross entropy of each detector over real and generated rows.
    pub detector_losses: Vec<f64>,
    /// Freeze state after this epoch.
    pub detectors_frozen: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn joint_epochs(&self) -> impl Iterator<Item = &EpochRecord> {
        self.epochs.iter().filter(|e| e.phase == Phase::Joint)
    }

    pub fn last_joint(&self) -> Option<&EpochRecord> {
        self.joint_epochs().last()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// `count x d` matrix of i.i.d. uniform `[0, 1)` noise.
pub fn sample_noise<R: Rng + ?Sized>(count: usize, d: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(count, d, |_, _| rng.random::<f64>())
}

struct BatchOutcome {
    loss: f64,
    generator_objective: f64,
}

/// Trains a model on `data` (inliers only) with one detector per mask.
///
/// Each minibatch first moves every unfrozen detector up the gradient of
/// `(1/m) Σ [log D(u x) + log(1 - D(u G(z)))]`; then, during the joint phase,
/// moves the generator down the gradient of
/// `(1/k) Σ_j (1/m) Σ log(1 - D_j(u_j G(z)))` through the updated detectors.
pub fn fit(data: &Matrix, masks: &MaskSet, cfg: &TrainConfig) -> Result<(GsaalModel, TrainTrace)> {
    cfg.validate()?;
    let (n, d) = data.shape();
    if n < 2 || d < 2 {
        return Err(Error::Config(format!(
            "training needs at least 2 rows and 2 columns, got {n}x{d}"
        )));
    }
    if !data.is_finite() {
        return Err(Error::Domain("training data contains non-finite values".into()));
    }
    if masks.dimension() != d {
        return Err(Error::shape("fit", format!("masks over {d} features"), masks.dimension()));
    }

    let (norm_mean, norm_std) = normalization_stats(data);
    let x = normalize_with(data, &norm_mean, &norm_std);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let generator_seed = rng.next_u64();
    let mut generator = match cfg.generator_init {
        GeneratorInit::Identity => Mlp::identity(d, OutputActivation::Linear),
        GeneratorInit::Glorot => Mlp::init_weights(d, d, d, OutputActivation::Linear, generator_seed),
    };
    let width = detector_width(n);
    let mut detectors: Vec<Detector> = masks
        .masks()
        .iter()
        .map(|m| Detector {
            mask: m.clone(),
            net: Mlp::init_weights(m.popcount(), width, 1, OutputActivation::Sigmoid, rng.next_u64()),
        })
        .collect();
    let k = detectors.len();

    let batch = cfg.batch_size.clamp(1, n);
    let det_sgd = SgdConfig {
        learning_rate: cfg.detector_lr,
        batch_size: batch,
        seed: cfg.seed,
    };
    let gen_sgd = SgdConfig {
        learning_rate: cfg.generator_lr,
        ..det_sgd.clone()
    };

    let mut frozen = vec![false; k];
    let mut in_band = vec![0usize; k];
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = TrainTrace::default();

    for epoch in 0..cfg.epochs {
        let phase = if epoch < cfg.stop_epoch {
            Phase::Joint
        } else {
            Phase::ActiveLearning
        };
        order.shuffle(&mut rng);

        let mut loss_sums = vec![0.0; k];
        let mut gen_sum = 0.0;

        for rows in order.chunks(batch) {
            let m = rows.len();
            let real = x.select_rows(rows);
            let noise = sample_noise(m, d, &mut rng);
            let gen_cache = generator.forward_cached(&noise)?;
            let fake = gen_cache.output();

            let outcomes: Vec<BatchOutcome> = detectors
                .par_iter_mut()
                .zip(frozen.par_iter())
                .map(|(det, &is_frozen)| detector_step(det, &real, fake, is_frozen, &det_sgd))
                .collect::<Result<_>>()?;

            for (sum, o) in loss_sums.iter_mut().zip(&outcomes) {
                *sum += o.loss * m as f64;
            }
            gen_sum += outcomes.iter().map(|o| o.generator_objective).sum::<f64>() / k as f64
                * m as f64;

            if phase == Phase::Joint {
                let grad_fake = generator_gradient(&detectors, fake, d)?;
                let bp = generator.backward(&gen_cache, &grad_fake)?;
                generator.sgd_step(&bp.weights, &gen_sgd, Direction::Descend)?;
            }
        }

        let detector_losses: Vec<f64> = loss_sums.iter().map(|s| s / n as f64).collect();
        let generator_loss = gen_sum / n as f64;
        if let Some(j) = detector_losses.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFiniteLoss {
                epoch,
                detector: Some(j),
            });
        }
        if !generator_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                detector: None,
            });
        }

        if epoch >= cfg.monitor_from() {
            for j in 0..k {
                if frozen[j] {
                    continue;
                }
                if (detector_losses[j] - LN_2).abs() < cfg.early_stop_tol {
                    in_band[j] += 1;
                    if in_band[j] >= cfg.early_stop_patience {
                        frozen[j] = true;
                    }
                } else {
                    in_band[j] = 0;
                }
            }
        }

        trace.epochs.push(EpochRecord {
            epoch,
            phase,
            generator_loss,
            detector_losses,
            detectors_frozen: frozen.clone(),
        });
    }

    let model = GsaalModel::new(generator, detectors, norm_mean, norm_std, n)?;
    Ok((model, trace))
}

/// One ascent step for a detector on `[real; fake]`, returning its loss and
/// generator objective measured before the update.
fn detector_step(
    det: &mut Detector,
    real: &Matrix,
    fake: &Matrix,
    frozen: bool,
    sgd: &SgdConfig,
) -> Result<BatchOutcome> {
    let m = real.rows();
    let input = det
        .mask
        .project_batch(real)?
        .vstack(&det.mask.project_batch(fake)?)?;
    let labels: Vec<f64> = (0..2 * m).map(|i| if i < m { 1.0 } else { 0.0 }).collect();
    let cache = det.net.forward_cached(&input)?;
    let p = cache.output().as_slice();
    let loss = bce_loss(p, &labels)?;
    let generator_objective =
        p[m..].iter().map(|&v| (1.0 - clamp_prob(v)).ln()).sum::<f64>() / m as f64;

    if !frozen {
        // the ascent objective (1/m) Σ [log D(real) + log(1 - D(fake))] is
        // -2 times the mean cross entropy over the 2m stacked rows
        let grad: Vec<f64> = bce_grad(p, &labels)?.into_iter().map(|g| -2.0 * g).collect();
        let bp = det.net.backward(&cache, &Matrix::from_vec(2 * m, 1, grad)?)?;
        det.net.sgd_step(&bp.weights, sgd, Direction::Ascend)?;
    }
    Ok(BatchOutcome {
        loss,
        generator_objective,
    })
}

/// Gradient of `(1/k) Σ_j (1/m) Σ_i log(1 - D_j(u_j G(z_i)))` with respect to
/// the generated batch.
fn generator_gradient(detectors: &[Detector], fake: &Matrix, d: usize) -> Result<Matrix> {
    let m = fake.rows();
    let scale = 1.0 / (m as f64 * detectors.len() as f64);
    let parts: Vec<(Vec<usize>, Matrix)> = detectors
        .par_iter()
        .map(|det| {
            let cache = det.net.forward_cached(&det.mask.project_batch(fake)?)?;
            let grad: Vec<f64> = cache
                .output()
                .as_slice()
                .iter()
                .map(|&p| {
                    if !(PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                        0.0
                    } else {
                        -scale / (1.0 - p)
                    }
                })
                .collect();
            let bp = det.net.backward(&cache, &Matrix::from_vec(m, 1, grad)?)?;
            Ok((det.mask.indices().to_vec(), bp.input))
        })
        .collect::<Result<_>>()?;

    let mut total = Matrix::zeros(m, d);
    for (indices, g) in &parts {
        scatter_add(&mut total, g, indices);
    }
    Ok(total)
}

fn scatter_add(total: &mut Matrix, part: &Matrix, indices: &[usize]) {
    for r in 0..part.rows() {
        let src = part.row(r);
        let dst = total.row_mut(r);
        for (&c, &v) in indices.iter().zip(src) {
            dst[c] += v;
        }
    }
}
