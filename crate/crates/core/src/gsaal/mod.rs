//! The subspace adversarial detector: one full-space generator, `k` detectors
//! each looking at one feature subspace, and the averaged scoring function.
//!
//! Training runs in two phases. While `epoch < stop_epoch` the generator and
//! all detectors are optimized jointly; afterwards the generator is frozen and
//! the detectors keep training against its samples (active learning). A
//! detector whose loss settles at the adversarial equilibrium value `ln 2` is
//! frozen individually.

mod persist;
mod train;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::Mlp;
use crate::subspace::{MaskSet, SubspaceMask};

pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use train::{fit, sample_noise, EpochRecord, GeneratorInit, Phase, TrainConfig, TrainTrace};

/// Standard deviations below this are treated as constant features.
pub const MIN_STD: f64 = 1e-9;

/// Rows per parallel scoring chunk.
const SCORE_CHUNK: usize = 256;

/// Hidden width of every detector for a training set of `n` points:
/// `floor(sqrt(n))`, never below 4.
pub fn detector_width(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detector {
    pub mask: SubspaceMask,
    pub net: Mlp,
}

/// A trained model. Immutable once built; scoring is safe from many threads.
#[derive(Clone, Debug, PartialEq)]
pub struct GsaalModel {
    generator: Mlp,
    detectors: Vec<Detector>,
    norm_mean: Vec<f64>,
    norm_std: Vec<f64>,
    d: usize,
    n_train: usize,
}

impl GsaalModel {
    pub fn new(
        generator: Mlp,
        detectors: Vec<Detector>,
        norm_mean: Vec<f64>,
        norm_std: Vec<f64>,
        n_train: usize,
    ) -> Result<Self> {
        let d = norm_mean.len();
        if d < 2 {
            return Err(Error::Config(format!("data dimension {d} < 2")));
        }
        if norm_std.len() != d {
            return Err(Error::shape("GsaalModel::new", d, norm_std.len()));
        }
        if let Some(s) = norm_std.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("non-positive normalization scale {s}")));
        }
        if generator.input_dim() != d || generator.out_dim() != d {
            return Err(Error::shape(
                "GsaalModel::new",
                format!("generator {d} -> {d}"),
                format!("{} -> {}", generator.input_dim(), generator.out_dim()),
            ));
        }
        if detectors.is_empty() {
            return Err(Error::Config("model needs at least one detector".into()));
        }
        // validates distinctness and a common dimension
        MaskSet::new(detectors.iter().map(|det| det.mask.clone()).collect())?;
        for (i, det) in detectors.iter().enumerate() {
            if det.mask.dim() != d {
                return Err(Error::shape("GsaalModel::new", d, det.mask.dim()));
            }
            if det.net.input_dim() != det.mask.popcount() || det.net.out_dim() != 1 {
                return Err(Error::shape(
                    "GsaalModel::new",
                    format!("detector {i}: {} inputs, 1 output", det.mask.popcount()),
                    format!("{} inputs, {} outputs", det.net.input_dim(), det.net.out_dim()),
                ));
            }
        }
        Ok(Self {
            generator,
            detectors,
            norm_mean,
            norm_std,
            d,
            n_train,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn k(&self) -> usize {
        self.detectors.len()
    }

    pub fn generator(&self) -> &Mlp {
        &self.generator
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn masks(&self) -> Vec<SubspaceMask> {
        self.detectors.iter().map(|d| d.mask.clone()).collect()
    }

    pub fn norm_mean(&self) -> &[f64] {
        &self.norm_mean
    }

    pub fn norm_std(&self) -> &[f64] {
        &self.norm_std
    }

    /// Maps raw points into the z-scored space the networks operate in.
    pub fn normalize(&self, points: &Matrix) -> Result<Matrix> {
        if points.cols() != self.d {
            return Err(Error::shape("GsaalModel::normalize", self.d, points.cols()));
        }
        Ok(normalize_with(points, &self.norm_mean, &self.norm_std))
    }

    /// Maps normalized points back to raw feature space.
    pub fn denormalize(&self, points: &Matrix) -> Result<Matrix> {
        if points.cols() != self.d {
            return Err(Error::shape("GsaalModel::denormalize", self.d, points.cols()));
        }
        let mut out = points.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.norm_mean).zip(&self.norm_std)
            {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }

    /// Mean detector output `(1/k) Σ D_i(u_i x)` for each row of `points`.
    pub fn detector_mean(&self, points: &Matrix) -> Result<Vec<f64>> {
        let normalized = self.normalize(points)?;
        let rows = normalized.rows();
        if rows == 0 {
            return Ok(Vec::new());
        }
        let indices: Vec<usize> = (0..rows).collect();
        let chunks: Vec<Vec<f64>> = indices
            .par_chunks(SCORE_CHUNK)
            .map(|chunk| self.detector_mean_normalized(&normalized.select_rows(chunk)))
            .collect::<Result<_>>()?;
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Outlier scores `1 - (1/k) Σ D_i(u_i x)`; larger is more anomalous.
    pub fn score(&self, points: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .detector_mean(points)?
            .into_iter()
            .map(|m| 1.0 - m)
            .collect())
    }

    /// Individual detector outputs for raw points, one column per detector.
    pub fn detector_outputs(&self, points: &Matrix) -> Result<Matrix> {
        let normalized = self.normalize(points)?;
        let mut out = Matrix::zeros(points.rows(), self.k());
        for (j, det) in self.detectors.iter().enumerate() {
            let p = det.net.forward(&det.mask.project_batch(&normalized)?)?;
            for r in 0..points.rows() {
                out.set(r, j, p.get(r, 0));
            }
        }
        Ok(out)
    }

    fn detector_mean_normalized(&self, normalized: &Matrix) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; normalized.rows()];
        for det in &self.detectors {
            let p = det.net.forward(&det.mask.project_batch(normalized)?)?;
            for (a, v) in acc.iter_mut().zip(p.as_slice()) {
                *a += v;
            }
        }
        let k = self.k() as f64;
        Ok(acc.into_iter().map(|a| a / k).collect())
    }

    /// Scores the grid `(x1, x2, 0, ..., 0)` in raw feature space. Entry
    /// `(i, j)` corresponds to `(grid_x1[i], grid_x2[j])`.
    pub fn score_grid(&self, grid_x1: &[f64], grid_x2: &[f64]) -> Result<Matrix> {
        let mut points = Matrix::zeros(grid_x1.len() * grid_x2.len(), self.d);
        for (i, &a) in grid_x1.iter().enumerate() {
            for (j, &b) in grid_x2.iter().enumerate() {
                let row = points.row_mut(i * grid_x2.len() + j);
                row[0] = a;
                row[1] = b;
            }
        }
        let scores = self.score(&points)?;
        Matrix::from_vec(grid_x1.len(), grid_x2.len(), scores)
    }
}

pub(crate) fn normalize_with(points: &Matrix, mean: &[f64], std: &[f64]) -> Matrix {
    let mut out = points.clone();
    for r in 0..out.rows() {
        for ((v, m), s) in out.row_mut(r).iter_mut().zip(mean).zip(std) {
            *v = (*v - m) / s;
        }
    }
    out
}

/// Column means and floored standard deviations of a training matrix.
pub fn normalization_stats(data: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let mean = data.column_means();
    let std = data
        .column_stds(&mean)
        .into_iter()
        .map(|s| if s < MIN_STD { 1.0 } else { s })
        .collect();
    (mean, std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::OutputActivation;
    use crate::subspace::draw_masks;

    pub(crate) fn zero_model(d: usize, k: usize) -> GsaalModel {
        let masks = draw_masks(d, k, 1).unwrap();
        let detectors = masks
            .masks()
            .iter()
            .map(|m| {
                let mut net =
                    Mlp::init_weights(m.popcount(), 4, 1, OutputActivation::Sigmoid, 0);
                for w in net.layers_mut() {
                    w.as_mut_slice().fill(0.0);
                }
                Detector {
                    mask: m.clone(),
                    net,
                }
            })
            .collect();
        let gen = Mlp::init_weights(d, d, d, OutputActivation::Linear, 0);
        GsaalModel::new(gen, detectors, vec![0.0; d], vec![1.0; d], 10).unwrap()
    }

    #[test]
    fn zero_detectors_score_one_half() {
        let model = zero_model(5, 4);
        let pts = Matrix::from_fn(7, 5, |i, j| (i * j) as f64 - 3.0);
        assert!(model.score(&pts).unwrap().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn single_detector_score_is_complement() {
        let masks = draw_masks(3, 1, 4).unwrap();
        let m = masks.masks()[0].clone();
        let net = Mlp::init_weights(m.popcount(), 4, 1, OutputActivation::Sigmoid, 8);
        let gen = Mlp::init_weights(3, 3, 3, OutputActivation::Linear, 0);
        let model = GsaalModel::new(
            gen,
            vec![Detector {
                mask: m.clone(),
                net: net.clone(),
            }],
            vec![0.5, -1.0, 2.0],
            vec![2.0, 1.0, 0.5],
            10,
        )
        .unwrap();
        let pts = Matrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.0, 4.0]]).unwrap();
        let direct = net
            .forward(&m.project_batch(&model.normalize(&pts).unwrap()).unwrap())
            .unwrap();
        let scores = model.score(&pts).unwrap();
        for (s, p) in scores.iter().zip(direct.as_slice()) {
            assert_eq!(*s, 1.0 - p);
        }
    }

    #[test]
    fn grid_matches_pointwise_scores() {
        let model = zero_model(4, 3);
        let grid = model.score_grid(&[0.3], &[-0.7]).unwrap();
        let direct = model
            .score(&Matrix::from_rows(&[[0.3, -0.7, 0.0, 0.0]]).unwrap())
            .unwrap();
        assert_eq!(grid.shape(), (1, 1));
        assert_eq!(grid.get(0, 0), direct[0]);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let model = zero_model(4, 3);
        assert!(matches!(
            model.score(&Matrix::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn constant_columns_get_unit_scale() {
        let data = Matrix::from_rows(&[[1.0, 3.0], [2.0, 3.0], [3.0, 3.0]]).unwrap();
        let (mean, std) = normalization_stats(&data);
        assert_eq!(mean, vec![2.0, 3.0]);
        assert_eq!(std[1], 1.0);
        assert!((std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn detector_width_floor() {
        assert_eq!(detector_width(2), 4);
        assert_eq!(detector_width(500), 22);
        assert_eq!(detector_width(960), 30);
        assert_eq!(detector_width(4000), 63);
    }
}
