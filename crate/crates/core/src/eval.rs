//! Experiment harness: one-class splits, ROC AUC, k sweeps, inference-time
//! scaling and score-grid export.

use std::cmp::Ordering;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{KnnModel, LofModel, KNN_DEFAULT_K, LOF_DEFAULT_K};
use crate::datagen::LabeledDataset;
use crate::error::{Error, Result};
use crate::gsaal::{fit, GsaalModel, TrainConfig};
use crate::io::{fmt_f64, write_rows};
use crate::matrix::Matrix;
use crate::subspace::draw_masks;

#[derive(Clone, Debug, PartialEq)]
pub struct OccSplit {
    /// Inliers only.
    pub train: Matrix,
    pub test_points: Matrix,
    pub test_labels: Vec<u8>,
}

/// Puts a random `train_fraction` of the inliers into `train`; the remaining
/// inliers and every outlier form the test set.
pub fn occ_split(data: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<OccSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train_fraction {train_fraction} outside (0, 1)")));
    }
    let mut inliers: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == 0).collect();
    let outliers: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == 1).collect();
    if inliers.is_empty() {
        return Err(Error::Domain("split needs at least one inlier".into()));
    }
    if outliers.is_empty() {
        return Err(Error::Domain("split needs at least one outlier".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inliers.shuffle(&mut rng);
    let n_train = ((inliers.len() as f64) * train_fraction).round() as usize;
    let (train_idx, held_out) = inliers.split_at(n_train.min(inliers.len()));

    let mut test_idx = held_out.to_vec();
    test_idx.sort_unstable();
    let mut test_labels = vec![0u8; test_idx.len()];
    test_idx.extend_from_slice(&outliers);
    test_labels.resize(test_idx.len(), 1);

    let mut train_idx = train_idx.to_vec();
    train_idx.sort_unstable();
    Ok(OccSplit {
        train: data.points.select_rows(&train_idx),
        test_points: data.points.select_rows(&test_idx),
        test_labels,
    })
}

/// Area under the ROC curve with outliers (label 1) as the positive class,
/// computed as the Mann–Whitney statistic with average ranks for ties.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::shape("roc_auc", scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Domain("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&o| labels[o] == 1).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WallTimes {
    pub fit_seconds: f64,
    pub score_seconds: f64,
    pub per_point_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub method_name: String,
    pub auc: f64,
    pub n_train: usize,
    pub d: usize,
    /// Number of detectors (GSAAL) or neighbors (baselines).
    pub k_used: usize,
    pub wall_times: WallTimes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    Knn,
    Lof,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Knn => "knn",
            Baseline::Lof => "lof",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "knn" => Some(Baseline::Knn),
            "lof" => Some(Baseline::Lof),
            _ => None,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn per_point(seconds: f64, rows: usize) -> f64 {
    if rows == 0 {
        0.0
    } else {
        seconds / rows as f64
    }
}

/// Fits GSAAL with `k` fresh masks on `split.train` and reports test AUC.
pub fn evaluate_gsaal(split: &OccSplit, k: usize, cfg: &TrainConfig) -> Result<(EvalReport, GsaalModel)> {
    let d = split.train.cols();
    let masks = draw_masks(d, k, mask_seed(cfg.seed, k))?;
    let ((model, _), fit_seconds) = timed(|| fit(&split.train, &masks, cfg))?;
    let (scores, score_seconds) = timed(|| model.score(&split.test_points))?;
    let auc = roc_auc(&scores, &split.test_labels)?;
    let report = EvalReport {
        method_name: "gsaal".into(),
        auc,
        n_train: split.train.rows(),
        d,
        k_used: k,
        wall_times: WallTimes {
            fit_seconds,
            score_seconds,
            per_point_seconds: per_point(score_seconds, split.test_points.rows()),
        },
    };
    Ok((report, model))
}

pub fn evaluate_baseline(split: &OccSplit, baseline: Baseline) -> Result<EvalReport> {
    let n = split.train.rows();
    let (scores, fit_seconds, score_seconds, k) = match baseline {
        Baseline::Knn => {
            let k = KNN_DEFAULT_K.min(n.saturating_sub(1)).max(1);
            let (m, fs) = timed(|| KnnModel::new(split.train.clone(), k))?;
            let (s, ss) = timed(|| m.score(&split.test_points))?;
            (s, fs, ss, k)
        }
        Baseline::Lof => {
            let k = LOF_DEFAULT_K.min(n.saturating_sub(1)).max(1);
            let (m, fs) = timed(|| LofModel::new(split.train.clone(), k))?;
            let (s, ss) = timed(|| m.score(&split.test_points))?;
            (s, fs, ss, k)
        }
    };
    Ok(EvalReport {
        method_name: baseline.name().into(),
        auc: roc_auc(&scores, &split.test_labels)?,
        n_train: n,
        d: split.train.cols(),
        k_used: k,
        wall_times: WallTimes {
            fit_seconds,
            score_seconds,
            per_point_seconds: per_point(score_seconds, split.test_points.rows()),
        },
    })
}

/// Mask seed for a sweep cell; distinct per `k` so every cell draws fresh masks.
pub fn mask_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One GSAAL fit and evaluation per `k`, all sharing a single split drawn
/// with `cfg.seed`.
pub fn sensitivity_sweep(data: &LabeledDataset, k_values: &[usize], cfg: &TrainConfig) -> Result<Vec<EvalReport>> {
    let split = occ_split(data, 0.8, cfg.seed)?;
    k_values
        .iter()
        .map(|&k| evaluate_gsaal(&split, k, cfg).map(|(r, _)| r))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalabilityConfig {
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub k: usize,
    pub n_test: usize,
    /// Dimension used while sweeping `n`.
    pub fixed_d: usize,
    /// Training size used while sweeping `d`.
    pub fixed_n: usize,
    pub repetitions: usize,
    /// Training for timing cells only needs to produce a model of the right
    /// shape, so a handful of epochs is enough.
    pub train: TrainConfig,
}

impl ScalabilityConfig {
    pub fn new(n_values: Vec<usize>, d_values: Vec<usize>, seed: u64) -> Self {
        let mut train = TrainConfig::with_epochs(2, seed);
        train.stop_epoch = 1;
        Self {
            n_values,
            d_values,
            k: 30,
            n_test: 10_000,
            fixed_d: 100,
            fixed_n: 500,
            repetitions: 3,
            train,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub fit_seconds: f64,
    pub score_seconds: f64,
    pub per_point_seconds: f64,
}

impl TimingRow {
    pub const HEADER: [&'static str; 6] = ["n", "d", "k", "fit_s", "score_s", "per_point_s"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.d.to_string(),
            self.k.to_string(),
            fmt_f64(self.fit_seconds),
            fmt_f64(self.score_seconds),
            fmt_f64(self.per_point_seconds),
        ]
    }
}

fn uniform_points(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Times one `(n, d)` cell: fit on `n` uniform random points, then score
/// `n_test` fresh points `repetitions` times and keep the median.
pub fn time_cell(n: usize, d: usize, cfg: &ScalabilityConfig) -> Result<TimingRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed ^ ((n as u64) << 32) ^ d as u64);
    let train = uniform_points(n, d, &mut rng);
    let test = uniform_points(cfg.n_test, d, &mut rng);
    let masks = draw_masks(d, cfg.k, mask_seed(cfg.train.seed, cfg.k))?;
    let ((model, _), fit_seconds) = timed(|| fit(&train, &masks, &cfg.train))?;
    let mut times = Vec::with_capacity(cfg.repetitions.max(1));
    for _ in 0..cfg.repetitions.max(1) {
        let (_, s) = timed(|| model.score(&test))?;
        times.push(s);
    }
    let score_seconds = median(&mut times);
    Ok(TimingRow {
        n,
        d,
        k: cfg.k,
        fit_seconds,
        score_seconds,
        per_point_seconds: per_point(score_seconds, cfg.n_test),
    })
}

/// The `n`-sweep (at `fixed_d`) followed by the `d`-sweep (at `fixed_n`).
/// Cells run one after another.
pub fn scalability_run(cfg: &ScalabilityConfig) -> Result<Vec<TimingRow>> {
    if cfg.n_values.is_empty() && cfg.d_values.is_empty() {
        return Err(Error::Config("scalability run needs at least one n or d value".into()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        rows.push(time_cell(n, cfg.fixed_d, cfg)?);
    }
    for &d in &cfg.d_values {
        rows.push(time_cell(cfg.fixed_n, d, cfg)?);
    }
    Ok(rows)
}

/// Coefficient of determination of the least-squares line through `(xs, ys)`.
pub fn linear_r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridBounds {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreGrid {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// `scores.get(i, j)` is the score at `(x1[i], x2[j], 0, ...)`.
    pub scores: Matrix,
}

impl ScoreGrid {
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.x1.iter().enumerate().flat_map(move |(i, &a)| {
            self.x2
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, self.scores.get(i, j)))
        })
    }

    /// Grid cell with the smallest score.
    pub fn argmin(&self) -> (f64, f64, f64) {
        self.rows()
            .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))
            .expect("non-empty grid")
    }
}

pub fn score_grid(model: &GsaalModel, bounds: GridBounds, resolution: usize) -> Result<ScoreGrid> {
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let x1 = linspace(bounds.x1.0, bounds.x1.1, resolution);
    let x2 = linspace(bounds.x2.0, bounds.x2.1, resolution);
    let scores = model.score_grid(&x1, &x2)?;
    Ok(ScoreGrid { x1, x2, scores })
}

/// Writes `x1,x2,score` rows covering a `resolution x resolution` grid.
pub fn export_grid_csv(
    model: &GsaalModel,
    bounds: GridBounds,
    resolution: usize,
    path: impl AsRef<Path>,
) -> Result<ScoreGrid> {
    let grid = score_grid(model, bounds, resolution)?;
    let rows: Vec<Vec<String>> = grid
        .rows()
        .map(|(a, b, s)| vec![fmt_f64(a), fmt_f64(b), fmt_f64(s)])
        .collect();
    write_rows(path, &["x1", "x2", "score"], &rows)?;
    Ok(grid)
}
