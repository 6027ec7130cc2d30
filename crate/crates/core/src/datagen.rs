//! Synthetic data: two-feature shapes padded with Gaussian noise features,
//! inlier-assumption outlier datasets, and the linear-kernel MMD myopicity
//! check.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::baselines::{LofModel, LOF_DEFAULT_K};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub points: Matrix,
    /// 0 for inliers, 1 for outliers.
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(points: Matrix, labels: Vec<u8>) -> Result<Self> {
        let feature_names = default_feature_names(points.cols());
        Self::with_names(points, labels, feature_names)
    }

    pub fn with_names(points: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if labels.len() != points.rows() {
            return Err(Error::shape("LabeledDataset", points.rows(), labels.len()));
        }
        if feature_names.len() != points.cols() {
            return Err(Error::shape("LabeledDataset names", points.cols(), feature_names.len()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Domain("labels must be 0 or 1".into()));
        }
        Ok(Self {
            points,
            labels,
            feature_names,
        })
    }

    pub fn inliers(points: Matrix) -> Self {
        let labels = vec![0; points.rows()];
        let feature_names = default_feature_names(points.cols());
        Self {
            points,
            labels,
            feature_names,
        }
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Appends the rows of `other` (same dimension) to this dataset.
    pub fn concat(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        let points = self.points.vstack(&other.points)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        LabeledDataset::with_names(points, labels, self.feature_names.clone())
    }
}

pub fn default_feature_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x{i}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Banana,
    Spiral,
    Star,
    Circle,
    L,
}

impl Shape {
    pub const ALL: [Shape; 5] = [Shape::Banana, Shape::Spiral, Shape::Star, Shape::Circle, Shape::L];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Banana => "banana",
            Shape::Spiral => "spiral",
            Shape::Star => "star",
            Shape::Circle => "circle",
            Shape::L => "l",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub n_points: usize,
    pub noise_features: usize,
    /// Width of the additive `U(0, jitter)` terms; for `L` it is the variance
    /// of the Gaussian thickness. Zero places points exactly on the curve.
    pub jitter: f64,
    pub seed: u64,
}

impl ShapeSpec {
    pub const DEFAULT_NOISE_FEATURES: usize = 58;
    pub const DEFAULT_JITTER: f64 = 0.1;

    pub fn new(shape: Shape, n_points: usize, seed: u64) -> Self {
        Self {
            shape,
            n_points,
            noise_features: Self::DEFAULT_NOISE_FEATURES,
            jitter: Self::DEFAULT_JITTER,
            seed,
        }
    }
}

/// Banana curve point `(sin θ, sin³ θ)` before jitter.
pub fn banana_curve(theta: f64) -> (f64, f64) {
    let s = theta.sin();
    (s, s * s * s)
}

/// Star radius: `max(sin 5θ, 0.4)`; `None` where `sin 5θ < 0`.
pub fn star_radius(theta: f64) -> Option<f64> {
    let s = (5.0 * theta).sin();
    (s >= 0.0).then(|| s.max(0.4))
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn shape_xy<R: Rng + ?Sized>(shape: Shape, jitter: f64, index: usize, n: usize, rng: &mut R) -> (f64, f64) {
    let u = |rng: &mut R| if jitter > 0.0 { rng.random_range(0.0..jitter) } else { 0.0 };
    match shape {
        Shape::Banana => {
            let (x, y) = banana_curve(rng.random_range(0.0..=PI));
            (x + u(rng), y + u(rng))
        }
        Shape::Spiral => {
            let theta = rng.random_range(0.0..=4.0 * PI);
            let r = loop {
                let r: f64 = rng.random();
                if r > 0.0 {
                    break r;
                }
            };
            (r * theta.cos() + u(rng), r * theta.sin())
        }
        Shape::Star => {
            let (theta, r) = loop {
                let theta = rng.random_range(0.0..=2.0 * PI);
                if let Some(r) = star_radius(theta) {
                    break (theta, r);
                }
            };
            (r * theta.cos() + u(rng), r * theta.sin() + u(rng))
        }
        Shape::Circle => {
            let theta = rng.random_range(0.0..=2.0 * PI);
            (theta.cos() + u(rng), theta.sin() + u(rng))
        }
        Shape::L => {
            let thickness = |rng: &mut R| {
                if jitter > 0.0 {
                    Normal::new(0.0, jitter.sqrt()).expect("positive sd").sample(rng)
                } else {
                    0.0
                }
            };
            // first half: vertical arm (N, U(-5, 0)); second half: horizontal arm (U(0, 5), N)
            if index < n / 2 {
                (thickness(rng), rng.random_range(-5.0..0.0))
            } else {
                (rng.random_range(0.0..5.0), thickness(rng))
            }
        }
    }
}

/// Points whose first two columns follow `spec.shape` and whose remaining
/// `noise_features` columns are i.i.d. standard Gaussian. All rows are inliers.
pub fn generate_shape(spec: &ShapeSpec) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = 2 + spec.noise_features;
    let mut points = Matrix::zeros(spec.n_points, d);
    for i in 0..spec.n_points {
        let (x, y) = shape_xy(spec.shape, spec.jitter, i, spec.n_points, &mut rng);
        let row = points.row_mut(i);
        row[0] = x;
        row[1] = y;
        for v in &mut row[2..] {
            *v = StandardNormal.sample(&mut rng);
        }
    }
    LabeledDataset::inliers(points)
}

/// How to fill the noise columns of planted points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseFill {
    Zero,
    Gaussian,
}

/// Off-curve `(x1, x2)` locations for the banana shape: each lies at least
/// 0.3 from the curve and inside the bounding box of the marginals.
pub const BANANA_OFF_CURVE: [(f64, f64); 8] = [
    (0.0, 0.8),
    (0.1, 0.6),
    (0.2, 0.9),
    (0.3, 0.5),
    (0.4, 1.0),
    (0.5, 0.8),
    (0.9, 0.1),
    (1.05, 0.3),
];

/// Builds full-dimensional points `(x1, x2, noise...)` from given subspace
/// coordinates.
pub fn plant_points(xy: &[(f64, f64)], noise_features: usize, fill: NoiseFill, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Matrix::zeros(xy.len(), 2 + noise_features);
    for (i, &(x, y)) in xy.iter().enumerate() {
        let row = points.row_mut(i);
        row[0] = x;
        row[1] = y;
        if fill == NoiseFill::Gaussian {
            for v in &mut row[2..] {
                *v = StandardNormal.sample(&mut rng);
            }
        }
    }
    points
}

/// Distance from `(x, y)` to the noise-free banana curve, by dense sampling
/// of θ.
pub fn banana_curve_distance(x: f64, y: f64) -> f64 {
    const STEPS: usize = 20_000;
    (0..=STEPS)
        .map(|i| {
            let (cx, cy) = banana_curve(PI * i as f64 / STEPS as f64);
            ((cx - x).powi(2) + (cy - y).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InlierFamily {
    Gaussian,
    GaussianMixture,
    UniformBox,
    Ring,
}

impl InlierFamily {
    pub const ALL: [InlierFamily; 4] = [
        InlierFamily::Gaussian,
        InlierFamily::GaussianMixture,
        InlierFamily::UniformBox,
        InlierFamily::Ring,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InlierFamily::Gaussian => "gaussian",
            InlierFamily::GaussianMixture => "mixture",
            InlierFamily::UniformBox => "uniform",
            InlierFamily::Ring => "ring",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutlierType {
    Local,
    Cluster,
}

impl OutlierType {
    pub fn name(self) -> &'static str {
        match self {
            OutlierType::Local => "local",
            OutlierType::Cluster => "cluster",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [OutlierType::Local, OutlierType::Cluster]
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(name))
    }
}

/// Model deciding which candidate points count as outliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceModel {
    Lof,
    ClusterShift,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IaSpec {
    pub inlier_distribution: InlierFamily,
    pub outlier_type: OutlierType,
    pub n_inliers: usize,
    pub n_outliers: usize,
    pub d: usize,
    pub n_batches: usize,
    pub train_fraction: f64,
    /// LOF score above which a uniform candidate is accepted (Local type).
    pub lof_threshold: f64,
    pub lof_k: usize,
    /// Cluster centre offset, in multiples of the mean inlier feature sd.
    pub cluster_shift: f64,
    pub clusters_per_batch: usize,
    /// Scale of each cluster relative to the inlier spread.
    pub cluster_spread: f64,
    pub seed: u64,
}

impl IaSpec {
    pub const MAX_DRAWS: usize = 1_000_000;

    pub fn new(inlier_distribution: InlierFamily, outlier_type: OutlierType, seed: u64) -> Self {
        Self {
            inlier_distribution,
            outlier_type,
            n_inliers: 2000,
            n_outliers: 400,
            d: 20,
            n_batches: 10,
            train_fraction: 0.8,
            lof_threshold: 1.5,
            lof_k: LOF_DEFAULT_K,
            cluster_shift: 6.0,
            clusters_per_batch: 8,
            cluster_spread: 0.5,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IaDataset {
    pub train: Matrix,
    pub tests: Vec<LabeledDataset>,
    pub warnings: Vec<String>,
}

struct FamilySampler {
    family: InlierFamily,
    d: usize,
    mixture_means: Vec<Vec<f64>>,
}

impl FamilySampler {
    fn new<R: Rng + ?Sized>(family: InlierFamily, d: usize, rng: &mut R) -> Self {
        let mixture_means = if family == InlierFamily::GaussianMixture {
            (0..3)
                .map(|_| (0..d).map(|_| rng.random_range(-4.0..4.0)).collect())
                .collect()
        } else {
            Vec::new()
        };
        Self {
            family,
            d,
            mixture_means,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.family {
            InlierFamily::Gaussian => (0..self.d)
                .map(|_| gauss(rng))
                .collect(),
            InlierFamily::GaussianMixture => {
                let c = rng.random_range(0..self.mixture_means.len());
                self.mixture_means[c]
                    .iter()
                    .map(|m| m + gauss(rng))
                    .collect()
            }
            InlierFamily::UniformBox => {
                let h = 3f64.sqrt();
                (0..self.d).map(|_| rng.random_range(-h..h)).collect()
            }
            InlierFamily::Ring => {
                let angle = rng.random_range(0.0..2.0 * PI);
                let radius = 3.0 + 0.1 * gauss(rng);
                let mut p = vec![radius * angle.cos(), radius * angle.sin()];
                p.extend((2..self.d).map(|_| gauss(rng)));
                p
            }
        }
    }
}

/// Builds one training set of inliers and `n_batches` test sets, each made of
/// the held-out inliers plus a fresh batch of outliers of the requested type.
pub fn generate_ia_dataset(spec: &IaSpec, reference: ReferenceModel) -> Result<IaDataset> {
    match (spec.outlier_type, reference) {
        (OutlierType::Local, ReferenceModel::Lof) | (OutlierType::Cluster, ReferenceModel::ClusterShift) => {}
        (t, r) => {
            return Err(Error::Config(format!(
                "reference model {r:?} cannot generate {} outliers",
                t.name()
            )))
        }
    }
    if spec.n_inliers < 2 || spec.n_outliers == 0 || spec.d == 0 || spec.n_batches == 0 {
        return Err(Error::Config("IA counts must be positive".into()));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sampler = FamilySampler::new(spec.inlier_distribution, spec.d, &mut rng);
    let inlier_rows: Vec<Vec<f64>> = (0..spec.n_inliers).map(|_| sampler.sample(&mut rng)).collect();
    let inliers = Matrix::from_rows(&inlier_rows)?;

    let mut warnings = Vec::new();
    let batches: Vec<Matrix> = match spec.outlier_type {
        OutlierType::Local => {
            let lof = LofModel::new(inliers.clone(), spec.lof_k)?;
            let (lo, hi) = inflated_box(&inliers, 0.2);
            let mut draws = 0usize;
            let mut batches = Vec::with_capacity(spec.n_batches);
            for _ in 0..spec.n_batches {
                let mut accepted = Vec::with_capacity(spec.n_outliers);
                while accepted.len() < spec.n_outliers {
                    draws += 1;
                    if draws > IaSpec::MAX_DRAWS {
                        return Err(Error::Generation(format!(
                            "rejection sampling exceeded {} draws; lower the LOF threshold ({})",
                            IaSpec::MAX_DRAWS,
                            spec.lof_threshold
                        )));
                    }
                    let candidate: Vec<f64> =
                        lo.iter().zip(&hi).map(|(&a, &b)| rng.random_range(a..=b)).collect();
                    let score = lof.score(&Matrix::from_rows(&[candidate.as_slice()])?)?[0];
                    if score > spec.lof_threshold {
                        accepted.push(candidate);
                    }
                }
                batches.push(Matrix::from_rows(&accepted)?);
            }
            batches
        }
        OutlierType::Cluster => {
            if spec.cluster_shift == 0.0 {
                warnings.push(
                    "cluster_shift is 0: cluster outliers follow the inlier distribution".to_string(),
                );
            }
            let mean = inliers.column_means();
            let sd = inliers.column_stds(&mean);
            let sigma = sd.iter().sum::<f64>() / sd.len() as f64;
            let clusters = spec.clusters_per_batch.clamp(1, spec.n_outliers);
            (0..spec.n_batches)
                .map(|_| {
                    let mut rows = Vec::with_capacity(spec.n_outliers);
                    for c in 0..clusters {
                        let size = spec.n_outliers / clusters + usize::from(c < spec.n_outliers % clusters);
                        let direction = unit_vector(spec.d, &mut rng);
                        let centre: Vec<f64> = mean
                            .iter()
                            .zip(&direction)
                            .map(|(m, u)| m + spec.cluster_shift * sigma * u)
                            .collect();
                        for _ in 0..size {
                            let x = sampler.sample(&mut rng);
                            rows.push(
                                x.iter()
                                    .zip(&mean)
                                    .zip(&centre)
                                    .map(|((v, m), c)| c + spec.cluster_spread * (v - m))
                                    .collect::<Vec<f64>>(),
                            );
                        }
                    }
                    Matrix::from_rows(&rows)
                })
                .collect::<Result<_>>()?
        }
    };

    let mut order: Vec<usize> = (0..spec.n_inliers).collect();
    order.shuffle(&mut rng);
    let n_train = ((spec.n_inliers as f64) * spec.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, spec.n_inliers - 1);
    let train = inliers.select_rows(&order[..n_train]);
    let held_out = inliers.select_rows(&order[n_train..]);

    let tests = batches
        .into_iter()
        .map(|outliers| {
            let mut labels = vec![0u8; held_out.rows()];
            labels.extend(std::iter::repeat_n(1u8, outliers.rows()));
            LabeledDataset::new(held_out.vstack(&outliers)?, labels)
        })
        .collect::<Result<_>>()?;

    Ok(IaDataset {
        train,
        tests,
        warnings,
    })
}

fn inflated_box(points: &Matrix, fraction: f64) -> (Vec<f64>, Vec<f64>) {
    let d = points.cols();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in points.row_iter() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    for j in 0..d {
        let pad = (hi[j] - lo[j]) * fraction / 2.0;
        lo[j] -= pad;
        hi[j] += pad;
    }
    (lo, hi)
}

fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Linear-kernel MMD²: the squared distance between the two sample means.
pub fn mmd_linear(sample_a: &Matrix, sample_b: &Matrix) -> Result<f64> {
    if sample_a.rows() == 0 || sample_b.rows() == 0 {
        return Err(Error::Domain("MMD of an empty sample".into()));
    }
    if sample_a.cols() != sample_b.cols() {
        return Err(Error::shape("mmd_linear", sample_a.cols(), sample_b.cols()));
    }
    let ma = sample_a.column_means();
    let mb = sample_b.column_means();
    Ok(ma.iter().zip(&mb).map(|(a, b)| (a - b).powi(2)).sum())
}

/// Three-feature population: `x1 ~ N(0,1)`, `x2 = x1 + N(0, 0.1²)` and a third
/// feature that is independent noise (`control = false`) or `x1²`.
pub fn three_feature_population(n: usize, control: bool, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wiggle = Normal::new(0.0, 0.1).expect("positive sd");
    let mut out = Matrix::zeros(n, 3);
    for r in 0..n {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let row = out.row_mut(r);
        row[0] = x1;
        row[1] = x1 + wiggle.sample(&mut rng);
        row[2] = if control {
            x1 * x1
        } else {
            StandardNormal.sample(&mut rng)
        };
    }
    out
}

/// Zeroes the columns of `sample` not selected by `keep` (the padded view `u x`).
pub fn view_padded(sample: &Matrix, keep: &[bool]) -> Result<Matrix> {
    if keep.len() != sample.cols() {
        return Err(Error::shape("view_padded", sample.cols(), keep.len()));
    }
    let mut out = sample.clone();
    for r in 0..out.rows() {
        for (v, &k) in out.row_mut(r).iter_mut().zip(keep) {
            if !k {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MyopicityReport {
    /// MMD² between `x` and its `(1,1,0)` view when `x3` is independent noise.
    pub myopic: f64,
    /// Same statistic when `x3 = x1²`.
    pub control: f64,
}

/// Compares each population against the `(1, 1, 0)` view of an independent
/// draw from the same population.
pub fn myopicity_test(n: usize, seed: u64) -> Result<MyopicityReport> {
    let keep = [true, true, false];
    let stat = |control: bool, offset: u64| -> Result<f64> {
        let full = three_feature_population(n, control, seed.wrapping_add(offset));
        let other = three_feature_population(n, control, seed.wrapping_add(offset + 1));
        mmd_linear(&full, &view_padded(&other, &keep)?)
    };
    Ok(MyopicityReport {
        myopic: stat(false, 0)?,
        control: stat(true, 2)?,
    })
}
