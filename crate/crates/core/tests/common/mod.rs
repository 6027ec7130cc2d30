//! Independent reference implementations used as test oracles. Each one is
//! written the slow, obvious way and shares no code with the library beyond
//! the `Matrix` container and network weights.

#![allow(dead_code)]

use gsaal::nn::{bce_grad, bce_loss, Mlp, OutputActivation};
use gsaal::subspace::DiscreteDistribution;
use gsaal::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-scale..scale))
}

/// Forward pass by explicit index loops; the last row of each weight matrix
/// is the bias.
pub fn naive_forward(net: &Mlp, batch: &Matrix) -> Vec<Vec<f64>> {
    let layers = net.layers();
    (0..batch.rows())
        .map(|r| {
            let mut a: Vec<f64> = batch.row(r).to_vec();
            for (l, w) in layers.iter().enumerate() {
                let fan_in = w.rows() - 1;
                let mut z = vec![0.0; w.cols()];
                for (j, zj) in z.iter_mut().enumerate() {
                    let mut s = w.get(fan_in, j);
                    for (i, ai) in a.iter().enumerate() {
                        s += ai * w.get(i, j);
                    }
                    *zj = s;
                }
                a = if l + 1 < layers.len() {
                    z.into_iter().map(|v| v.max(0.0)).collect()
                } else {
                    match net.output_activation() {
                        OutputActivation::Sigmoid => z.into_iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect(),
                        OutputActivation::Linear => z,
                    }
                };
            }
            a
        })
        .collect()
}

/// Mean BCE of a sigmoid network against `labels`, through the library
/// forward pass (the gradient check compares analytic and numeric
/// derivatives of this scalar).
pub fn network_loss(net: &Mlp, batch: &Matrix, labels: &[f64]) -> f64 {
    let p = net.forward(batch).unwrap();
    bce_loss(p.as_slice(), labels).unwrap()
}

/// Replaces every bias with a uniform draw from `[-0.5, 0.5]`, so no
/// pre-activation sits exactly on the ReLU kink.
pub fn randomize_biases(net: &mut Mlp, seed: u64) {
    let mut r = rng(seed);
    for w in net.layers_mut() {
        let last = w.rows() - 1;
        for c in 0..w.cols() {
            w.set(last, c, r.random_range(-0.5..=0.5));
        }
    }
}

/// Smallest `|z|` over all hidden pre-activations. Finite differences with
/// step `h` are only valid when this clears the kink by a wide margin.
pub fn kink_margin(net: &Mlp, batch: &Matrix) -> f64 {
    let layers = net.layers();
    let mut margin = f64::INFINITY;
    for r in 0..batch.rows() {
        let mut a: Vec<f64> = batch.row(r).to_vec();
        for w in &layers[..layers.len() - 1] {
            let fan_in = w.rows() - 1;
            let z: Vec<f64> = (0..w.cols())
                .map(|j| w.get(fan_in, j) + a.iter().enumerate().map(|(i, ai)| ai * w.get(i, j)).sum::<f64>())
                .collect();
            margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            a = z.into_iter().map(|v| v.max(0.0)).collect();
        }
    }
    margin
}

/// Largest relative error between the analytic weight gradient of the mean
/// BCE and central finite differences with step `h`.
pub fn max_gradient_error(net: &Mlp, batch: &Matrix, labels: &[f64], h: f64) -> f64 {
    let cache = net.forward_cached(batch).unwrap();
    let g = bce_grad(cache.output().as_slice(), labels).unwrap();
    let grad_out = Matrix::from_vec(batch.rows(), 1, g).unwrap();
    let analytic = net.backward(&cache, &grad_out).unwrap().weights;

    let mut worst: f64 = 0.0;
    for (l, w) in net.layers().iter().enumerate() {
        for idx in 0..w.as_slice().len() {
            let mut plus = net.clone();
            plus.layers_mut()[l].as_mut_slice()[idx] += h;
            let mut minus = net.clone();
            minus.layers_mut()[l].as_mut_slice()[idx] -= h;
            let numeric = (network_loss(&plus, batch, labels) - network_loss(&minus, batch, labels)) / (2.0 * h);
            let a = analytic.layers[l].as_slice()[idx];
            let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
    }
    worst
}

/// Neumaier-compensated sum.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean BCE with `ln_1p` for the complement and compensated summation.
pub fn reference_bce(p: &[f64], y: &[f64]) -> f64 {
    let eps = 1e-7;
    let terms = p.iter().zip(y).map(|(&p, &y)| {
        let p = p.clamp(eps, 1.0 - eps);
        -(y * p.ln() + (1.0 - y) * (-p).ln_1p())
    });
    exact_sum(terms) / p.len() as f64
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distances from `q` to every training row except `skip`, fully sorted.
fn sorted_neighbors(train: &Matrix, q: &[f64], skip: Option<usize>) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..train.rows())
        .filter(|&i| Some(i) != skip)
        .map(|i| (distance(train.row(i), q), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

pub fn naive_knn(train: &Matrix, queries: &Matrix, k: usize) -> Vec<f64> {
    queries
        .row_iter()
        .map(|q| sorted_neighbors(train, q, None)[k - 1].0)
        .collect()
}

/// Textbook LOF: neighborhoods of training points exclude the point itself;
/// queries are new points.
pub fn naive_lof(train: &Matrix, queries: &Matrix, k: usize) -> Vec<f64> {
    let n = train.rows();
    let hoods: Vec<Vec<(f64, usize)>> = (0..n)
        .map(|i| sorted_neighbors(train, train.row(i), Some(i))[..k].to_vec())
        .collect();
    let kdist: Vec<f64> = hoods.iter().map(|h| h[k - 1].0).collect();
    let lrd_of = |h: &[(f64, usize)]| {
        let reach: f64 = h.iter().map(|&(d, j)| if d > kdist[j] { d } else { kdist[j] }).sum();
        1.0 / (reach / k as f64).max(1e-12)
    };
    let lrd: Vec<f64> = hoods.iter().map(|h| lrd_of(h)).collect();
    queries
        .row_iter()
        .map(|q| {
            let h = &sorted_neighbors(train, q, None)[..k];
            let neighbor_mean: f64 = h.iter().map(|&(_, j)| lrd[j]).sum::<f64>() / k as f64;
            neighbor_mean / lrd_of(h)
        })
        .collect()
}

/// P(score_pos > score_neg) + P(equal) / 2 by comparing every pair.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Scores drawn from a small grid so ties are common.
pub fn tied_instance(n: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut r = rng(seed);
    loop {
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..8) as f64 / 8.0).collect();
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        if labels.contains(&0) && labels.contains(&1) {
            return (scores, labels);
        }
    }
}

/// Random pmf over `n` atoms with small integer weights.
fn random_pmf(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let w: Vec<u32> = (0..n).map(|_| r.random_range(1..10)).collect();
    let total: u32 = w.iter().sum();
    w.into_iter().map(|v| v as f64 / total as f64).collect()
}

pub struct Myopic {
    pub dist: DiscreteDistribution,
    /// Joint pmf of (x1, x2) keyed by the pair.
    pub head: Vec<((i64, i64), f64)>,
}

/// `(x1, x2)` on a random support of a 3x3 grid, `x3` independent on 3 values.
pub fn myopic_distribution(seed: u64) -> Myopic {
    let mut r = rng(seed);
    let mut cells: Vec<(i64, i64)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
    cells.retain(|_| r.random_bool(0.7));
    if cells.is_empty() {
        cells.push((1, 1));
    }
    let p12 = random_pmf(cells.len(), &mut r);
    let p3 = random_pmf(3, &mut r);
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (&(a, b), &pa) in cells.iter().zip(&p12) {
        for (c, &pc) in p3.iter().enumerate() {
            support.push(vec![a, b, c as i64]);
            probs.push(pa * pc);
        }
    }
    let total: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|p| p / total).collect();
    Myopic {
        dist: DiscreteDistribution::new(support, probs).unwrap(),
        head: cells.into_iter().zip(p12).collect(),
    }
}
