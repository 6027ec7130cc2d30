//! Feature-subspace masks and the averaged-marginal statistic.
//!
//! A [`SubspaceMask`] is a diagonal 0/1 selection matrix stored as a boolean
//! vector. Legal masks select at least one feature and never all of them.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubspaceMask {
    selected: Vec<bool>,
    // ascending indices of the selected features
    indices: Vec<usize>,
}

impl SubspaceMask {
    pub fn new(selected: Vec<bool>) -> Result<Self> {
        let indices: Vec<usize> = selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect();
        if indices.is_empty() {
            return Err(Error::Domain("subspace mask selects no feature".into()));
        }
        if indices.len() == selected.len() {
            return Err(Error::Domain(
                "subspace mask selects every feature (identity)".into(),
            ));
        }
        Ok(Self { selected, indices })
    }

    /// Parses the `"0110"` form used in model files.
    pub fn parse(bits: &str) -> Result<Self> {
        let selected = bits
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::Format(format!("invalid mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(selected)
    }

    pub fn dim(&self) -> usize {
        self.selected.len()
    }

    pub fn popcount(&self) -> usize {
        self.indices.len()
    }

    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dim() {
            return Err(Error::shape("SubspaceMask::project", self.dim(), point.len()));
        }
        Ok(self.indices.iter().map(|&i| point[i]).collect())
    }

    pub fn project_batch(&self, batch: &Matrix) -> Result<Matrix> {
        if batch.cols() != self.dim() {
            return Err(Error::shape(
                "SubspaceMask::project_batch",
                self.dim(),
                batch.cols(),
            ));
        }
        Ok(batch.select_columns(&self.indices))
    }

    pub fn to_bits(&self) -> String {
        self.selected
            .iter()
            .map(|&s| if s { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for SubspaceMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubspaceMask({})", self.to_bits())
    }
}

impl fmt::Display for SubspaceMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits())
    }
}

/// A list of pairwise distinct masks over a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet {
    masks: Vec<SubspaceMask>,
    dimension: usize,
}

impl MaskSet {
    pub fn new(masks: Vec<SubspaceMask>) -> Result<Self> {
        let dimension = masks
            .first()
            .map(SubspaceMask::dim)
            .ok_or_else(|| Error::Config("mask set must not be empty".into()))?;
        let mut seen = HashSet::with_capacity(masks.len());
        for m in &masks {
            if m.dim() != dimension {
                return Err(Error::shape("MaskSet::new", dimension, m.dim()));
            }
            if !seen.insert(m) {
                return Err(Error::Config(format!("duplicate subspace {m}")));
            }
        }
        Ok(Self { masks, dimension })
    }

    pub fn masks(&self) -> &[SubspaceMask] {
        &self.masks
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

/// Number of legal masks in `d` dimensions: `2^d - 2`.
pub fn mask_capacity(d: usize) -> u128 {
    if d >= 127 {
        u128::MAX
    } else {
        (1u128 << d).saturating_sub(2)
    }
}

/// Draws `k` distinct masks uniformly from the legal masks of dimension `d`.
///
/// Each feature is kept with probability 1/2; empty, full and repeated masks
/// are rejected and redrawn.
pub fn draw_masks(d: usize, k: usize, seed: u64) -> Result<MaskSet> {
    if d < 2 {
        return Err(Error::Capacity {
            requested: k,
            dim: d,
            available: 0,
        });
    }
    let available = mask_capacity(d);
    if k as u128 > available {
        return Err(Error::Capacity {
            requested: k,
            dim: d,
            available,
        });
    }
    if k == 0 {
        return Err(Error::Config("at least one subspace is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(k);
    let mut masks = Vec::with_capacity(k);
    while masks.len() < k {
        let bits: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let Ok(mask) = SubspaceMask::new(bits) else {
            continue;
        };
        if seen.insert(mask.clone()) {
            masks.push(mask);
        }
    }
    MaskSet::new(masks)
}

/// Default detector count, `ceil(2 sqrt(d))`.
pub fn default_k(d: usize) -> usize {
    let k = (2.0 * (d as f64).sqrt()).ceil() as usize;
    // exact squares: guard against sqrt rounding up past an integer
    if k > 0 && ((k - 1) * (k - 1)) >= 4 * d {
        k - 1
    } else {
        k
    }
}

/// Finite distribution over integer points, small enough to enumerate.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<Vec<i64>>,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub const MAX_DIM: usize = 4;

    pub fn new(support: Vec<Vec<i64>>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::Domain(
                "support and probabilities must be non-empty and equally long".into(),
            ));
        }
        let d = support[0].len();
        if d == 0 || d > Self::MAX_DIM {
            return Err(Error::Domain(format!(
                "dimension {d} outside 1..={}",
                Self::MAX_DIM
            )));
        }
        if support.iter().any(|p| p.len() != d) {
            return Err(Error::Domain("support points differ in dimension".into()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Domain("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            support,
            probabilities,
        })
    }

    pub fn dim(&self) -> usize {
        self.support[0].len()
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability mass at an exact support point (0 if absent).
    pub fn pmf(&self, point: &[i64]) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .filter(|(s, _)| s.as_slice() == point)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Marginal mass of `projected_point` in the subspace selected by `mask`.
pub fn marginal_pdf(
    dist: &DiscreteDistribution,
    mask: &SubspaceMask,
    projected_point: &[i64],
) -> Result<f64> {
    if mask.dim() != dist.dim() {
        return Err(Error::shape("marginal_pdf", dist.dim(), mask.dim()));
    }
    if projected_point.len() != mask.popcount() {
        return Err(Error::shape(
            "marginal_pdf",
            mask.popcount(),
            projected_point.len(),
        ));
    }
    Ok(dist
        .support
        .iter()
        .zip(&dist.probabilities)
        .filter(|(s, _)| {
            mask.indices()
                .iter()
                .zip(projected_point)
                .all(|(&i, &v)| s[i] == v)
        })
        .map(|(_, p)| p)
        .sum())
}

/// `(1/k) Σ_i p_{u_i x}(u_i x)` over the masks in `masks`.
pub fn averaged_marginal_statistic(
    dist: &DiscreteDistribution,
    masks: &[SubspaceMask],
    point: &[i64],
) -> Result<f64> {
    if masks.is_empty() {
        return Err(Error::Config("at least one mask is required".into()));
    }
    if point.len() != dist.dim() {
        return Err(Error::shape(
            "averaged_marginal_statistic",
            dist.dim(),
            point.len(),
        ));
    }
    let mut total = 0.0;
    for mask in masks {
        let projected: Vec<i64> = mask.indices().iter().map(|&i| point[i]).collect();
        total += marginal_pdf(dist, mask, &projected)?;
    }
    Ok(total / masks.len() as f64)
}
