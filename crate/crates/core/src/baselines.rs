//! Distance-based reference detectors: kNN distance and Local Outlier Factor.
//!
//! Both use exact brute-force neighbor search. Queries are treated as new
//! points (a query equal to a training point sees it at distance 0); the
//! `training_scores` methods instead score each training point against the
//! others, leaving the point itself out.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

pub const KNN_DEFAULT_K: usize = 5;
pub const LOF_DEFAULT_K: usize = 20;

/// Floor applied to mean reachability distances so duplicates stay finite.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// The `k` nearest training rows to `query` as `(distance, index)`, ascending.
/// Ties are broken by index. `exclude` drops one training row.
fn nearest(train: &Matrix, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = train
        .row_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
    };
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_dist);
        all.truncate(k);
    }
    all.sort_unstable_by(by_dist);
    all.into_iter().map(|(d2, i)| (d2.sqrt(), i)).collect()
}

fn check_query(train: &Matrix, points: &Matrix) -> Result<()> {
    if points.cols() != train.cols() {
        return Err(Error::shape("baseline score", train.cols(), points.cols()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct KnnModel {
    training_points: Matrix,
    k_neighbors: usize,
}

impl KnnModel {
    pub fn new(training_points: Matrix, k_neighbors: usize) -> Result<Self> {
        if k_neighbors == 0 || k_neighbors >= training_points.rows() {
            return Err(Error::Config(format!(
                "kNN needs 1 <= k < n, got k = {k_neighbors}, n = {}",
                training_points.rows()
            )));
        }
        Ok(Self {
            training_points,
            k_neighbors,
        })
    }

    pub fn k(&self) -> usize {
        self.k_neighbors
    }

    /// Distance from each query to its k-th nearest training point.
    pub fn score(&self, points: &Matrix) -> Result<Vec<f64>> {
        check_query(&self.training_points, points)?;
        Ok(points
            .row_iter()
            .map(|q| nearest(&self.training_points, q, self.k_neighbors, None)[self.k_neighbors - 1].0)
            .collect())
    }

    pub fn training_scores(&self) -> Vec<f64> {
        (0..self.training_points.rows())
            .map(|i| {
                nearest(
                    &self.training_points,
                    self.training_points.row(i),
                    self.k_neighbors,
                    Some(i),
                )[self.k_neighbors - 1]
                    .0
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct LofModel {
    training_points: Matrix,
    k_neighbors: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofModel {
    pub fn new(training_points: Matrix, k_neighbors: usize) -> Result<Self> {
        let n = training_points.rows();
        if k_neighbors == 0 || k_neighbors >= n {
            return Err(Error::Config(format!(
                "LOF needs 1 <= k < n, got k = {k_neighbors}, n = {n}"
            )));
        }
        let neighborhoods: Vec<Vec<(f64, usize)>> = (0..n)
            .map(|i| nearest(&training_points, training_points.row(i), k_neighbors, Some(i)))
            .collect();
        let k_distance: Vec<f64> = neighborhoods.iter().map(|nb| nb[k_neighbors - 1].0).collect();
        let lrd = neighborhoods
            .iter()
            .map(|nb| local_reachability_density(nb, &k_distance))
            .collect();
        Ok(Self {
            training_points,
            k_neighbors,
            k_distance,
            lrd,
        })
    }

    pub fn k(&self) -> usize {
        self.k_neighbors
    }

    pub fn k_distances(&self) -> &[f64] {
        &self.k_distance
    }

    pub fn local_reachability_densities(&self) -> &[f64] {
        &self.lrd
    }

    pub fn score(&self, points: &Matrix) -> Result<Vec<f64>> {
        check_query(&self.training_points, points)?;
        Ok(points
            .row_iter()
            .map(|q| {
                let nb = nearest(&self.training_points, q, self.k_neighbors, None);
                self.lof_of(&nb)
            })
            .collect())
    }

    /// Classic LOF of every training point, each excluded from its own
    /// neighborhood.
    pub fn training_scores(&self) -> Vec<f64> {
        (0..self.training_points.rows())
            .map(|i| {
                let nb = nearest(
                    &self.training_points,
                    self.training_points.row(i),
                    self.k_neighbors,
                    Some(i),
                );
                self.lof_of(&nb)
            })
            .collect()
    }

    fn lof_of(&self, neighborhood: &[(f64, usize)]) -> f64 {
        let own = local_reachability_density(neighborhood, &self.k_distance);
        let mean_neighbor_lrd =
            neighborhood.iter().map(|&(_, j)| self.lrd[j]).sum::<f64>() / neighborhood.len() as f64;
        mean_neighbor_lrd / own
    }
}

fn local_reachability_density(neighborhood: &[(f64, usize)], k_distance: &[f64]) -> f64 {
    let mean_reach = neighborhood
        .iter()
        .map(|&(dist, j)| dist.max(k_distance[j]))
        .sum::<f64>()
        / neighborhood.len() as f64;
    1.0 / mean_reach.max(DISTANCE_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Matrix {
        Matrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn knn_hand_cases() {
        let m = KnnModel::new(line(&[0.0, 1.0, 2.0]), 2).unwrap();
        assert_eq!(m.score(&line(&[10.0])).unwrap(), vec![9.0]);
        let m = KnnModel::new(line(&[0.0, 1.0, 2.0]), 1).unwrap();
        assert_eq!(m.score(&line(&[1.0])).unwrap(), vec![0.0]);
        assert_eq!(m.training_scores(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn k_must_be_below_n() {
        assert!(matches!(KnnModel::new(line(&[0.0, 1.0]), 2), Err(Error::Config(_))));
        assert!(matches!(LofModel::new(line(&[0.0, 1.0]), 2), Err(Error::Config(_))));
        assert!(KnnModel::new(line(&[0.0, 1.0]), 0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let m = KnnModel::new(Matrix::zeros(4, 2), 1).unwrap();
        assert!(m.score(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn duplicates_stay_finite() {
        let m = LofModel::new(line(&[1.0, 1.0, 1.0, 1.0, 5.0]), 2).unwrap();
        assert!(m.local_reachability_densities().iter().all(|v| v.is_finite() && *v > 0.0));
        let s = m.score(&line(&[1.0, 3.0])).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn far_query_has_large_lof() {
        let pts: Vec<f64> = (0..30).map(|i| (i as f64) * 0.01).collect();
        let m = LofModel::new(line(&pts), 5).unwrap();
        assert!(m.score(&line(&[5.0])).unwrap()[0] > 2.0);
    }
}
