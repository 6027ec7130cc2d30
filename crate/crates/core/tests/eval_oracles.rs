mod common;

use std::collections::HashMap;

use common::{pairwise_auc, rng, tied_instance};
use gsaal::datagen::LabeledDataset;
use gsaal::eval::{occ_split, roc_auc};
use gsaal::Matrix;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn rank_auc_matches_pairwise_oracle() {
    for seed in 0..200 {
        let n = 2 + (seed as usize % 60);
        let (scores, labels) = tied_instance(n, seed);
        let got = roc_auc(&scores, &labels).unwrap();
        assert!((got - pairwise_auc(&scores, &labels)).abs() < 1e-12, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn complement_symmetry(seed in any::<u64>(), n in 2usize..80) {
        let (scores, labels) = tied_instance(n, seed);
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let total = roc_auc(&scores, &labels).unwrap() + roc_auc(&neg, &labels).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_increasing_transforms(seed in any::<u64>(), n in 2usize..80) {
        let (scores, labels) = tied_instance(n, seed);
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&warped, &labels).unwrap());
    }
}

fn row_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|v| v.to_bits()).collect()
}

#[test]
fn split_partitions_the_rows() {
    for seed in 0..100u64 {
        let mut r = rng(seed);
        let n = 5 + r.random_range(0..40);
        let points = Matrix::from_fn(n, 3, |_, _| r.random::<f64>());
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.2))).collect();
        labels[0] = 0;
        labels[1] = 1;
        let data = LabeledDataset::new(points.clone(), labels.clone()).unwrap();
        let split = occ_split(&data, 0.8, seed).unwrap();

        let mut counts: HashMap<(Vec<u64>, u8), i64> = HashMap::new();
        for (row, &l) in points.row_iter().zip(&labels) {
            *counts.entry((row_key(row), l)).or_default() += 1;
        }
        for row in split.train.row_iter() {
            *counts.entry((row_key(row), 0)).or_default() -= 1;
        }
        for (row, &l) in split.test_points.row_iter().zip(&split.test_labels) {
            *counts.entry((row_key(row), l)).or_default() -= 1;
        }
        assert!(counts.values().all(|&c| c == 0), "seed {seed}");
        let n_in = labels.iter().filter(|&&l| l == 0).count();
        assert_eq!(split.train.rows(), (n_in as f64 * 0.8).round() as usize);
    }
}
