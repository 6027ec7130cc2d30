mod common;

use common::{kink_margin, max_gradient_error, randomize_biases, naive_forward, random_matrix, reference_bce, rng};
use gsaal::nn::{bce_loss, Mlp, OutputActivation};
use gsaal::Matrix;
use proptest::prelude::*;
use rand::Rng;

fn random_labels(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn weight_gradients_match_central_differences(
        input_dim in 1usize..5,
        width in 1usize..6,
        rows in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut net = Mlp::init_weights(input_dim, width, 1, OutputActivation::Sigmoid, seed);
        randomize_biases(&mut net, seed ^ 0xB1);
        let batch = random_matrix(rows, input_dim, 2.0, seed ^ 0xA5);
        prop_assume!(kink_margin(&net, &batch) > 1e-4);
        let labels = random_labels(rows, seed ^ 0x5A);
        let err = max_gradient_error(&net, &batch, &labels, 1e-6);
        prop_assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn forward_matches_index_loops(
        input_dim in 1usize..6,
        width in 1usize..8,
        out_dim in 1usize..4,
        rows in 1usize..8,
        linear in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let act = if linear { OutputActivation::Linear } else { OutputActivation::Sigmoid };
        let net = Mlp::init_weights(input_dim, width, out_dim, act, seed);
        let batch = random_matrix(rows, input_dim, 3.0, seed ^ 7);
        let fast = net.forward(&batch).unwrap();
        let slow = naive_forward(&net, &batch);
        for (r, row) in slow.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                prop_assert!((fast.get(r, c) - v).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn bce_matches_compensated_reference(n in 1usize..200, seed in any::<u64>()) {
        let mut r = rng(seed);
        let p: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let y = random_labels(n, seed ^ 3);
        let got = bce_loss(&p, &y).unwrap();
        let want = reference_bce(&p, &y);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn forward_is_bit_deterministic(seed in any::<u64>()) {
        let net = Mlp::init_weights(3, 5, 2, OutputActivation::Linear, seed);
        let batch = random_matrix(4, 3, 1.0, seed);
        prop_assert_eq!(net.forward(&batch).unwrap(), net.forward(&batch).unwrap());
    }
}

#[test]
fn half_probability_loss_is_ln_2() {
    let p = vec![0.5; 37];
    let y = random_labels(37, 1);
    assert!((bce_loss(&p, &y).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn gradient_check_on_a_wider_network() {
    let net = Mlp::init_weights(6, 12, 1, OutputActivation::Sigmoid, 99);
    let batch = random_matrix(10, 6, 1.5, 4);
    let labels = random_labels(10, 5);
    assert!(max_gradient_error(&net, &batch, &labels, 1e-6) < 1e-4);
}

#[test]
fn input_gradient_matches_central_differences() {
    let net = Mlp::init_weights(4, 6, 3, OutputActivation::Linear, 12);
    let batch = random_matrix(3, 4, 1.0, 13);
    let seed_grad = random_matrix(3, 3, 1.0, 14);
    let objective = |b: &Matrix| -> f64 {
        let out = net.forward(b).unwrap();
        out.as_slice().iter().zip(seed_grad.as_slice()).map(|(a, g)| a * g).sum()
    };
    let cache = net.forward_cached(&batch).unwrap();
    let analytic = net.backward(&cache, &seed_grad).unwrap().input;
    let h = 1e-6;
    for idx in 0..batch.as_slice().len() {
        let mut plus = batch.clone();
        plus.as_mut_slice()[idx] += h;
        let mut minus = batch.clone();
        minus.as_mut_slice()[idx] -= h;
        let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
        let a = analytic.as_slice()[idx];
        assert!((a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6) < 1e-4);
    }
}
