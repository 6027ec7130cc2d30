//! The network engine on its own: fit a sigmoid classifier to two Gaussian
//! blobs with plain SGD, and compare one analytic gradient entry against a
//! central finite difference along the way.
//!
//! cargo run --release --example network_training

use gsaal::nn::{bce_grad, bce_loss, Direction, Mlp, OutputActivation, SgdConfig};
use gsaal::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn loss(net: &Mlp, x: &Matrix, y: &[f64]) -> gsaal::Result<f64> {
    bce_loss(net.forward(x)?.as_slice(), y)
}

fn main() -> gsaal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 400;
    let x = Matrix::from_fn(n, 2, |r, _| {
        let centre = if r % 2 == 0 { -1.5 } else { 1.5 };
        let z: f64 = StandardNormal.sample(&mut rng);
        centre + z
    });
    let y: Vec<f64> = (0..n).map(|r| (r % 2) as f64).collect();

    let mut net = Mlp::init_weights(2, 8, 1, OutputActivation::Sigmoid, 7);
    let sgd = SgdConfig { learning_rate: 0.5, batch_size: n, seed: 7 };
    for step in 0..=300 {
        let cache = net.forward_cached(&x)?;
        let grad = Matrix::from_vec(n, 1, bce_grad(cache.output().as_slice(), &y)?)?;
        let back = net.backward(&cache, &grad)?;
        if step % 100 == 0 {
            let h = 1e-6;
            let mut plus = net.clone();
            plus.layers_mut()[0].as_mut_slice()[0] += h;
            let mut minus = net.clone();
            minus.layers_mut()[0].as_mut_slice()[0] -= h;
            let numeric = (loss(&plus, &x, &y)? - loss(&minus, &x, &y)?) / (2.0 * h);
            let analytic = back.weights.layers[0].as_slice()[0];
            println!(
                "step {step:>3}: loss {:.4}  dL/dw[0][0] analytic {analytic:+.6e} numeric {numeric:+.6e}",
                loss(&net, &x, &y)?
            );
        }
        net.sgd_step(&back.weights, &sgd, Direction::Descend)?;
    }

    let p = net.forward(&x)?;
    let correct = p.as_slice().iter().zip(&y).filter(|(p, y)| (**p > 0.5) == (**y > 0.5)).count();
    println!("training accuracy {:.3}", correct as f64 / n as f64);
    Ok(())
}
