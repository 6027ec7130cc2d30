//! Exact kNN and LOF scores in novelty mode: fitted on one sample, applied to
//! queries at growing distance from it.
//!
//! cargo run --example baselines

use gsaal::baselines::{KnnModel, LofModel, KNN_DEFAULT_K, LOF_DEFAULT_K};
use gsaal::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gsaal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train = Matrix::from_fn(500, 2, |_, _| rng.random_range(0.0..1.0));
    let knn = KnnModel::new(train.clone(), KNN_DEFAULT_K)?;
    let lof = LofModel::new(train, LOF_DEFAULT_K)?;

    let offsets = [0.0, 0.5, 0.75, 1.0, 2.0, 5.0];
    let queries = Matrix::from_fn(offsets.len(), 2, |r, c| if c == 0 { 0.5 + offsets[r] } else { 0.5 });
    let k_scores = knn.score(&queries)?;
    let l_scores = lof.score(&queries)?;
    println!("x1 offset  knn distance  lof");
    for ((o, k), l) in offsets.iter().zip(k_scores).zip(l_scores) {
        println!("{o:>9.2}  {k:>12.4}  {l:>6.3}");
    }
    Ok(())
}
