//! Saving a trained model to JSON and loading it back gives the same scores
//! bit for bit.
//!
//! cargo run --release --example persistence

use gsaal::datagen::{generate_shape, Shape, ShapeSpec};
use gsaal::gsaal::{fit, load_model, save_model, TrainConfig};
use gsaal::subspace::{default_k, draw_masks};

fn main() -> gsaal::Result<()> {
    let data = generate_shape(&ShapeSpec::new(Shape::Spiral, 300, 5));
    let masks = draw_masks(data.dim(), default_k(data.dim()), 5)?;
    let (model, _) = fit(&data.points, &masks, &TrainConfig::with_epochs(20, 5))?;

    let path = std::env::temp_dir().join("gsaal_spiral_model.json");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;

    let before = model.score(&data.points)?;
    let after = loaded.score(&data.points)?;
    let identical = before.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits());
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("{} ({bytes} bytes): d {}, k {}, n_train {}", path.display(), loaded.dim(), loaded.k(), loaded.n_train());
    println!("scores identical after reload: {identical}");
    Ok(())
}
