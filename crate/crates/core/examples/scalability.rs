//! Scoring time per point as the training size and the dimension grow, with
//! the number of detectors fixed.
//!
//! cargo run --release --example scalability -- [n_test]

use gsaal::eval::{linear_r_squared, scalability_run, ScalabilityConfig, TimingRow};
use gsaal::io::render_table;

fn main() -> gsaal::Result<()> {
    let mut cfg = ScalabilityConfig::new(vec![250, 500, 1000, 2000], vec![25, 50, 100, 200], 42);
    cfg.n_test = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let rows = scalability_run(&cfg)?;
    let table: Vec<Vec<String>> = rows.iter().map(TimingRow::fields).collect();
    print!("{}", render_table(&TimingRow::HEADER, &table));

    let (by_n, by_d) = rows.split_at(cfg.n_values.len());
    let xs: Vec<f64> = by_n.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = by_n.iter().map(|r| r.per_point_seconds).collect();
    let ds: Vec<f64> = by_d.iter().map(|r| r.per_point_seconds).collect();
    let spread = ds.iter().copied().fold(f64::MIN, f64::max) / ds.iter().copied().fold(f64::MAX, f64::min);
    println!("R^2 of per-point time against n: {:.4}", linear_r_squared(&xs, &ys));
    println!("max/min per-point time across d: {spread:.3}");
    Ok(())
}
