//! Linear-kernel MMD² between a three-feature population and the (1,1,0)
//! view of an independent draw. With x3 independent and centred the view
//! changes nothing in mean; with x3 = x1² it removes a unit-mean feature.
//!
//! cargo run --release --example myopicity -- [n] [seed]

use gsaal::datagen::myopicity_test;

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> gsaal::Result<()> {
    let n = arg(1, 2000) as usize;
    let seed = arg(2, 42);
    for n in [n / 10, n, n * 10] {
        let r = myopicity_test(n, seed)?;
        println!("n {n:>6}: myopic {:.6}  x3 = x1^2 {:.6}  ratio {:.1}", r.myopic, r.control, r.control / r.myopic);
    }
    Ok(())
}
