//! When x3 is independent of (x1, x2), the average of subspace marginals over
//! the single mask (1,1,0) is exactly the joint mass of (x1, x2). Adding the
//! x3 mask mixes in a different quantity.
//!
//! cargo run --example marginal_statistic

use gsaal::subspace::{averaged_marginal_statistic, marginal_pdf, DiscreteDistribution, SubspaceMask};

fn main() -> gsaal::Result<()> {
    // (x1, x2) on three cells, x3 independent on {0, 1}
    let head = [((0, 0), 0.5), ((0, 1), 0.3), ((1, 1), 0.2)];
    let tail = [0.6, 0.4];
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for ((a, b), p) in head {
        for (c, q) in tail.iter().enumerate() {
            support.push(vec![a, b, c as i64]);
            probs.push(p * q);
        }
    }
    let dist = DiscreteDistribution::new(support, probs)?;

    let front = SubspaceMask::parse("110")?;
    let back = SubspaceMask::parse("001")?;
    println!("point       p(x1,x2)  stat[110]  stat[110,001]");
    for x in dist.support() {
        let joint = marginal_pdf(&dist, &front, &x[..2])?;
        let one = averaged_marginal_statistic(&dist, std::slice::from_ref(&front), x)?;
        let two = averaged_marginal_statistic(&dist, &[front.clone(), back.clone()], x)?;
        println!("{x:?}   {joint:.4}    {one:.4}     {two:.4}");
    }
    Ok(())
}
