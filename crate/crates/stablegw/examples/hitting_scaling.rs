//! Probability that the walk first reaches generation n at the marked tip of
//! a size-biased tree, and its decay exponent in n.
//!
//! cargo run --release --example hitting_scaling -- 2.0 500

use stablegw::electric::hit_prob_marked;
use stablegw::gwtree::{sample_size_biased_reduced, TreeModel, DEFAULT_CAP};
use stablegw::rng::Streams;
use stablegw::stats;

fn main() -> stablegw::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let reps: u64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(500);
    let ns = [16u32, 32, 64, 128, 256, 512];
    let model = TreeModel::stable(alpha, 1.0 / alpha, 512)?;
    let s = Streams::new(23);
    let (mut x, mut y, mut se) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &ns {
        let vals = (0..reps)
            .map(|r| Ok(-hit_prob_marked(&sample_size_biased_reduced(&model, n, DEFAULT_CAP, &mut s.stream(0, n as u64, r))?)?))
            .collect::<stablegw::Result<Vec<f64>>>()?;
        let e = stats::mean_se(&vals);
        println!("n = {n:4}: -log P = {:.4} ± {:.4}", e.value, e.stderr);
        x.push((n as f64).ln());
        y.push(e.value);
        se.push(e.stderr);
    }
    let fit = stats::wls(&x, &y, &se);
    println!("slope against log n: {:.4} ± {:.4}", fit.slope, fit.slope_stderr);
    println!("lower bound 1/(alpha-1) = {:.4}", 1.0 / (alpha - 1.0));
    Ok(())
}
