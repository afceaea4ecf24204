//! Ergodic averages along the spine of the size-biased continuous tree.
//!
//! cargo run --release --example spine_averages -- 2.0 200 20

use stablegw::contree::{sample_spine_averages, SpineConfig};
use stablegw::rng::Streams;
use stablegw::stats;

fn main() -> stablegw::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let n: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(200);
    let reps: u64 = args.get(3).and_then(|a| a.parse().ok()).unwrap_or(20);
    let cfg = SpineConfig::new(alpha, n);
    let s = Streams::new(11);
    let runs = (0..reps)
        .map(|r| sample_spine_averages(&cfg, &mut s.stream(0, r, 0)))
        .collect::<stablegw::Result<Vec<_>>>()?;
    let col = |f: fn(&stablegw::contree::SpineAverages) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let h = stats::mean_se(&col(|a| a.h));
    let f = stats::mean_se(&col(|a| a.f));
    let g = stats::mean_se(&col(|a| a.g));
    println!("H_n/n = {:.4} ± {:.4}   (limit {:.4})", h.value, h.stderr, (alpha - 1.0) / alpha);
    println!("F_n/n = {:.4} ± {:.4}   (limit {:.4})", f.value, f.stderr, -1.0 / alpha);
    println!("G_n/n = {:.4} ± {:.4}", g.value, g.stderr);
    println!("-G_n/H_n = {:.4}", -g.value / h.value);
    let lo = stats::mean(&col(|a| a.g_lower));
    let hi = stats::mean(&col(|a| a.g_upper));
    println!("bound interval for -G_n/H_n: [{:.4}, {:.4}]", -hi / h.value, -lo / h.value);
    println!("largest graft bound gap: {:.3e}", runs.iter().map(|a| a.max_gap).fold(0.0, f64::max));
    Ok(())
}
