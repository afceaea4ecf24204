//! Statistics of the backward size-biased spine: number of marked levels,
//! the Q_j averages and the hitting-probability recurrence.
//!
//! cargo run --release --example backward_spine -- 2.0

use stablegw::electric::{backward_stats, sample_skeleton};
use stablegw::gwtree::{sample_backward, sample_marked_levels, BackwardMode, TreeModel, DEFAULT_CAP};
use stablegw::offspring::{make_theta, size_bias};
use stablegw::rde::{self, RdeConfig};
use stablegw::rng::Streams;
use stablegw::stats;

fn main() -> stablegw::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let s = Streams::new(3);

    let model = TreeModel::stable(alpha, 1.0 / alpha, 10_000)?;
    let kn: Vec<f64> = (0..1000)
        .map(|r| sample_marked_levels(&model, 10_000, &mut s.stream(1, r, 0)).map(|m| m.len() as f64))
        .collect::<stablegw::Result<_>>()?;
    let kn = stats::mean_se(&kn);
    println!("k_n / log n at n = 10^4: {:.4} ± {:.4}  (limit {:.3})",
        kn.value / 1e4f64.ln(), kn.stderr / 1e4f64.ln(), alpha / (alpha - 1.0));

    let small = TreeModel::stable(alpha, 1.0 / alpha, 400)?;
    let bt = sample_backward(&small, 400, BackwardMode::Reduced, DEFAULT_CAP, &mut s.stream(2, 0, 0))?;
    let k = bt.k_n().saturating_sub(1).max(1);
    let exact = backward_stats(&bt, k)?;
    println!("exact tree, n = 400: k = {k}, recurrence residual {:.2e}", exact.recurrence_residual());

    let cfg = RdeConfig { readout: 100_000, ..RdeConfig::new(alpha) };
    let c_pool = rde::solve_c(&cfg, &s)?;
    let theta_hat = size_bias(&make_theta(alpha)?)?;
    let depth = 1000;
    let deep = TreeModel::stable(alpha, 1.0 / alpha, depth as usize)?;
    let mut q = Vec::new();
    let mut worst: f64 = 0.0;
    for r in 0..100 {
        let sk = sample_skeleton(&deep, &theta_hat, 201, depth, &c_pool.c, DEFAULT_CAP, &mut s.stream(4, r, 0))?;
        let st = sk.stats(200)?;
        q.push(st.q_average());
        worst = worst.max(st.recurrence_residual());
    }
    let q = stats::mean_se(&q);
    println!("(1/k) Σ Q_j at k = 200: {:.4} ± {:.4}; worst residual {:.2e}", q.value, q.stderr, worst);
    Ok(())
}
