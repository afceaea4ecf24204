//! Solves the conductance equations at one α and prints the λ estimators.
//!
//! cargo run --release --example rde_solve -- 1.5

use stablegw::rde::{self, RdeConfig};
use stablegw::rng::Streams;

fn main() -> stablegw::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let cfg = RdeConfig {
        readout: 200_000,
        ..RdeConfig::new(alpha)
    };
    let t = std::time::Instant::now();
    let sol = rde::solve_all(&cfg, &Streams::new(7))?;
    println!("alpha = {alpha}, pool = {}, iterations = {}", cfg.pool, cfg.iters);
    for l in &sol.lambdas {
        println!("{:>16}  {:.5} ± {:.5}", l.method.name(), l.lambda, l.stderr);
    }
    println!("1/(alpha-1)      {:.5}", 1.0 / (alpha - 1.0));
    let disp = &sol.chat.displacement;
    println!("last displacement of the Ĉ pool: {:.2e}", disp[disp.len() - 1]);
    let fit = rde::fit_a0(&sol.chat, 50);
    println!("A_0 = {:.4}, sup residual {:.4}", fit.a0, fit.sup_residual);
    eprintln!("{:.1?}", t.elapsed());
    Ok(())
}
