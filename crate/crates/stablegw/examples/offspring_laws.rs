//! The stable offspring families: point masses, generating functions,
//! survival probabilities and heavy-tailed sampling.
//!
//! cargo run --release --example offspring_laws

use stablegw::offspring::{make_stable_rho, make_theta, size_bias, survival_probs};
use stablegw::rng::Streams;
use stablegw::stats;

fn main() -> stablegw::Result<()> {
    let theta = make_theta(1.5)?;
    println!("theta_1.5");
    for k in 0..6 {
        println!("  p({k}) = {:.12}", theta.pmf(k));
    }
    let r = 0.4;
    println!(
        "  gf(0.4) closed form {:.12}, by summation {:.12}",
        theta.gf(r),
        theta.gf_by_summation(r, 200_000)
    );
    let hat = size_bias(&theta)?;
    println!("  size-biased mean of k-1 is infinite: tail(10^6) = {:.3e}", hat.tail(1_000_000));

    // The gamma family at alpha = 2 is critical with variance 2 gamma.
    let rho = make_stable_rho(2.0, 0.5)?;
    let q = survival_probs(&rho, 1000)?;
    for n in [10, 100, 1000] {
        println!("rho_(2,1/2): n q_n at n = {n:4}: {:.5}", n as f64 * q.q(n));
    }

    // Hill estimate of the tail index from samples.
    let mut rng = Streams::new(5).stream(0, 0, 0);
    for alpha in [1.2, 1.5, 1.8] {
        let law = make_theta(alpha)?;
        let xs: Vec<f64> = (0..200_000).map(|_| law.sample(&mut rng) as f64).collect();
        let mean = stats::mean(&xs);
        println!(
            "theta_{alpha}: sample mean {mean:.3}, Hill tail index {:.3} (exact {:.1}), max {:.3e}",
            stats::hill(&xs, 2000),
            alpha,
            xs.iter().cloned().fold(0.0, f64::max)
        );
    }
    Ok(())
}
