//! Harmonic measure at level n of a reduced tree conditioned to survive.
//!
//! cargo run --release --example harmonic_measure -- 1.5 64

use stablegw::electric::harmonic_measure;
use stablegw::gwtree::{sample_reduced_conditioned, TreeModel, DEFAULT_CAP};
use stablegw::rng::Streams;
use stablegw::stats;

fn main() -> stablegw::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let n: u32 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(64);
    let model = TreeModel::stable(alpha, 1.0 / alpha, n as usize)?;
    let s = Streams::new(3);

    let tree = sample_reduced_conditioned(&model, n, DEFAULT_CAP, &mut s.stream(0, 0, 0))?;
    let hm = harmonic_measure(&tree, n)?;
    let mut masses: Vec<f64> = hm.log_mass.iter().map(|&(_, l)| l.exp()).collect();
    masses.sort_by(|a, b| b.total_cmp(a));
    println!("reduced tree: {} vertices, {} leaves at level {n}", tree.len(), masses.len());
    println!("n * conductance from the root = {:.4}", n as f64 * hm.root_conductance);
    println!("total mass - 1 = {:.2e}", hm.log_total().exp_m1());
    println!("largest masses: {:?}", &masses[..masses.len().min(5)]);
    println!("-sum mu log mu = {:.4}   log #leaves = {:.4}", -hm.entropy_sum(), (masses.len() as f64).ln());

    // The mass is far from uniform: most leaves carry much less than 1/#leaves.
    let uniform = 1.0 / masses.len() as f64;
    let below = masses.iter().filter(|&&m| m < uniform).count();
    println!("leaves below the uniform mass: {below} of {}", masses.len());

    let nc: Vec<f64> = (0..200)
        .map(|r| {
            let t = sample_reduced_conditioned(&model, n, DEFAULT_CAP, &mut s.stream(1, r, 0))?;
            Ok(n as f64 * harmonic_measure(&t, n)?.root_conductance)
        })
        .collect::<stablegw::Result<_>>()?;
    let e = stats::mean_se(&nc);
    println!("E[n C_n] over 200 trees = {:.4} ± {:.4}", e.value, e.stderr);
    Ok(())
}
