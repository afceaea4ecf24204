//! Conductance bounds for truncated continuous trees. Deeper truncations of
//! the same random tree tighten the bracket.
//!
//! cargo run --release --example continuous_bounds -- 1.5

use stablegw::contree::{build, conductance_bounds, Coordinates};
use stablegw::rng::Streams;

fn main() -> stablegw::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let s = Streams::new(17);
    println!("depth  vertices  truncated  lower       upper       gap");
    for depth in [2, 4, 6, 8, 10, 12] {
        let tree = build(alpha, depth, Coordinates::Delta, 5_000_000, &mut s.stream(0, 0, 0))?;
        let b = conductance_bounds(&tree);
        println!(
            "{depth:5}  {:8}  {:9}  {:.8}  {:.8}  {:.2e}",
            tree.len(),
            tree.truncated().count(),
            b.lower,
            b.upper,
            b.gap()
        );
    }
    let tree = build(alpha, 10, Coordinates::Gamma, 5_000_000, &mut s.stream(0, 0, 0))?;
    println!("generation martingale at depth 10: {:.5}", tree.generation_martingale());
    Ok(())
}
