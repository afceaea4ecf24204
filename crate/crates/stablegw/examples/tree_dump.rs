//! Sampling, dumping, parsing and reducing a conditioned tree.
//!
//! cargo run --release --example tree_dump -- 1.5 6

use stablegw::gwtree::{reduce, sample_conditioned, Tree, TreeModel, DEFAULT_CAP};
use stablegw::rng::Streams;

fn main() -> stablegw::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let n: u32 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(6);
    let model = TreeModel::stable(alpha, 1.0 / alpha, n as usize)?;
    let tree = sample_conditioned(&model, n, DEFAULT_CAP, &mut Streams::new(2).stream(0, 0, 0))?;
    println!("conditioned tree, level sizes {:?}", tree.level_sizes());

    let reduced = reduce(&tree, n)?;
    println!("reduced to level {n}, level sizes {:?}", reduced.level_sizes());

    let mut text = Vec::new();
    reduced.dump(&mut text)?;
    let text = String::from_utf8(text).expect("ascii");
    println!("id parent generation");
    print!("{text}");
    let back = Tree::parse_dump(&text)?;
    assert_eq!(back.level_sizes(), reduced.level_sizes());
    println!("parsed back: {} vertices", back.len());
    Ok(())
}
