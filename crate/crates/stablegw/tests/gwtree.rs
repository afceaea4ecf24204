mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stablegw::electric::hit_prob_marked;
use stablegw::gwtree::{
    reduce, sample_backward, sample_conditioned, sample_gw_truncated, sample_marked_levels,
    sample_reduced_conditioned, sample_size_biased, sample_size_biased_reduced, BackwardMode,
    SizeBiased, Tree, TreeModel,
};
use stablegw::rng::Streams;
use stablegw::stats;
use stablegw::Error;

const CAP: usize = 1 << 22;

fn binary() -> TreeModel {
    TreeModel::stable(2.0, 0.5, 200).unwrap()
}

fn proportion_ok(hits: usize, n: usize, p: f64) -> bool {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() < 4.0 * se
}

#[test]
fn plain_tree_events() {
    let m = binary();
    let s = Streams::new(40);
    let mut rng = s.stream(0, 0, 0);
    let n = 1_000_000;
    let (mut single, mut tall) = (0, 0);
    for _ in 0..n {
        let t = sample_gw_truncated(&m, 3, CAP, &mut rng).unwrap();
        single += (t.len() == 1) as usize;
        tall += (t.height() >= 3) as usize;
    }
    assert!(proportion_ok(single, n, 0.5));
    assert!(proportion_ok(tall, n, 0.3046875));
}

#[test]
fn budget_of_one_overflows_on_any_birth() {
    let m = binary();
    let mut rng = Streams::new(41).stream(0, 0, 0);
    let n = 100_000;
    let over = (0..n)
        .filter(|_| matches!(sample_gw_truncated(&m, 3, 1, &mut rng), Err(Error::Overflow { .. })))
        .count();
    assert!(proportion_ok(over, n, 0.5));
}

#[test]
fn conditioned_binary_small_n() {
    let m = binary();
    let mut rng = Streams::new(42).stream(0, 0, 0);
    for _ in 0..1000 {
        let t = sample_conditioned(&m, 1, CAP, &mut rng).unwrap();
        assert_eq!(t.n_children(t.root()), 2);
    }
    let n = 100_000;
    let both = (0..n)
        .filter(|_| {
            let t = sample_conditioned(&m, 2, CAP, &mut rng).unwrap();
            t.children(t.root())
                .filter(|&c| t.children(c).count() > 0)
                .count()
                == 2
        })
        .count();
    assert!(proportion_ok(both, n, 1.0 / 3.0));
}

fn level_histogram(sizes: impl Iterator<Item = u64>, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for s in sizes {
        h[(s as usize).min(bins - 1)] += 1;
    }
    h
}

#[test]
fn conditioned_matches_rejection() {
    let m = TreeModel::stable(1.5, 2.0 / 3.0, 10).unwrap();
    let s = Streams::new(43);
    let draws = 100_000;
    let mut rng = s.stream(0, 0, 0);
    let direct = level_histogram(
        (0..draws).map(|_| sample_conditioned(&m, 2, CAP, &mut rng).unwrap().level(2).len() as u64),
        12,
    );
    let mut rng = s.stream(1, 0, 0);
    let mut kept = Vec::with_capacity(draws);
    while kept.len() < draws {
        let t = sample_gw_truncated(&m, 2, CAP, &mut rng).unwrap();
        if t.height() >= 2 {
            kept.push(t.level(2).len() as u64);
        }
    }
    let rejection = level_histogram(kept.into_iter(), 12);
    let p = stats::chi_square_two_sample(&direct, &rejection);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn reduced_conditioned_matches_reduction() {
    let m = TreeModel::stable(1.5, 2.0 / 3.0, 10).unwrap();
    let s = Streams::new(44);
    let draws = 50_000;
    let mut rng = s.stream(0, 0, 0);
    let direct = level_histogram(
        (0..draws).map(|_| sample_reduced_conditioned(&m, 4, CAP, &mut rng).unwrap().len() as u64),
        30,
    );
    let mut rng = s.stream(1, 0, 0);
    let via = level_histogram(
        (0..draws).map(|_| {
            let t = sample_conditioned(&m, 4, CAP, &mut rng).unwrap();
            reduce(&t, 4).unwrap().len() as u64
        }),
        30,
    );
    let p = stats::chi_square_two_sample(&direct, &via);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn size_biased_level_mean() {
    // E[Z_3 under size-biasing] = E[Z_3^2] = 1 + 3 for critical binary branching.
    let m = binary();
    let mut rng = Streams::new(45).stream(0, 0, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            let t = sample_size_biased(&m, 3, SizeBiased::Truncated, CAP, &mut rng).unwrap();
            t.level(3).len() as f64
        })
        .collect();
    let e = stats::mean_se(&xs);
    assert!((e.value - 4.0).abs() < 4.0 * e.stderr, "{e:?}");

    // Cross-check against rejection: plain trees weighted by Z_3.
    let mut rng = Streams::new(46).stream(0, 0, 0);
    let (mut num, mut den) = (0.0, 0.0);
    let mut sq = Vec::new();
    for _ in 0..400_000 {
        let z = sample_gw_truncated(&m, 3, CAP, &mut rng).unwrap().level(3).len() as f64;
        num += z * z;
        den += z;
        sq.push(z * z);
    }
    let ratio = num / den;
    let se = stats::mean_se(&sq).stderr * 400_000.0 / den;
    assert!((ratio - e.value).abs() < 4.0 * (se * se + e.stderr * e.stderr).sqrt());
}

#[test]
fn binary_spine_shape() {
    let m = binary();
    let mut rng = Streams::new(47).stream(0, 0, 0);
    for _ in 0..200 {
        let t = sample_size_biased(&m, 6, SizeBiased::Truncated, CAP, &mut rng).unwrap();
        let spine = t.spine().unwrap().to_vec();
        assert_eq!(spine.len(), 7);
        for &v in &spine[..6] {
            assert_eq!(t.n_children(v), 2);
        }
        assert_eq!(t.mark(), Some(spine[6]));
        assert_eq!(t.generation(spine[6]), 6);
    }
    let mut seen = [0usize; 2];
    for _ in 0..20_000 {
        let t = sample_size_biased(&m, 1, SizeBiased::Truncated, CAP, &mut rng).unwrap();
        assert_eq!(t.len(), 3);
        seen[(t.mark().unwrap() - 1) as usize] += 1;
    }
    assert!(proportion_ok(seen[0], 20_000, 0.5));
}

#[test]
fn backward_matches_size_biased() {
    let m = TreeModel::stable(1.5, 2.0 / 3.0, 10).unwrap();
    let s = Streams::new(48);
    let n = 4;
    let draws = 40_000;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut ha, mut hb) = (Vec::new(), Vec::new());
    // Growth is monotone in both samplers, so an overflow means the reduced
    // tree exceeds the budget; skipping those draws conditions both on size.
    let cap = 1 << 14;
    let mut rng = s.stream(0, 0, 0);
    while a.len() < draws {
        match sample_backward(&m, n, BackwardMode::Reduced, cap, &mut rng) {
            Ok(bt) => {
                a.push(-hit_prob_marked(&bt.tree).unwrap());
                ha.push(bt.tree.level(n).len() as u64);
            }
            Err(Error::Overflow { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let mut rng = s.stream(1, 0, 0);
    while b.len() < draws {
        match sample_size_biased_reduced(&m, n, cap, &mut rng) {
            Ok(t) => {
                b.push(-hit_prob_marked(&t).unwrap());
                hb.push(t.level(n).len() as u64);
            }
            Err(Error::Overflow { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let ks = stats::ks_two_sample(&a, &b);
    assert!(ks.p_value > 0.01, "{ks:?}");
    let p = stats::chi_square_two_sample(&level_histogram(ha.into_iter(), 25), &level_histogram(hb.into_iter(), 25));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn marked_level_frequency() {
    // At alpha = 2 a level j is marked with probability q_{j-1}.
    let m = binary();
    let s = Streams::new(49);
    let runs = 200_000;
    let hits = (0..runs)
        .filter(|&r| sample_marked_levels(&m, 100, &mut s.stream(0, r as u64, 0)).unwrap().contains(&100))
        .count();
    let p = m.q(99);
    assert!((p - 0.02).abs() < 0.002);
    assert!(proportion_ok(hits, runs, p));
}

#[test]
fn reduce_examples() {
    let p = common::path(5);
    let r = reduce(&p, 5).unwrap();
    assert_eq!(r.len(), 6);
    assert_eq!(r.level_sizes(), p.level_sizes());

    // root-(a,b), a-(aa), b a leaf: b is pruned at n = 2.
    let (t, map) = common::tree_from(&[None, Some(0), Some(0), Some(1)]);
    let r = reduce(&t, 2).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(r.level_sizes(), vec![1, 1, 1]);
    assert_eq!(t.generation(map[3]), 2);
    assert!(matches!(reduce(&t, 3), Err(Error::TooShallow { .. })));
}

#[test]
fn dump_round_trip() {
    let m = TreeModel::stable(1.5, 2.0 / 3.0, 10).unwrap();
    let t = sample_conditioned(&m, 6, CAP, &mut Streams::new(50).stream(0, 0, 0)).unwrap();
    let mut buf = Vec::new();
    t.dump(&mut buf).unwrap();
    let back = Tree::parse_dump(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.len(), t.len());
    assert_eq!(back.level_sizes(), t.level_sizes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_keeps_exactly_the_ancestors(seed in any::<u64>(), depth in 1u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parents = common::random_parents(depth, 3, 400, &mut rng);
        let (t, _) = common::tree_from(&parents);
        let r = reduce(&t, depth).unwrap();
        // Direct scan: a vertex is kept iff one of its descendants sits at `depth`.
        let mut has = vec![false; t.len()];
        for v in (0..t.len() as u32).rev() {
            if t.generation(v) == depth || t.children(v).any(|c| has[c as usize]) {
                has[v as usize] = true;
            }
        }
        let kept = has.iter().zip(0..).filter(|(h, v)| **h && t.generation(*v) <= depth).count();
        prop_assert_eq!(r.len(), kept);
        for v in 0..r.len() as u32 {
            if r.n_children(v) == 0 {
                prop_assert_eq!(r.generation(v), depth);
            }
        }
        prop_assert!(r.is_reduced(depth));
        let rr = reduce(&r, depth).unwrap();
        prop_assert_eq!(rr.level_sizes(), r.level_sizes());
        prop_assert_eq!(rr.len(), r.len());
    }

    #[test]
    fn conditioned_trees_reach_n(seed in any::<u64>(), n in 1u32..12, alpha in 1.2f64..=2.0) {
        let m = TreeModel::stable(alpha, 1.0 / alpha, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match sample_reduced_conditioned(&m, n, 1 << 16, &mut rng) {
            Ok(t) => {
                prop_assert!(t.is_reduced(n));
                prop_assert!(t.level(n).len() >= 1);
            }
            Err(Error::Overflow { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
