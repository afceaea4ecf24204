#![allow(dead_code)]

use rand::Rng;
use stablegw::gwtree::Tree;

/// Solves a x = b by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Simple random walk from the root, absorbed at generation n. Returns the
/// absorption probability of every vertex at generation n, computed from
/// the Green function of the transient part. Dead ends reflect.
pub fn dense_hitting(tree: &Tree, n: u32) -> Vec<(u32, f64)> {
    let len = tree.len();
    let transient: Vec<u32> = (0..len as u32).filter(|&v| tree.generation(v) < n).collect();
    let mut index = vec![usize::MAX; len];
    for (i, &v) in transient.iter().enumerate() {
        index[v as usize] = i;
    }
    let m = transient.len();
    let neighbours = |v: u32| -> Vec<u32> {
        let mut nb: Vec<u32> = tree.children(v).collect();
        if let Some(p) = tree.parent(v) {
            nb.push(p);
        }
        nb
    };
    // Green function row of the root: g (I - P) = e_root, so (I - P)^T g^T = e_root.
    let mut a = vec![vec![0.0; m]; m];
    for (i, &v) in transient.iter().enumerate() {
        a[i][i] += 1.0;
        let nb = neighbours(v);
        let p = 1.0 / nb.len() as f64;
        for w in nb {
            let j = index[w as usize];
            if j != usize::MAX {
                a[j][i] -= p;
            }
        }
    }
    let mut e = vec![0.0; m];
    e[index[tree.root() as usize]] = 1.0;
    let g = solve_dense(a, e);
    let mut out = Vec::new();
    for v in 0..len as u32 {
        if tree.generation(v) != n {
            continue;
        }
        let p = tree.parent(v).unwrap();
        let deg = neighbours(p).len() as f64;
        out.push((v, g[index[p as usize]] / deg));
    }
    out
}

/// Effective conductance from the root to generation n by a dense solve of
/// the voltage problem, boundary grounded and root held at 1.
pub fn dense_conductance(tree: &Tree, n: u32) -> f64 {
    let len = tree.len();
    let inner: Vec<u32> = (0..len as u32).filter(|&v| v != tree.root() && tree.generation(v) < n).collect();
    let mut index = vec![usize::MAX; len];
    for (i, &v) in inner.iter().enumerate() {
        index[v as usize] = i;
    }
    let m = inner.len();
    let volt = if m == 0 {
        Vec::new()
    } else {
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        for (i, &v) in inner.iter().enumerate() {
            let mut nb: Vec<u32> = tree.children(v).collect();
            nb.push(tree.parent(v).unwrap());
            a[i][i] = nb.len() as f64;
            for w in nb {
                if w == tree.root() {
                    b[i] += 1.0;
                } else if tree.generation(w) < n {
                    a[i][index[w as usize]] -= 1.0;
                }
            }
        }
        solve_dense(a, b)
    };
    tree.children(tree.root())
        .map(|c| {
            if tree.generation(c) == n {
                1.0
            } else {
                1.0 - volt[index[c as usize]]
            }
        })
        .sum()
}

/// Tree from a parent list in which parents precede children.
pub fn tree_from(parents: &[Option<usize>]) -> (Tree, Vec<u32>) {
    Tree::from_parents(parents).unwrap()
}

/// root-(a,b); a-(aa); b-(ba,bb). Ids in input order: root 0, a 1, b 2,
/// aa 3, ba 4, bb 5.
pub fn five() -> (Tree, Vec<u32>) {
    tree_from(&[None, Some(0), Some(0), Some(1), Some(2), Some(2)])
}

pub fn path(n: usize) -> Tree {
    let parents: Vec<Option<usize>> = (0..=n).map(|i| i.checked_sub(1)).collect();
    tree_from(&parents).0
}

/// Random parent list of at most `depth` generations, each vertex having
/// 0..=max_kids children, with generation `depth` always reached.
pub fn random_parents<R: Rng>(depth: u32, max_kids: u32, max_len: usize, rng: &mut R) -> Vec<Option<usize>> {
    loop {
        let mut parents: Vec<Option<usize>> = vec![None];
        let mut gen = vec![0u32];
        let mut i = 0;
        let mut ok = true;
        while i < parents.len() {
            if gen[i] < depth {
                let k = rng.random_range(0..=max_kids);
                for _ in 0..k {
                    parents.push(Some(i));
                    gen.push(gen[i] + 1);
                }
            }
            if parents.len() > max_len {
                ok = false;
                break;
            }
            i += 1;
        }
        if ok && gen.iter().any(|&g| g == depth) {
            return parents;
        }
    }
}

/// Sorted masses, for comparisons that do not depend on vertex ids.
pub fn sorted_masses(xs: &[(u32, f64)]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.iter().map(|x| x.1).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Vertices of the subtree rooted at v, v first.
pub fn subtree(tree: &Tree, v: u32) -> Vec<u32> {
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        out.extend(tree.children(out[i]));
        i += 1;
    }
    out
}

/// Probability that simple random walk from `start`, confined to `space`
/// (closed under neighbours of its non-absorbing vertices), is absorbed in
/// a vertex satisfying `target`. Dense Gaussian elimination.
pub fn absorption(
    tree: &Tree,
    space: &[u32],
    start: u32,
    absorbing: impl Fn(u32) -> bool,
    target: impl Fn(u32) -> bool,
) -> f64 {
    if absorbing(start) {
        return if target(start) { 1.0 } else { 0.0 };
    }
    let free: Vec<u32> = space.iter().copied().filter(|&v| !absorbing(v)).collect();
    let mut index = std::collections::HashMap::new();
    for (i, &v) in free.iter().enumerate() {
        index.insert(v, i);
    }
    let m = free.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (i, &v) in free.iter().enumerate() {
        let mut nb: Vec<u32> = tree.children(v).collect();
        if let Some(p) = tree.parent(v) {
            nb.push(p);
        }
        let d = nb.len() as f64;
        a[i][i] = 1.0;
        for w in nb {
            if let Some(&j) = index.get(&w) {
                a[i][j] -= 1.0 / d;
            } else if absorbing(w) && target(w) {
                b[i] += 1.0 / d;
            } else {
                assert!(absorbing(w), "walk leaves the state space at {w}");
            }
        }
    }
    solve_dense(a, b)[index[&start]]
}
