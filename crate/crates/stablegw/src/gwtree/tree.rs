use std::io::Write;
use std::ops::Range;

use crate::error::{Error, Result};

pub const NONE: u32 = u32::MAX;

/// Default node budget for samplers.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Finite rooted tree stored as an arena in breadth-first order.
///
/// Vertex 0 is the root, generations are nondecreasing in the id and the
/// children of every vertex occupy a contiguous id range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<u32>,
    generation: Vec<u32>,
    first_child: Vec<u32>,
    n_children: Vec<u32>,
    mark: Option<u32>,
    spine: Option<Vec<u32>>,
}

impl Tree {
    /// The one-vertex tree.
    pub fn singleton() -> Tree {
        Tree {
            parent: vec![NONE],
            generation: vec![0],
            first_child: vec![1],
            n_children: vec![0],
            mark: None,
            spine: None,
        }
    }

    /// Builds a tree from a parent list (`None` for the root), relabelling the
    /// vertices breadth-first. Returns the tree and the map old id -> new id.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<(Tree, Vec<u32>)> {
        let n = parents.len();
        let roots: Vec<usize> = (0..n).filter(|&v| parents[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let mut kids = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::InvalidParameter(format!("parent {p} out of range")));
                }
                kids[p].push(v);
            }
        }
        let mut b = TreeBuilder::new(n.max(1));
        let mut order = vec![roots[0]];
        let mut map = vec![NONE; n];
        map[roots[0]] = 0;
        let mut head = 0;
        while head < order.len() {
            let old = order[head];
            let range = b.expand(head as u32, kids[old].len() as u64)?;
            for (new, &c) in range.zip(&kids[old]) {
                map[c] = new;
                order.push(c);
            }
            head += 1;
        }
        if order.len() != n {
            return Err(Error::InvalidParameter("parent list contains a cycle".into()));
        }
        Ok((b.finish(), map))
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != NONE).then_some(p)
    }

    pub fn children(&self, v: u32) -> Range<u32> {
        let f = self.first_child[v as usize];
        f..f + self.n_children[v as usize]
    }

    pub fn n_children(&self, v: u32) -> u32 {
        self.n_children[v as usize]
    }

    pub fn generation(&self, v: u32) -> u32 {
        self.generation[v as usize]
    }

    pub fn height(&self) -> u32 {
        *self.generation.last().unwrap_or(&0)
    }

    /// Ids of the vertices at generation g (a contiguous range).
    pub fn level(&self, g: u32) -> Range<u32> {
        let lo = self.generation.partition_point(|&x| x < g) as u32;
        let hi = self.generation.partition_point(|&x| x <= g) as u32;
        lo..hi
    }

    /// Number of vertices in every generation 0..=height.
    pub fn level_sizes(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.height() as usize + 1];
        for &g in &self.generation {
            out[g as usize] += 1;
        }
        out
    }

    pub fn mark(&self) -> Option<u32> {
        self.mark
    }

    pub fn set_mark(&mut self, v: Option<u32>) {
        self.mark = v;
    }

    pub fn spine(&self) -> Option<&[u32]> {
        self.spine.as_deref()
    }

    pub fn set_spine(&mut self, spine: Option<Vec<u32>>) {
        self.spine = spine;
    }

    /// True when every leaf sits at generation n and nothing lies beyond it.
    pub fn is_reduced(&self, n: u32) -> bool {
        self.height() == n
            && (0..self.len() as u32).all(|v| self.n_children(v) > 0 || self.generation(v) == n)
    }

    /// Height of the subtree below every vertex.
    pub fn subtree_heights(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.len()];
        for v in (1..self.len()).rev() {
            let p = self.parent[v] as usize;
            h[p] = h[p].max(h[v] + 1);
        }
        h
    }

    /// Writes one line "id parent generation" per vertex, parent -1 for the root.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in 0..self.len() {
            let p = self.parent[v];
            if p == NONE {
                writeln!(w, "{} -1 {}", v, self.generation[v])?;
            } else {
                writeln!(w, "{} {} {}", v, p, self.generation[v])?;
            }
        }
        Ok(())
    }

    /// Parses the format written by [`Tree::dump`].
    pub fn parse_dump(text: &str) -> Result<Tree> {
        let mut parents = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidParameter(format!("malformed dump line {}", lineno + 1));
            if f.len() != 3 {
                return Err(bad());
            }
            let id: usize = f[0].parse().map_err(|_| bad())?;
            if id != parents.len() {
                return Err(bad());
            }
            let p: i64 = f[1].parse().map_err(|_| bad())?;
            parents.push(if p < 0 { None } else { Some(p as usize) });
        }
        Ok(Tree::from_parents(&parents)?.0)
    }
}

/// Incremental breadth-first construction.
///
/// Vertices must be expanded in increasing id order; a vertex that is never
/// expanded is a leaf.
#[derive(Debug)]
pub struct TreeBuilder {
    tree: Tree,
    cap: usize,
    next: u32,
}

impl TreeBuilder {
    pub fn new(cap: usize) -> TreeBuilder {
        TreeBuilder {
            tree: Tree::singleton(),
            cap,
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn generation(&self, v: u32) -> u32 {
        self.tree.generation[v as usize]
    }

    /// Attaches `k` children to `v`, failing when the budget would be exceeded.
    pub fn expand(&mut self, v: u32, k: u64) -> Result<Range<u32>> {
        assert!(v >= self.next, "vertices must be expanded in id order");
        self.next = v + 1;
        let t = &mut self.tree;
        let start = t.len() as u64;
        if start + k > self.cap as u64 {
            return Err(Error::Overflow { cap: self.cap });
        }
        let g = t.generation[v as usize] + 1;
        t.first_child[v as usize] = start as u32;
        t.n_children[v as usize] = k as u32;
        for _ in 0..k {
            t.parent.push(v);
            t.generation.push(g);
            t.first_child.push(0);
            t.n_children.push(0);
        }
        Ok(start as u32..(start + k) as u32)
    }

    pub fn finish(mut self) -> Tree {
        let n = self.tree.len() as u32;
        for v in 0..self.tree.len() {
            if self.tree.n_children[v] == 0 {
                self.tree.first_child[v] = n;
            }
        }
        self.tree
    }
}

/// The reduced tree: vertices with at least one descendant at generation n.
/// The mark and the spine are carried over when they survive.
pub fn reduce(tree: &Tree, n: u32) -> Result<Tree> {
    if tree.height() < n {
        return Err(Error::TooShallow {
            height: tree.height(),
            target: n,
        });
    }
    let len = tree.len();
    let mut keep = vec![false; len];
    for v in (0..len).rev() {
        let g = tree.generation[v];
        if g == n {
            keep[v] = true;
        }
        if keep[v] && g > 0 && g <= n {
            keep[tree.parent[v] as usize] = true;
        }
    }
    let mut b = TreeBuilder::new(len);
    let mut map = vec![NONE; len];
    map[0] = 0;
    let mut order = vec![0u32];
    let mut head = 0;
    while head < order.len() {
        let old = order[head];
        if tree.generation(old) < n {
            let kept: Vec<u32> = tree.children(old).filter(|&c| keep[c as usize]).collect();
            let range = b.expand(head as u32, kept.len() as u64)?;
            for (new, c) in range.zip(kept) {
                map[c as usize] = new;
                order.push(c);
            }
        }
        head += 1;
    }
    let mut out = b.finish();
    out.mark = tree.mark.and_then(|m| {
        let m = map[m as usize];
        (m != NONE).then_some(m)
    });
    out.spine = tree.spine.as_ref().map(|s| {
        s.iter()
            .map(|&v| map[v as usize])
            .filter(|&v| v != NONE)
            .collect()
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five() -> Tree {
        // root-(a,b), a-(aa), b-(ba,bb)
        Tree::from_parents(&[None, Some(0), Some(0), Some(1), Some(2), Some(2)])
            .unwrap()
            .0
    }

    #[test]
    fn builder_keeps_children_contiguous() {
        let t = five();
        assert_eq!(t.children(0), 1..3);
        assert_eq!(t.children(1), 3..4);
        assert_eq!(t.children(2), 4..6);
        assert_eq!(t.level_sizes(), vec![1, 2, 3]);
        assert!(t.is_reduced(2));
    }

    #[test]
    fn reduce_prunes_dead_branch() {
        let (t, _) = Tree::from_parents(&[None, Some(0), Some(0), Some(1)]).unwrap();
        let r = reduce(&t, 2).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.level_sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn reduce_rejects_shallow_tree() {
        assert!(reduce(&Tree::singleton(), 1).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let t = five();
        let mut buf = Vec::new();
        t.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("0 -1 0\n1 0 1\n"));
        assert_eq!(Tree::parse_dump(&text).unwrap(), t);
    }

    #[test]
    fn overflow_is_signalled() {
        let mut b = TreeBuilder::new(3);
        assert!(b.expand(0, 2).is_ok());
        assert_eq!(b.expand(1, 1), Err(Error::Overflow { cap: 3 }));
    }
}
