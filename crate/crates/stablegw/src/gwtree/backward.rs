use rand::Rng;

use super::sample::{binomial, sample_gw, sample_reduced_conditioned, TreeModel};
use super::tree::Tree;
use crate::error::{Error, Result};

/// Which grafts to keep on the backward spine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackwardMode {
    /// Every grafted tree, complete.
    Full,
    /// Only the grafts reaching generation 0, as reduced trees.
    Reduced,
}

/// Backward size-biased tree truncated at spine depth n.
///
/// The arena is rooted at u_n; spine vertex u_j sits at arena generation
/// n - j, so generation 0 of the backward picture is arena generation n and
/// the mark is u_0.
#[derive(Debug, Clone)]
pub struct BackwardTree {
    pub tree: Tree,
    pub n: u32,
    /// Offspring count of u_j (index 0 unused).
    pub nhat: Vec<u64>,
    /// Number of grafts at u_j reaching generation 0.
    pub reaching: Vec<u64>,
    /// Spine depths with at least one reaching graft, increasing.
    pub m: Vec<u32>,
    /// Gaps L_k = M_k - M_{k-1}, M_0 = 0.
    pub l: Vec<u32>,
}

impl BackwardTree {
    /// Arena id of the spine vertex u_j.
    pub fn u(&self, j: u32) -> u32 {
        let spine = self.tree.spine().expect("backward tree has a spine");
        spine[(self.n - j) as usize]
    }

    /// Number of marked levels up to depth n.
    pub fn k_n(&self) -> usize {
        self.m.len()
    }
}

/// Samples the spine u_0, ..., u_n from the tip upwards: u_j has N̂_j children,
/// one of them u_{j-1}, the other N̂_j - 1 rooting independent GW trees.
pub fn sample_backward<R: Rng + ?Sized>(
    model: &TreeModel,
    n: u32,
    mode: BackwardMode,
    cap: usize,
    rng: &mut R,
) -> Result<BackwardTree> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if mode == BackwardMode::Reduced {
        model.check_horizon(n)?;
    }
    let nn = n as usize;
    let mut parents: Vec<Option<usize>> = (0..=nn)
        .map(|j| if j < nn { Some(j + 1) } else { None })
        .collect();
    let mut nhat = vec![0u64; nn + 1];
    let mut reaching = vec![0u64; nn + 1];
    let graft = |parents: &mut Vec<Option<usize>>, at: usize, t: &Tree| -> Result<()> {
        if parents.len() + t.len() > cap {
            return Err(Error::Overflow { cap });
        }
        let off = parents.len();
        parents.push(Some(at));
        for v in 1..t.len() as u32 {
            parents.push(Some(off + t.parent(v).unwrap() as usize));
        }
        Ok(())
    };
    for j in 1..=nn {
        let k = model.biased.sample(rng).max(1);
        nhat[j] = k;
        match mode {
            BackwardMode::Full => {
                if parents.len() as u64 + k > cap as u64 {
                    return Err(Error::Overflow { cap });
                }
                for _ in 1..k {
                    let t = sample_gw(model, cap - parents.len(), rng)?;
                    if t.height() + 1 >= j as u32 {
                        reaching[j] += 1;
                    }
                    graft(&mut parents, j, &t)?;
                }
            }
            BackwardMode::Reduced => {
                let depth = j as u32 - 1;
                let i = binomial(k - 1, model.q(depth), rng);
                reaching[j] = i;
                for _ in 0..i {
                    let t = sample_reduced_conditioned(model, depth, cap, rng)?;
                    graft(&mut parents, j, &t)?;
                }
            }
        }
    }
    let (mut tree, map) = Tree::from_parents(&parents)?;
    tree.set_mark(Some(map[0]));
    tree.set_spine(Some((0..=nn).rev().map(|j| map[j]).collect()));
    let m: Vec<u32> = (1..=nn).filter(|&j| reaching[j] > 0).map(|j| j as u32).collect();
    let l = m
        .iter()
        .scan(0u32, |prev, &x| {
            let gap = x - *prev;
            *prev = x;
            Some(gap)
        })
        .collect();
    Ok(BackwardTree {
        tree,
        n,
        nhat,
        reaching,
        m,
        l,
    })
}

/// Marked spine depths M_1 < M_2 < ... up to n, without building any graft:
/// each level only needs N̂_j and the binomial count of reaching grafts.
pub fn sample_marked_levels<R: Rng + ?Sized>(model: &TreeModel, n: u32, rng: &mut R) -> Result<Vec<u32>> {
    model.check_horizon(n)?;
    let mut m = Vec::new();
    for j in 1..=n {
        let k = model.biased.sample(rng).max(1);
        if binomial(k - 1, model.q(j - 1), rng) > 0 {
            m.push(j);
        }
    }
    Ok(m)
}
