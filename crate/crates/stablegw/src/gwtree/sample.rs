use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::tree::{Tree, TreeBuilder};
use crate::error::{Error, Result};
use crate::offspring::{make_stable_rho, size_bias, survival_probs, OffspringLaw, SurvivalTable};

/// An offspring law together with its size-biased version and survival table.
#[derive(Debug, Clone)]
pub struct TreeModel {
    pub law: OffspringLaw,
    pub biased: OffspringLaw,
    pub survival: SurvivalTable,
}

impl TreeModel {
    /// Critical family with parameters (alpha, gamma), survival table up to n_max.
    pub fn stable(alpha: f64, gamma: f64, n_max: usize) -> Result<TreeModel> {
        let law = make_stable_rho(alpha, gamma)?;
        TreeModel::new(law, n_max)
    }

    pub fn new(law: OffspringLaw, n_max: usize) -> Result<TreeModel> {
        let biased = size_bias(&law)?;
        let survival = survival_probs(&law, n_max.max(1))?;
        Ok(TreeModel {
            law,
            biased,
            survival,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.law.alpha()
    }

    pub fn q(&self, m: u32) -> f64 {
        self.survival.q(m as usize)
    }

    pub(super) fn check_horizon(&self, n: u32) -> Result<()> {
        if n as usize > self.survival.n_max() {
            return Err(Error::InvalidParameter(format!(
                "generation {n} exceeds the survival table ({})",
                self.survival.n_max()
            )));
        }
        Ok(())
    }
}

/// What a vertex still has to satisfy while a tree is grown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum Need {
    /// Ordinary GW vertex.
    Free,
    /// Must have a descendant r generations below.
    Survive(u32),
    /// Must have no descendant r generations below.
    Die(u32),
    /// Spine vertex.
    Spine,
}

pub fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Index i >= 1 of the first child whose subtree survives, given that at least
/// one does: P(i) proportional to (1 - q)^(i-1) P(N >= i).
fn first_survivor<R: Rng + ?Sized>(law: &OffspringLaw, q: f64, q_parent: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.sample(Open01);
    let target = u * q_parent / q;
    let mut acc = 0.0;
    let mut pow = 1.0;
    let mut i = 1u64;
    loop {
        let w = pow * law.tail(i);
        if w <= 1e-300 * acc {
            return (i - 1).max(1);
        }
        acc += w;
        if acc >= target {
            return i;
        }
        pow *= 1.0 - q;
        i += 1;
    }
}

/// Offspring count of a vertex conditioned to have no descendant r
/// generations below: P(k) proportional to pmf(k) (1 - q_{r-1})^k.
fn dying_count<R: Rng + ?Sized>(law: &OffspringLaw, s: f64, total: f64, rng: &mut R) -> u64 {
    if s <= 0.0 {
        return 0;
    }
    let u: f64 = rng.sample(Open01);
    let target = u * total;
    let mut acc = 0.0;
    let mut pow = 1.0;
    let mut k = 0u64;
    let mut last = 0u64;
    loop {
        let w = law.pmf(k) * pow;
        if w > 0.0 {
            last = k;
        } else if k > 2 && law.tail(k) == 0.0 {
            return last;
        }
        acc += w;
        if acc >= target {
            return k;
        }
        if k > 2 && w < 1e-300 * acc {
            return last;
        }
        pow *= s;
        k += 1;
    }
}

fn check_budget(current: usize, k: u64, cap: usize) -> Result<()> {
    if current as u64 + k > cap as u64 {
        return Err(Error::Overflow { cap });
    }
    Ok(())
}

/// Children needs of a vertex that must survive r >= 1 more generations.
/// With `keep_dying` false only the surviving children are produced.
fn surviving_children<R: Rng + ?Sized>(
    model: &TreeModel,
    r: u32,
    keep_dying: bool,
    budget: (usize, usize),
    out: &mut Vec<Need>,
    rng: &mut R,
) -> Result<()> {
    let q = model.q(r - 1);
    let i = first_survivor(&model.law, q, model.q(r), rng);
    let k = model.law.sample_at_least(i, rng);
    if keep_dying {
        check_budget(budget.0, k, budget.1)?;
        for _ in 1..i {
            out.push(Need::Die(r - 1));
        }
        out.push(Need::Survive(r - 1));
        for _ in i..k {
            if rng.random::<f64>() < q {
                out.push(Need::Survive(r - 1));
            } else {
                out.push(Need::Die(r - 1));
            }
        }
    } else {
        let extra = binomial(k - i, q, rng);
        check_budget(budget.0, extra + 1, budget.1)?;
        out.extend(std::iter::repeat_n(Need::Survive(r - 1), extra as usize + 1));
    }
    Ok(())
}

/// What the grafts hanging off a spine look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Grafts {
    /// Plain GW trees, cut at the limit generation if there is one.
    Full,
    /// Only grafts reaching the spine's last generation, grown as reduced trees.
    Reduced,
}

/// Grows a tree breadth-first from a root need.
pub(super) struct Grower<'a> {
    model: &'a TreeModel,
    builder: TreeBuilder,
    cap: usize,
    needs: Vec<Need>,
    /// Free vertices at this generation get no children.
    limit: Option<u32>,
    keep_dying: bool,
    /// Spine vertices at generations below this one have children.
    spine_len: u32,
    grafts: Grafts,
    spine: Vec<u32>,
}

impl<'a> Grower<'a> {
    fn new(model: &'a TreeModel, root: Need, cap: usize) -> Self {
        Grower {
            model,
            builder: TreeBuilder::new(cap),
            cap,
            needs: vec![root],
            limit: None,
            keep_dying: true,
            spine_len: 0,
            grafts: Grafts::Full,
            spine: Vec::new(),
        }
    }

    /// A tree grown around a spine of `len` edges.
    pub(super) fn spine(model: &'a TreeModel, len: u32, grafts: Grafts, cap: usize) -> Self {
        let mut g = Grower::new(model, Need::Spine, cap);
        g.spine_len = len;
        g.grafts = grafts;
        g.keep_dying = grafts == Grafts::Full;
        g
    }

    pub(super) fn limit(mut self, limit: u32) -> Self {
        self.limit = Some(limit);
        self
    }

    pub(super) fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Tree> {
        let mut head = 0usize;
        let mut kids: Vec<Need> = Vec::new();
        if self.needs[0] == Need::Spine {
            self.spine.push(0);
        }
        while head < self.needs.len() {
            let v = head as u32;
            let g = self.builder.generation(v);
            let budget = (self.builder.len(), self.cap);
            kids.clear();
            match self.needs[head] {
                Need::Free => {
                    if self.limit.is_none_or(|l| g < l) {
                        let k = self.model.law.sample(rng);
                        check_budget(budget.0, k, budget.1)?;
                        kids.extend(std::iter::repeat_n(Need::Free, k as usize));
                    }
                }
                Need::Survive(0) => {}
                Need::Survive(r) => {
                    surviving_children(self.model, r, self.keep_dying, budget, &mut kids, rng)?
                }
                Need::Die(r) => {
                    let s = 1.0 - self.model.q(r - 1);
                    let k = dying_count(&self.model.law, s, 1.0 - self.model.q(r), rng);
                    check_budget(budget.0, k, budget.1)?;
                    kids.extend(std::iter::repeat_n(Need::Die(r - 1), k as usize));
                }
                Need::Spine => {
                    if g < self.spine_len {
                        self.spine_children(g, budget, &mut kids, rng)?;
                    }
                }
            }
            if !kids.is_empty() {
                let range = self.builder.expand(v, kids.len() as u64)?;
                for (id, need) in range.zip(kids.iter()) {
                    if *need == Need::Spine {
                        self.spine.push(id);
                    }
                }
                self.needs.extend_from_slice(&kids);
            }
            head += 1;
        }
        let builder = std::mem::replace(&mut self.builder, TreeBuilder::new(0));
        let mut tree = builder.finish();
        if !self.spine.is_empty() {
            tree.set_mark(self.spine.last().copied());
            tree.set_spine(Some(self.spine.clone()));
        }
        Ok(tree)
    }

    fn spine_children<R: Rng + ?Sized>(
        &mut self,
        g: u32,
        budget: (usize, usize),
        kids: &mut Vec<Need>,
        rng: &mut R,
    ) -> Result<()> {
        let k = self.model.biased.sample(rng).max(1);
        match self.grafts {
            Grafts::Full => {
                check_budget(budget.0, k, budget.1)?;
                let pos = rng.random_range(0..k);
                for j in 0..k {
                    kids.push(if j == pos { Need::Spine } else { Need::Free });
                }
            }
            Grafts::Reduced => {
                let r = self.spine_len - g - 1;
                let extra = binomial(k - 1, self.model.q(r), rng);
                check_budget(budget.0, extra + 1, budget.1)?;
                let pos = rng.random_range(0..=extra);
                for j in 0..=extra {
                    kids.push(if j == pos { Need::Spine } else { Need::Survive(r) });
                }
            }
        }
        Ok(())
    }
}

/// Plain GW tree, grown until extinction.
pub fn sample_gw<R: Rng + ?Sized>(model: &TreeModel, cap: usize, rng: &mut R) -> Result<Tree> {
    Grower::new(model, Need::Free, cap).run(rng)
}

/// Plain GW tree restricted to generations 0..=max_gen.
pub fn sample_gw_truncated<R: Rng + ?Sized>(
    model: &TreeModel,
    max_gen: u32,
    cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    Grower::new(model, Need::Free, cap).limit(max_gen).run(rng)
}

/// Generations 0..=n of a GW tree conditioned on reaching generation n,
/// sampled exactly through the survival probabilities.
pub fn sample_conditioned<R: Rng + ?Sized>(
    model: &TreeModel,
    n: u32,
    cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    model.check_horizon(n)?;
    Grower::new(model, Need::Survive(n), cap).run(rng)
}

/// The reduced tree of a conditioned GW tree at height n, sampled directly:
/// same law as `reduce(&sample_conditioned(..), n)`.
pub fn sample_reduced_conditioned<R: Rng + ?Sized>(
    model: &TreeModel,
    n: u32,
    cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    model.check_horizon(n)?;
    let mut g = Grower::new(model, Need::Survive(n), cap);
    g.keep_dying = false;
    g.run(rng)
}

/// Which version of the size-biased tree to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeBiased {
    /// All vertices up to generation n.
    Truncated,
    /// Off-spine trees complete, descendants of the spine tip removed.
    Complete,
}

/// Size-biased tree with spine v_0, ..., v_n; the mark is v_n.
pub fn sample_size_biased<R: Rng + ?Sized>(
    model: &TreeModel,
    n: u32,
    variant: SizeBiased,
    cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let g = Grower::spine(model, n, Grafts::Full, cap);
    let mut g = match variant {
        SizeBiased::Truncated => g.limit(n),
        SizeBiased::Complete => g,
    };
    g.run(rng)
}

/// Reduced size-biased tree at height n, sampled directly: off-spine children
/// survive to generation n with the exact probabilities and are then grown
/// as reduced conditioned trees.
pub fn sample_size_biased_reduced<R: Rng + ?Sized>(
    model: &TreeModel,
    n: u32,
    cap: usize,
    rng: &mut R,
) -> Result<Tree> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    model.check_horizon(n)?;
    Grower::spine(model, n, Grafts::Reduced, cap).run(rng)
}
