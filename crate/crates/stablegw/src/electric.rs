//! Effective conductances and harmonic measure on finite trees.
//!
//! With unit resistances, the first point of generation n hit by simple random
//! walk from the root is distributed as the unit current flowing from the
//! root to the grounded level n. On a tree the current entering a vertex splits
//! among its children in proportion to C(c) / (1 + C(c)), where C(c) is the
//! conductance from c down to level n, so every mass is a product of branch
//! ratios. All masses are accumulated as logarithms.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gwtree::{reduce, sample_reduced_conditioned, BackwardTree, Tree, TreeModel};
use crate::offspring::OffspringLaw;

/// Level-n harmonic measure together with the conductances behind it.
#[derive(Debug, Clone)]
pub struct HarmonicResult {
    /// Leaf ids at generation n with their log-masses.
    pub log_mass: Vec<(u32, f64)>,
    /// Conductance from each vertex to level n; meaningless where `boundary` is set.
    conductance: Vec<f64>,
    boundary: Vec<bool>,
    pub root_conductance: f64,
}

impl HarmonicResult {
    /// Conductance from v to level n, `None` on level n itself (infinite).
    pub fn conductance(&self, v: u32) -> Option<f64> {
        (!self.boundary[v as usize]).then(|| self.conductance[v as usize])
    }

    /// Log-mass of a leaf.
    pub fn log_mass_of(&self, leaf: u32) -> Option<f64> {
        self.log_mass
            .binary_search_by_key(&leaf, |&(v, _)| v)
            .ok()
            .map(|i| self.log_mass[i].1)
    }

    /// Σ μ log μ over the leaves.
    pub fn entropy_sum(&self) -> f64 {
        self.log_mass.iter().map(|&(_, l)| l.exp() * l).sum()
    }

    /// log of Σ μ, which is 0 up to rounding.
    pub fn log_total(&self) -> f64 {
        logsumexp(self.log_mass.iter().map(|&(_, l)| l))
    }
}

pub fn logsumexp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Conductances to the deepest level of a reduced tree, computed leaves up.
/// Returns (sum of child ratios per vertex, boundary flags).
fn conductances(tree: &Tree, n: u32) -> (Vec<f64>, Vec<bool>) {
    let len = tree.len();
    let boundary: Vec<bool> = (0..len as u32).map(|v| tree.generation(v) == n).collect();
    let mut c = vec![0.0; len];
    for v in (0..len as u32).rev() {
        if boundary[v as usize] {
            continue;
        }
        c[v as usize] = tree
            .children(v)
            .map(|ch| branch_ratio(c[ch as usize], boundary[ch as usize]))
            .sum();
    }
    (c, boundary)
}

/// C / (1 + C), equal to 1 on the boundary.
fn branch_ratio(c: f64, boundary: bool) -> f64 {
    if boundary {
        1.0
    } else {
        c / (1.0 + c)
    }
}

fn log_branch_ratio(c: f64, boundary: bool) -> f64 {
    if boundary {
        0.0
    } else {
        -(1.0 / c).ln_1p()
    }
}

/// Harmonic measure of level n for a tree reduced to level n.
pub fn harmonic_measure(tree: &Tree, n: u32) -> Result<HarmonicResult> {
    if !tree.is_reduced(n) {
        return Err(Error::NotReduced(n));
    }
    let (c, boundary) = conductances(tree, n);
    let len = tree.len();
    let mut logm = vec![0.0; len];
    let mut log_mass = Vec::new();
    for v in 0..len as u32 {
        if boundary[v as usize] {
            log_mass.push((v, logm[v as usize]));
            continue;
        }
        let log_total = c[v as usize].ln();
        for ch in tree.children(v) {
            logm[ch as usize] = logm[v as usize]
                + log_branch_ratio(c[ch as usize], boundary[ch as usize])
                - log_total;
        }
    }
    let root_conductance = if boundary[0] { f64::INFINITY } else { c[0] };
    Ok(HarmonicResult {
        log_mass,
        conductance: c,
        boundary,
        root_conductance,
    })
}

/// Conductance between an extra vertex attached above the root and
/// generation i, i.e. 1 / (1 + 1 / C_i) with C_i the root conductance of the
/// tree reduced to level i.
pub fn conductance_with_stub(tree: &Tree, i: u32) -> Result<f64> {
    if i == 0 {
        return Ok(1.0);
    }
    let reduced;
    let t = if tree.is_reduced(i) {
        tree
    } else {
        reduced = reduce(tree, i)?;
        &reduced
    };
    let (c, _) = conductances(t, i);
    Ok(c[0] / (1.0 + c[0]))
}

/// log P(walk first hits generation n at the marked vertex).
pub fn hit_prob_marked(tree: &Tree) -> Result<f64> {
    let mark = tree.mark().ok_or(Error::MissingMark(0))?;
    let n = tree.generation(mark);
    let reduced;
    let t = if tree.is_reduced(n) {
        tree
    } else {
        reduced = reduce(tree, n)?;
        &reduced
    };
    let mark = t.mark().ok_or(Error::MissingMark(n))?;
    let (c, boundary) = conductances(t, n);
    let mut log_p = 0.0;
    let mut v = mark;
    while let Some(p) = t.parent(v) {
        log_p += log_branch_ratio(c[v as usize], boundary[v as usize]) - c[p as usize].ln();
        v = p;
    }
    Ok(log_p)
}

/// Conductances, gaps and hitting probabilities along the backward spine.
///
/// Vectors are indexed from k = 1: `c[0]` is c_1. `q[0]` is Q_2 and
/// `log_p[0]` is log p_1.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardStats {
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub ell: Vec<f64>,
    pub q: Vec<f64>,
    pub log_p: Vec<f64>,
}

impl BackwardStats {
    /// Assembles the statistics for k = 1..=k_max from c_k, h_k and ℓ_k
    /// given for k = 1..=k_max+1.
    pub fn assemble(c: Vec<f64>, h: Vec<f64>, ell: Vec<f64>, k_max: usize) -> BackwardStats {
        let q = (2..=k_max)
            .map(|j| {
                let (cj, lj, lj1) = (c[j - 1], ell[j - 1], ell[j]);
                let (cp, hp) = (c[j - 2], h[j - 2]);
                (1.0 + (cj + lj1) / lj - lj / (lj + cp + hp)).ln()
            })
            .collect();
        let mut log_p = Vec::with_capacity(k_max);
        let mut below = 0.0;
        for k in 1..=k_max {
            let (ck, hk, lk1) = (c[k - 1], h[k - 1], ell[k]);
            log_p.push(below + (hk / (hk + ck + lk1)).ln());
            below += (hk / (hk + ck)).ln();
        }
        BackwardStats {
            c,
            h,
            ell,
            q,
            log_p,
        }
    }

    pub fn k_max(&self) -> usize {
        self.log_p.len()
    }

    /// (1/k) Σ_{j=2}^{k} Q_j at k = k_max.
    pub fn q_average(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.k_max() as f64
    }

    /// Largest |log p_1 - log p_k - Σ_{j=2}^{k} Q_j| over k.
    pub fn recurrence_residual(&self) -> f64 {
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for k in 2..=self.k_max() {
            acc += self.q[k - 2];
            worst = worst.max((self.log_p[0] - self.log_p[k - 1] - acc).abs());
        }
        worst
    }
}

/// c_k, h_k, ℓ_k, Q_j and p_k from an exactly sampled backward tree.
/// c_k and h_k are read off the conductances of the reduced arena.
pub fn backward_stats(bt: &BackwardTree, k_max: usize) -> Result<BackwardStats> {
    if k_max < 1 || bt.m.len() < k_max + 1 {
        return Err(Error::InsufficientLevels {
            found: bt.m.len(),
            needed: k_max + 1,
        });
    }
    let n = bt.n;
    let reduced;
    let t = if bt.tree.is_reduced(n) {
        &bt.tree
    } else {
        reduced = reduce(&bt.tree, n)?;
        &reduced
    };
    let spine = t.spine().expect("spine survives reduction");
    let u = |j: u32| spine[(n - j) as usize];
    let (cond, boundary) = conductances(t, n);
    let ratio = |v: u32| branch_ratio(cond[v as usize], boundary[v as usize]);
    let mut c = Vec::with_capacity(k_max + 1);
    let mut h = Vec::with_capacity(k_max + 1);
    let mut ell = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mk = bt.m[k];
        let (top, below) = (u(mk), u(mk - 1));
        c.push(t.children(top).filter(|&g| g != below).map(ratio).sum());
        h.push(ratio(below));
        ell.push(1.0 / bt.l[k] as f64);
    }
    Ok(BackwardStats::assemble(c, h, ell, k_max))
}

/// h_k from the series/parallel recurrence h_1 = ℓ_1,
/// h_k = 1 / (L_k + 1 / (c_{k-1} + h_{k-1})).
pub fn h_recurrence(c: &[f64], ell: &[f64]) -> Vec<f64> {
    let mut h = Vec::with_capacity(ell.len());
    for k in 0..ell.len() {
        if k == 0 {
            h.push(ell[0]);
        } else {
            let x = c[k - 1] + h[k - 1];
            h.push(ell[k] * x / (ell[k] + x));
        }
    }
    h
}

/// Marked levels and graft conductances of a backward spine.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardSkeleton {
    /// Spine depths M_1 < M_2 < ... (as floats, deep levels are astronomically large).
    pub m: Vec<f64>,
    /// c_k for the same levels.
    pub c: Vec<f64>,
    /// Index of the first level produced by the asymptotic regime.
    pub exact_levels: usize,
}

impl BackwardSkeleton {
    pub fn stats(&self, k_max: usize) -> Result<BackwardStats> {
        if k_max < 1 || self.m.len() < k_max + 1 {
            return Err(Error::InsufficientLevels {
                found: self.m.len(),
                needed: k_max + 1,
            });
        }
        let ell: Vec<f64> = (0..=k_max)
            .map(|k| {
                let prev = if k == 0 { 0.0 } else { self.m[k - 1] };
                1.0 / (self.m[k] - prev)
            })
            .collect();
        let c = self.c[..=k_max].to_vec();
        let h = h_recurrence(&c, &ell);
        Ok(BackwardStats::assemble(c, h, ell, k_max))
    }
}

/// Samples the marked levels M_1, ..., M_{levels} of the backward spine and the
/// graft conductances c_k.
///
/// Up to spine depth `exact_depth` everything is exact: I_j is binomial with
/// the survival probability q_{j-1} and each reaching graft is a sampled
/// reduced tree whose stub conductance is computed. Beyond it the gaps are
/// drawn from the survival-product asymptotics, I given I ≥ 1 has the law of
/// N̂_α − 1 (exact for the stable family) and (M − 1) times a graft
/// conductance is drawn from `c_limit`, a sample of the limiting law.
pub fn sample_skeleton<R: Rng + ?Sized>(
    model: &TreeModel,
    theta_hat: &OffspringLaw,
    levels: usize,
    exact_depth: u32,
    c_limit: &[f64],
    cap: usize,
    rng: &mut R,
) -> Result<BackwardSkeleton> {
    let gamma = model.law.gamma().ok_or_else(|| {
        Error::InvalidParameter("skeleton sampling needs the stable family".into())
    })?;
    if exact_depth as usize > model.survival.n_max() {
        return Err(Error::InvalidParameter(
            "exact depth exceeds the survival table".into(),
        ));
    }
    let alpha = model.alpha();
    let mut m = Vec::with_capacity(levels);
    let mut c = Vec::with_capacity(levels);
    let mut j = 0u32;
    while m.len() < levels && j < exact_depth {
        j += 1;
        let k = model.biased.sample(rng).max(1);
        let i = crate::gwtree::binomial_draw(k - 1, model.q(j - 1), rng);
        if i == 0 {
            continue;
        }
        let mut ck = 0.0;
        for _ in 0..i {
            let t = sample_reduced_conditioned(model, j - 1, cap, rng)?;
            ck += conductance_with_stub(&t, j - 1)?;
        }
        m.push(j as f64);
        c.push(ck);
    }
    let exact_levels = m.len();
    if m.len() < levels {
        if c_limit.is_empty() {
            return Err(Error::InvalidParameter("empty limiting sample".into()));
        }
        let a = alpha / (alpha - 1.0);
        let d = exact_depth as f64;
        let x_d = model.q(exact_depth).powf(-(alpha - 1.0));
        let s0 = x_d / ((alpha - 1.0) * gamma) - 1.0 - d;
        let mut pos = d;
        while m.len() < levels {
            let u: f64 = rng.sample(rand::distr::Open01);
            let next = ((pos + s0 + 0.5) * u.powf(-1.0 / a) - s0 - 0.5).floor() + 1.0;
            let next = next.max(pos + 1.0);
            let count = theta_hat.sample(rng).max(2) - 1;
            let mut sum = 0.0;
            for _ in 0..count {
                sum += c_limit[rng.random_range(0..c_limit.len())];
            }
            m.push(next);
            c.push(sum / (next - 1.0));
            pos = next;
        }
    }
    Ok(BackwardSkeleton { m, c, exact_levels })
}
