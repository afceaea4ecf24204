//! Truncated continuous trees.
//!
//! The reduced stable tree lives on heights in [0, 1) ("delta" coordinates);
//! its image under y ↦ -log(1 - y) is the continuous-time GW tree with unit
//! exponential lifetimes and θ_α offspring ("gamma" coordinates). Trees are
//! expanded for a fixed number of branching generations. Each truncated leaf
//! keeps the top of its own segment, which gives a two-sided conductance
//! bracket: open circuit above the leaf start, or short circuit at its top.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::offspring::{make_theta, size_bias, OffspringLaw};

/// Height convention of a [`ContinuousTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Delta,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtVertex {
    pub parent: Option<u32>,
    /// Height where the segment starts (the parent's branch point).
    pub start: f64,
    /// Height of the branch point at the top of the segment.
    pub top: f64,
    pub first_child: u32,
    pub n_children: u32,
    /// Set on the last generation kept: the subtree above `top` is unknown.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTree {
    pub alpha: f64,
    pub coords: Coordinates,
    pub depth: u32,
    pub vertices: Vec<CtVertex>,
}

fn to_gamma(y: f64) -> f64 {
    -(-y).ln_1p()
}

fn to_delta(z: f64) -> f64 {
    -(-z).exp_m1()
}

impl ContinuousTree {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn children(&self, v: u32) -> std::ops::Range<u32> {
        let x = &self.vertices[v as usize];
        x.first_child..x.first_child + x.n_children
    }

    /// Truncated leaves, i.e. vertices of the last generation kept.
    pub fn truncated(&self) -> impl Iterator<Item = &CtVertex> {
        self.vertices.iter().filter(|v| v.truncated)
    }

    /// The same tree in the other coordinate system.
    pub fn convert(&self, coords: Coordinates) -> ContinuousTree {
        if coords == self.coords {
            return self.clone();
        }
        let f = match coords {
            Coordinates::Delta => to_delta,
            Coordinates::Gamma => to_gamma,
        };
        ContinuousTree {
            coords,
            vertices: self
                .vertices
                .iter()
                .map(|v| CtVertex {
                    start: f(v.start),
                    top: f(v.top),
                    ..*v
                })
                .collect(),
            ..*self
        }
    }

    /// Σ exp(-z/(α-1)) over the birth heights z of the truncated leaves, a
    /// mean-one martingale in the number of generations that converges to W.
    pub fn generation_martingale(&self) -> f64 {
        let g = self.convert(Coordinates::Gamma);
        let beta = self.alpha - 1.0;
        g.truncated().map(|v| (-v.start / beta).exp()).sum()
    }
}

/// Expands `depth` branching generations. Within a generation all segment
/// lengths are drawn before any offspring count, so the draws of a shallower
/// tree are a prefix of the draws of a deeper one.
pub fn build<R: Rng + ?Sized>(
    alpha: f64,
    depth: u32,
    coords: Coordinates,
    cap: usize,
    rng: &mut R,
) -> Result<ContinuousTree> {
    let theta = make_theta(alpha)?;
    build_with(&theta, depth, coords, cap, rng)
}

pub fn build_with<R: Rng + ?Sized>(
    theta: &OffspringLaw,
    depth: u32,
    coords: Coordinates,
    cap: usize,
    rng: &mut R,
) -> Result<ContinuousTree> {
    let mut vs = vec![CtVertex {
        parent: None,
        start: 0.0,
        top: 0.0,
        first_child: 0,
        n_children: 0,
        truncated: false,
    }];
    let mut level = 0..1usize;
    for g in 0..=depth {
        for v in vs[level.clone()].iter_mut() {
            let u: f64 = rng.sample(Open01);
            v.top = match coords {
                Coordinates::Delta => v.start + u * (1.0 - v.start),
                Coordinates::Gamma => v.start - (-u).ln_1p(),
            };
        }
        if g == depth {
            for v in vs[level.clone()].iter_mut() {
                v.truncated = true;
            }
            break;
        }
        let next_start = vs.len();
        for i in level.clone() {
            let k = theta.sample(rng);
            if (vs.len() as u64).saturating_add(k) > cap as u64 {
                return Err(Error::Overflow { cap });
            }
            vs[i].first_child = vs.len() as u32;
            vs[i].n_children = k as u32;
            let top = vs[i].top;
            for _ in 0..k {
                vs.push(CtVertex {
                    parent: Some(i as u32),
                    start: top,
                    top: 0.0,
                    first_child: 0,
                    n_children: 0,
                    truncated: false,
                });
            }
        }
        level = next_start..vs.len();
    }
    Ok(ContinuousTree {
        alpha: theta.alpha(),
        coords,
        depth,
        vertices: vs,
    })
}

pub fn build_delta<R: Rng + ?Sized>(alpha: f64, depth: u32, cap: usize, rng: &mut R) -> Result<ContinuousTree> {
    build(alpha, depth, Coordinates::Delta, cap, rng)
}

pub fn build_gamma<R: Rng + ?Sized>(alpha: f64, depth: u32, cap: usize, rng: &mut R) -> Result<ContinuousTree> {
    build(alpha, depth, Coordinates::Gamma, cap, rng)
}

/// Root-to-boundary conductance bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductanceBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ConductanceBounds {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Series/parallel reduction with unit resistance per unit of delta height.
/// A truncated leaf contributes 1/(1 - start) (its segment runs straight to
/// height 1) to the lower bound and 1/(top - start) (grounded at its top) to
/// the upper bound.
pub fn conductance_bounds(tree: &ContinuousTree) -> ConductanceBounds {
    let t = tree.convert(Coordinates::Delta);
    let n = t.len();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in (0..n).rev() {
        let v = &t.vertices[i];
        if v.truncated {
            lo[i] = 1.0 / (1.0 - v.start);
            hi[i] = 1.0 / (v.top - v.start);
            continue;
        }
        let (sl, sh) = t
            .children(i as u32)
            .fold((0.0, 0.0), |(a, b), c| (a + lo[c as usize], b + hi[c as usize]));
        let len = v.top - v.start;
        lo[i] = 1.0 / (len + 1.0 / sl);
        hi[i] = 1.0 / (len + 1.0 / sh);
    }
    ConductanceBounds {
        lower: lo[0],
        upper: hi[0],
    }
}

/// Number of individuals alive at time r in the continuous-time GW tree,
/// grown breadth first without storing the tree.
pub fn level_count<R: Rng + ?Sized>(theta: &OffspringLaw, r: f64, cap: usize, rng: &mut R) -> Result<u64> {
    let mut births = vec![0.0f64];
    let mut alive = 0u64;
    let mut processed = 0usize;
    while let Some(b) = births.pop() {
        processed += 1;
        if processed + births.len() > cap {
            return Err(Error::Overflow { cap });
        }
        let u: f64 = rng.sample(Open01);
        let death = b - (-u).ln_1p();
        if death > r {
            alive += 1;
        } else {
            let k = theta.sample(rng);
            births.extend(std::iter::repeat_n(death, k as usize));
        }
    }
    Ok(alive)
}

/// exp(-r/(α-1)) times the population at time r, an estimate of W.
pub fn w_at_height<R: Rng + ?Sized>(theta: &OffspringLaw, r: f64, cap: usize, rng: &mut R) -> Result<f64> {
    let n = level_count(theta, r, cap, rng)?;
    Ok((-r / (theta.alpha() - 1.0)).exp() * n as f64)
}

/// The distinguished ray of the size-biased tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineSample {
    /// Gamma heights Z_1 < Z_2 < ... of the branch points.
    pub heights: Vec<f64>,
    /// J_k, number of ordinary subtrees grafted at branch point k.
    pub graft_counts: Vec<u64>,
}

impl SpineSample {
    /// V_k = (Y_k - Y_{k-1}) / (1 - Y_{k-1}) in delta coordinates.
    pub fn v(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.heights
            .iter()
            .map(|&z| {
                let v = to_delta(z - prev);
                prev = z;
                v
            })
            .collect()
    }

    /// Gaps between successive branch heights, starting from 0.
    pub fn gaps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.heights
            .iter()
            .map(|&z| {
                let g = z - prev;
                prev = z;
                g
            })
            .collect()
    }
}

pub fn sample_spine<R: Rng + ?Sized>(theta_hat: &OffspringLaw, points: usize, rng: &mut R) -> SpineSample {
    let alpha = theta_hat.alpha();
    let rate = Exp::new(alpha / (alpha - 1.0)).expect("positive rate");
    let mut z = 0.0;
    let mut heights = Vec::with_capacity(points);
    let mut graft_counts = Vec::with_capacity(points);
    for _ in 0..points {
        z += rate.sample(rng);
        heights.push(z);
        graft_counts.push(theta_hat.sample(rng).max(2) - 1);
    }
    SpineSample { heights, graft_counts }
}

/// Parameters of the spine ergodic averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineConfig {
    pub alpha: f64,
    /// n, the number of branch points averaged over.
    pub points: usize,
    /// Additional branch points beyond n used to close the sums.
    pub extra: usize,
    /// Branching generations kept in each grafted tree.
    pub graft_depth: u32,
    /// Time at which grafted populations are counted for W.
    pub w_height: f64,
    pub cap: usize,
}

impl SpineConfig {
    pub fn new(alpha: f64, points: usize) -> SpineConfig {
        SpineConfig {
            alpha,
            points,
            extra: 50,
            graft_depth: if alpha >= 1.75 { 12 } else { 8 },
            w_height: 6.0 * (alpha - 1.0),
            cap: 10_000_000,
        }
    }
}

/// One realisation of H_n/n, F_n/n and G_n/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineAverages {
    pub h: f64,
    pub f: f64,
    /// G_n/n from bound midpoints.
    pub g: f64,
    /// G_n/n with all conductances at their lower and upper bounds.
    pub g_lower: f64,
    pub g_upper: f64,
    /// Largest bound gap among the grafted trees.
    pub max_gap: f64,
}

impl SpineAverages {
    /// Whether the truncation left a bound gap above `threshold`.
    pub fn flagged(&self, threshold: f64) -> bool {
        self.max_gap > threshold
    }
}

/// Log of the harmonic flow kept by the spine over the first n branch points.
/// `graft` holds Σ C over the grafts at each branch point; the spine
/// conductance is assembled from the top down, closed by `terminal`.
fn spine_flow(v: &[f64], graft: &[f64], n: usize, terminal: f64) -> f64 {
    let k = v.len();
    let mut chat = terminal;
    let mut logs = vec![0.0; k];
    for i in (0..k).rev() {
        logs[i] = (chat / (chat + graft[i])).ln();
        if i > 0 {
            chat = 1.0 / (v[i] + (1.0 - v[i]) / (chat + graft[i]));
        }
    }
    logs[..n].iter().sum()
}

pub fn sample_spine_averages<R: Rng + ?Sized>(cfg: &SpineConfig, rng: &mut R) -> Result<SpineAverages> {
    if cfg.points < 1 {
        return Err(Error::InvalidParameter("need at least one branch point".into()));
    }
    let theta = make_theta(cfg.alpha)?;
    let theta_hat = size_bias(&theta)?;
    let beta = cfg.alpha - 1.0;
    let total = cfg.points + cfg.extra;
    let spine = sample_spine(&theta_hat, total, rng);
    let mut lo = vec![0.0; total];
    let mut mid = vec![0.0; total];
    let mut hi = vec![0.0; total];
    let mut w = vec![0.0; total];
    let mut max_gap: f64 = 0.0;
    for k in 0..total {
        for _ in 0..spine.graft_counts[k] {
            let t = build_with(&theta, cfg.graft_depth, Coordinates::Delta, cfg.cap, rng)?;
            let b = conductance_bounds(&t);
            lo[k] += b.lower;
            hi[k] += b.upper;
            mid[k] += b.midpoint();
            max_gap = max_gap.max(b.gap());
            w[k] += w_at_height(&theta, cfg.w_height, cfg.cap, rng)?;
        }
    }
    let n = cfg.points;
    let weights: Vec<f64> = (0..total)
        .map(|k| (-spine.heights[k] / beta).exp() * w[k])
        .collect();
    let above: f64 = weights[n..].iter().sum();
    let all: f64 = weights.iter().sum();
    let v = spine.v();
    let g_mid = spine_flow(&v, &mid, n, 0.5 * (1.0 + 1.0 / to_delta(spine.heights[total - 1] - spine.heights[total - 2])));
    let g_lower = spine_flow(&v, &lo, n, 1.0);
    let g_upper = spine_flow(&v, &hi, n, f64::MAX.sqrt());
    let nf = n as f64;
    Ok(SpineAverages {
        h: spine.heights[n - 1] / nf,
        f: (above / all).ln() / nf,
        g: g_mid / nf,
        g_lower: g_lower.min(g_upper) / nf,
        g_upper: g_lower.max(g_upper) / nf,
        max_gap,
    })
}
