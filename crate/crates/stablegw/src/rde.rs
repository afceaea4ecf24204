//! Population dynamics for the conductance equations.
//!
//! A pool of samples stands in for a law. One iteration replaces every entry
//! by the right-hand side of the equation, evaluated with companions drawn
//! uniformly from the previous generation (synchronous update). Work is split
//! in fixed blocks, each with its own keyed stream, so pools are identical
//! whatever the number of worker threads.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::offspring::{make_theta, size_bias, OffspringLaw, SpecialLaw};
use crate::rng::{tag, StreamRng, Streams};
use crate::stats::{self, Estimate};

/// Sizes and knobs of a population run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdeConfig {
    pub alpha: f64,
    /// Pool size during the iterations.
    pub pool: usize,
    pub iters: usize,
    /// Size of the pool produced by the final enlargement pass.
    pub readout: usize,
    /// Companion sums with more terms than this are replaced by a Gaussian
    /// approximation around the pool mean.
    pub sum_cap: u64,
    pub block: usize,
}

impl RdeConfig {
    pub fn new(alpha: f64) -> RdeConfig {
        RdeConfig {
            alpha,
            pool: 100_000,
            iters: 100,
            readout: 1_000_000,
            sum_cap: 128,
            block: 4096,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {}", self.alpha)));
        }
        if self.pool < 2 || self.readout < 2 || self.iters < 1 || self.block < 1 {
            return Err(Error::InvalidParameter("pool sizes and iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Which law a pool represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    C,
    /// Pairs (W, C) coupled through the same branching.
    Joint,
    Chat,
}

/// A population of samples approximating a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    pub alpha: f64,
    pub kind: PoolKind,
    pub generation: usize,
    /// Conductance values (C or Ĉ).
    pub c: Vec<f64>,
    /// W values, present for joint pools.
    pub w: Option<Vec<f64>>,
    /// Sorted-pool mean absolute displacement after each iteration.
    pub displacement: Vec<f64>,
}

impl SamplePool {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Values sorted increasingly.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.c.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Writes the sorted conductance values, one per line, under a header.
    pub fn write_sorted_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "value")?;
        for x in self.sorted() {
            writeln!(out, "{x:.16e}")?;
        }
        Ok(())
    }
}

/// Offspring laws shared by all maps.
#[derive(Debug, Clone)]
pub struct RdeLaws {
    pub theta: OffspringLaw,
    pub theta_hat: OffspringLaw,
    pub v: SpecialLaw,
}

impl RdeLaws {
    pub fn new(alpha: f64) -> Result<RdeLaws> {
        let theta = make_theta(alpha)?;
        let theta_hat = size_bias(&theta)?;
        Ok(RdeLaws {
            theta,
            theta_hat,
            v: SpecialLaw::V { alpha },
        })
    }
}

/// Mean and standard deviation of a companion pool.
#[derive(Debug, Clone, Copy)]
struct Moments {
    mean: f64,
    sd: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Moments {
        Moments {
            mean: stats::mean(xs),
            sd: stats::variance(xs).sqrt(),
        }
    }
}

/// Sum of `count` entries drawn uniformly from `xs`.
fn companion_sum<R: Rng + ?Sized>(
    xs: &[f64],
    m: Moments,
    count: u64,
    cap: u64,
    floor: f64,
    rng: &mut R,
) -> f64 {
    if count <= cap {
        (0..count).map(|_| xs[rng.random_range(0..xs.len())]).sum()
    } else {
        let k = count as f64;
        let z: f64 = rng.sample(StandardNormal);
        (k * m.mean + k.sqrt() * m.sd * z).max(k * floor)
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Fills `out` block by block; `f` maps a stream to one value.
fn fill<T, F>(out: &mut [T], block: usize, streams: &Streams, key: (u64, u64), f: F)
where
    T: Send,
    F: Fn(&mut StreamRng, &mut T) + Sync,
{
    out.par_chunks_mut(block)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = streams.stream(key.0, key.1, b as u64);
            for slot in chunk.iter_mut() {
                f(&mut rng, slot);
            }
        });
}

fn conductance_map(u: f64, sum: f64) -> f64 {
    1.0 / (u + (1.0 - u) / sum)
}

/// Iterates the equation for C starting from the constant 1.
pub fn solve_c(cfg: &RdeConfig, streams: &Streams) -> Result<SamplePool> {
    cfg.validate()?;
    let laws = RdeLaws::new(cfg.alpha)?;
    let step = |prev: &[f64], n: usize, generation: usize| -> Vec<f64> {
        let m = Moments::of(prev);
        let mut next = vec![0.0; n];
        fill(&mut next, cfg.block, streams, (tag::POOL_C, generation as u64), |rng, slot| {
            let u = uniform(rng);
            let k = laws.theta.sample(rng);
            let s = companion_sum(prev, m, k, cfg.sum_cap, 1.0, rng);
            *slot = conductance_map(u, s);
        });
        next
    };
    let mut pool = vec![1.0; cfg.pool];
    let mut displacement = Vec::with_capacity(cfg.iters);
    for g in 0..cfg.iters {
        let next = step(&pool, cfg.pool, g);
        displacement.push(stats::sorted_displacement(&pool, &next));
        pool = next;
    }
    let c = step(&pool, cfg.readout, cfg.iters);
    Ok(SamplePool {
        alpha: cfg.alpha,
        kind: PoolKind::C,
        generation: cfg.iters + 1,
        c,
        w: None,
        displacement,
    })
}

/// Iterates the joint equation for (W, C). The W marginal is fixed by the
/// equation only up to a multiplicative constant, so after every iteration W
/// is rescaled to mean one; the final enlargement pass is left unscaled.
pub fn solve_w(cfg: &RdeConfig, streams: &Streams) -> Result<SamplePool> {
    cfg.validate()?;
    let laws = RdeLaws::new(cfg.alpha)?;
    let expo = 1.0 / (cfg.alpha - 1.0);
    let step = |prev: &[(f64, f64)], n: usize, generation: usize| -> Vec<(f64, f64)> {
        let ws: Vec<f64> = prev.iter().map(|p| p.0).collect();
        let cs: Vec<f64> = prev.iter().map(|p| p.1).collect();
        let (mw, mc) = (Moments::of(&ws), Moments::of(&cs));
        let mut next = vec![(0.0, 0.0); n];
        fill(&mut next, cfg.block, streams, (tag::POOL_W, generation as u64), |rng, slot| {
            let u = uniform(rng);
            let k = laws.theta.sample(rng);
            let (sw, sc) = if k <= cfg.sum_cap {
                (0..k).fold((0.0, 0.0), |(a, b), _| {
                    let p = prev[rng.random_range(0..prev.len())];
                    (a + p.0, b + p.1)
                })
            } else {
                (
                    companion_sum(&ws, mw, k, 0, 0.0, rng),
                    companion_sum(&cs, mc, k, 0, 1.0, rng),
                )
            };
            *slot = ((1.0 - u).powf(expo) * sw, conductance_map(u, sc));
        });
        next
    };
    let mut pool = vec![(1.0, 1.0); cfg.pool];
    let mut displacement = Vec::with_capacity(cfg.iters);
    for g in 0..cfg.iters {
        let mut next = step(&pool, cfg.pool, g);
        let mean_w = next.iter().map(|p| p.0).sum::<f64>() / next.len() as f64;
        for p in next.iter_mut() {
            p.0 /= mean_w;
        }
        let a: Vec<f64> = pool.iter().map(|p| p.1).collect();
        let b: Vec<f64> = next.iter().map(|p| p.1).collect();
        displacement.push(stats::sorted_displacement(&a, &b));
        pool = next;
    }
    let out = step(&pool, cfg.readout, cfg.iters);
    Ok(SamplePool {
        alpha: cfg.alpha,
        kind: PoolKind::Joint,
        generation: cfg.iters + 1,
        c: out.iter().map(|p| p.1).collect(),
        w: Some(out.iter().map(|p| p.0).collect()),
        displacement,
    })
}

/// Iterates the equation for Ĉ. The self-referential entry comes from the
/// previous generation, the companions from `c_pool`.
pub fn solve_chat(cfg: &RdeConfig, c_pool: &SamplePool, streams: &Streams) -> Result<SamplePool> {
    cfg.validate()?;
    check_alpha(cfg.alpha, c_pool)?;
    if c_pool.kind == PoolKind::Chat {
        return Err(Error::PoolMismatch("companions must come from a C pool".into()));
    }
    let laws = RdeLaws::new(cfg.alpha)?;
    let cs = &c_pool.c;
    let mc = Moments::of(cs);
    let step = |prev: &[f64], n: usize, generation: usize| -> Vec<f64> {
        let mut next = vec![0.0; n];
        fill(&mut next, cfg.block, streams, (tag::POOL_CHAT, generation as u64), |rng, slot| {
            let v = laws.v.sample(rng);
            let k = laws.theta_hat.sample(rng).max(1);
            let x = prev[rng.random_range(0..prev.len())];
            let s = x + companion_sum(cs, mc, k - 1, cfg.sum_cap, 1.0, rng);
            *slot = conductance_map(v, s);
        });
        next
    };
    let mut pool = vec![1.0; cfg.pool];
    let mut displacement = Vec::with_capacity(cfg.iters);
    for g in 0..cfg.iters {
        let next = step(&pool, cfg.pool, g);
        displacement.push(stats::sorted_displacement(&pool, &next));
        pool = next;
    }
    let c = step(&pool, cfg.readout, cfg.iters);
    Ok(SamplePool {
        alpha: cfg.alpha,
        kind: PoolKind::Chat,
        generation: cfg.iters + 1,
        c,
        w: None,
        displacement,
    })
}

fn need<'a>(p: Option<&'a SamplePool>, what: &str) -> Result<&'a SamplePool> {
    p.ok_or_else(|| Error::PoolMismatch(format!("{what} pool required")))
}

fn check_alpha(alpha: f64, pool: &SamplePool) -> Result<()> {
    if (pool.alpha - alpha).abs() > 1e-12 {
        return Err(Error::PoolMismatch(format!(
            "pool built for alpha = {}, requested {}",
            pool.alpha, alpha
        )));
    }
    Ok(())
}

/// Estimators of the typical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMethod {
    /// E[Ĉ] - 1, median of means.
    ChatMean,
    /// E[W C] - 1 from the joint pool, median of means.
    WcMean,
    /// E[N W_1 log((C_1 + ... + C_N) / C_1)].
    DirectLogratio,
    /// (α/(α-1)) E[log((Ĉ + C_2 + ... + C_N̂) / Ĉ)].
    BiasedLogratio,
}

impl LambdaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            LambdaMethod::ChatMean => "chat_mean",
            LambdaMethod::WcMean => "wc_mean",
            LambdaMethod::DirectLogratio => "direct_logratio",
            LambdaMethod::BiasedLogratio => "biased_logratio",
        }
    }

    pub const ALL: [LambdaMethod; 4] = [
        LambdaMethod::ChatMean,
        LambdaMethod::WcMean,
        LambdaMethod::DirectLogratio,
        LambdaMethod::BiasedLogratio,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub alpha: f64,
    pub method: LambdaMethod,
    pub lambda: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl LambdaEstimate {
    pub fn as_estimate(&self) -> Estimate {
        Estimate {
            value: self.lambda,
            stderr: self.stderr,
            n: self.n_samples,
        }
    }

    /// Whether the estimate clears 1/(α-1) by at least `sigmas` standard errors.
    pub fn exceeds_bound(&self, sigmas: f64) -> bool {
        self.lambda - 1.0 / (self.alpha - 1.0) >= sigmas * self.stderr
    }
}

/// The pools an estimator may need.
#[derive(Debug, Clone, Copy)]
pub struct Pools<'a> {
    pub joint: Option<&'a SamplePool>,
    pub c: Option<&'a SamplePool>,
    pub chat: Option<&'a SamplePool>,
}

pub const MOM_BLOCKS: usize = 32;

/// Point estimate of λ with its standard error. Sampling estimators draw as
/// many samples as the largest pool involved.
pub fn estimate_lambda(
    alpha: f64,
    pools: Pools<'_>,
    method: LambdaMethod,
    cap: u64,
    block: usize,
    streams: &Streams,
) -> Result<LambdaEstimate> {
    for p in [pools.joint, pools.c, pools.chat].into_iter().flatten() {
        check_alpha(alpha, p)?;
    }
    let kappa = alpha / (alpha - 1.0);
    let laws = RdeLaws::new(alpha)?;
    let companions = pools.c.or(pools.joint);
    let (est, n) = match method {
        LambdaMethod::ChatMean => {
            let chat = need(pools.chat, "Ĉ")?;
            let xs: Vec<f64> = chat.c.iter().map(|x| x - 1.0).collect();
            (stats::median_of_means(&xs, MOM_BLOCKS), xs.len())
        }
        LambdaMethod::WcMean => {
            let joint = need(pools.joint, "joint")?;
            let w = joint.w.as_ref().expect("joint pool has W");
            let xs: Vec<f64> = w.iter().zip(&joint.c).map(|(w, c)| w * c - 1.0).collect();
            (stats::median_of_means(&xs, MOM_BLOCKS), xs.len())
        }
        LambdaMethod::DirectLogratio => {
            let joint = need(pools.joint, "joint")?;
            let w = joint.w.as_ref().expect("joint pool has W");
            let cs = &need(companions, "C")?.c;
            let mc = Moments::of(cs);
            let n = joint.len();
            let mut xs = vec![0.0; n];
            fill(&mut xs, block, streams, (tag::ESTIMATOR, 1), |rng, slot| {
                let k = laws.theta.sample(rng);
                let i = rng.random_range(0..joint.len());
                let rest = companion_sum(cs, mc, k - 1, cap, 1.0, rng);
                let c1 = joint.c[i];
                *slot = k as f64 * w[i] * ((c1 + rest) / c1).ln();
            });
            (stats::mean_se(&xs), n)
        }
        LambdaMethod::BiasedLogratio => {
            let chat = need(pools.chat, "Ĉ")?;
            let cs = &need(companions, "C")?.c;
            let mc = Moments::of(cs);
            let n = chat.len();
            let mut xs = vec![0.0; n];
            fill(&mut xs, block, streams, (tag::ESTIMATOR, 2), |rng, slot| {
                let k = laws.theta_hat.sample(rng).max(1);
                let x = chat.c[rng.random_range(0..chat.len())];
                let rest = companion_sum(cs, mc, k - 1, cap, 1.0, rng);
                *slot = kappa * (rest / x).ln_1p();
            });
            (stats::mean_se(&xs), n)
        }
    };
    Ok(LambdaEstimate {
        alpha,
        method,
        lambda: est.value,
        stderr: est.stderr,
        n_samples: n,
    })
}

/// Residual of the g = log identity:
/// E[Ĉ - 1] - (α/(α-1)) E[log((Ĉ + C_2 + ... + C_N̂) / Ĉ)], sampled pairwise.
pub fn log_identity_residual(
    chat: &SamplePool,
    c: &SamplePool,
    cap: u64,
    block: usize,
    streams: &Streams,
) -> Result<Estimate> {
    check_alpha(chat.alpha, c)?;
    let alpha = chat.alpha;
    let kappa = alpha / (alpha - 1.0);
    let laws = RdeLaws::new(alpha)?;
    let mc = Moments::of(&c.c);
    let mut xs = vec![0.0; chat.len()];
    fill(&mut xs, block, streams, (tag::DIAGNOSTIC, 1), |rng, slot| {
        let a = chat.c[rng.random_range(0..chat.len())];
        let x = chat.c[rng.random_range(0..chat.len())];
        let k = laws.theta_hat.sample(rng).max(1);
        let rest = companion_sum(&c.c, mc, k - 1, cap, 1.0, rng);
        *slot = (a - 1.0) - kappa * (rest / x).ln_1p();
    });
    Ok(stats::mean_se(&xs))
}

/// Residual of the Laplace-transform equation
/// 2ℓψ'' + ℓψ' - (α/(α-1))(1 - φ)^(α-1) ψ at ℓ, with a delta-method error.
pub fn laplace_ode_residual(chat: &SamplePool, c: &SamplePool, ell: f64) -> Result<Estimate> {
    check_alpha(chat.alpha, c)?;
    let alpha = chat.alpha;
    let kappa = alpha / (alpha - 1.0);
    let n = chat.len() as f64;
    let (mut sa, mut se, mut saa, mut see, mut sae) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &x in &chat.c {
        let h = x / 2.0;
        let e = (-ell * h).exp();
        let a = 2.0 * ell * h * h * e - ell * h * e;
        sa += a;
        se += e;
        saa += a * a;
        see += e * e;
        sae += a * e;
    }
    let (ma, me) = (sa / n, se / n);
    let (vaa, vee, vae) = (saa / n - ma * ma, see / n - me * me, sae / n - ma * me);
    let phis: Vec<f64> = c.c.iter().map(|x| (-ell * x / 2.0).exp()).collect();
    let phi = stats::mean_se(&phis);
    let base = (1.0 - phi.value).powf(alpha - 1.0);
    let value = ma - kappa * base * me;
    let d_psi = -kappa * base;
    let d_phi = kappa * (alpha - 1.0) * (1.0 - phi.value).powf(alpha - 2.0) * me;
    let var_chat = (vaa + d_psi * d_psi * vee + 2.0 * d_psi * vae) / n;
    let var = var_chat + d_phi * d_phi * phi.stderr * phi.stderr;
    Ok(Estimate {
        value,
        stderr: var.max(0.0).sqrt(),
        n: chat.len(),
    })
}

/// Least-squares fit of P(Ĉ < t) = ((t-1)/t)^(α/(α-1)) A_0 on a uniform grid
/// of (1, 2].
#[derive(Debug, Clone, PartialEq)]
pub struct A0Fit {
    pub a0: f64,
    pub sup_residual: f64,
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
}

pub fn fit_a0(chat: &SamplePool, points: usize) -> A0Fit {
    let kappa = chat.alpha / (chat.alpha - 1.0);
    let sorted = chat.sorted();
    let n = sorted.len() as f64;
    let grid: Vec<f64> = (1..=points).map(|i| 1.0 + i as f64 / points as f64).collect();
    let empirical: Vec<f64> = grid
        .iter()
        .map(|&t| sorted.partition_point(|&x| x < t) as f64 / n)
        .collect();
    let shape: Vec<f64> = grid.iter().map(|&t| ((t - 1.0) / t).powf(kappa)).collect();
    let a0 = shape.iter().zip(&empirical).map(|(g, f)| g * f).sum::<f64>()
        / shape.iter().map(|g| g * g).sum::<f64>();
    let sup_residual = shape
        .iter()
        .zip(&empirical)
        .map(|(g, f)| (f - a0 * g).abs())
        .fold(0.0, f64::max);
    A0Fit {
        a0,
        sup_residual,
        grid,
        empirical,
    }
}

/// Fraction of quantile levels at which the pool for the larger α lies above
/// the pool for the smaller one by more than `slack` (relative).
pub fn stochastic_order_violations(smaller_alpha: &SamplePool, larger_alpha: &SamplePool, levels: usize, slack: f64) -> f64 {
    let a = smaller_alpha.sorted();
    let b = larger_alpha.sorted();
    let bad = (1..levels)
        .filter(|&i| {
            let p = i as f64 / levels as f64;
            stats::quantile_sorted(&b, p) > stats::quantile_sorted(&a, p) * (1.0 + slack)
        })
        .count();
    bad as f64 / (levels - 1) as f64
}

/// Empirical Laplace transform E[exp(-u W)] of a joint pool.
pub fn w_laplace(joint: &SamplePool, u: f64) -> Result<Estimate> {
    let w = joint
        .w
        .as_ref()
        .ok_or_else(|| Error::PoolMismatch("joint pool required".into()))?;
    let xs: Vec<f64> = w.iter().map(|w| (-u * w).exp()).collect();
    Ok(stats::mean_se(&xs))
}

/// Closed form 1 - u (1 + u^(α-1))^(-1/(α-1)).
pub fn w_laplace_exact(alpha: f64, u: f64) -> f64 {
    1.0 - u * (1.0 + u.powf(alpha - 1.0)).powf(-1.0 / (alpha - 1.0))
}

/// Summary of a full run at one α.
#[derive(Debug, Clone)]
pub struct RdeSolution {
    pub joint: SamplePool,
    pub chat: SamplePool,
    pub lambdas: Vec<LambdaEstimate>,
}

/// Joint pool, Ĉ pool (with the joint C marginal as companions) and all λ
/// estimators.
pub fn solve_all(cfg: &RdeConfig, streams: &Streams) -> Result<RdeSolution> {
    let joint = solve_w(cfg, streams)?;
    let chat = solve_chat(cfg, &joint, streams)?;
    let pools = Pools {
        joint: Some(&joint),
        c: None,
        chat: Some(&chat),
    };
    let lambdas = LambdaMethod::ALL
        .iter()
        .map(|&m| estimate_lambda(cfg.alpha, pools, m, cfg.sum_cap, cfg.block, streams))
        .collect::<Result<Vec<_>>>()?;
    Ok(RdeSolution { joint, chat, lambdas })
}

impl RdeSolution {
    pub fn lambda(&self, method: LambdaMethod) -> &LambdaEstimate {
        self.lambdas.iter().find(|l| l.method == method).expect("all methods computed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(alpha: f64) -> RdeConfig {
        RdeConfig {
            pool: 4000,
            iters: 20,
            readout: 4000,
            block: 512,
            ..RdeConfig::new(alpha)
        }
    }

    #[test]
    fn conductances_stay_above_one() {
        let p = solve_c(&small(1.5), &Streams::new(1)).unwrap();
        assert!(p.c.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn pool_is_thread_count_invariant() {
        let cfg = small(2.0);
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
            .install(|| solve_w(&cfg, &Streams::new(3)).unwrap());
        let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap()
            .install(|| solve_w(&cfg, &Streams::new(3)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_alpha_is_rejected() {
        let c = solve_c(&small(1.5), &Streams::new(1)).unwrap();
        assert!(matches!(
            solve_chat(&small(2.0), &c, &Streams::new(1)),
            Err(Error::PoolMismatch(_))
        ));
    }

    #[test]
    fn laplace_closed_form_at_two() {
        assert!((w_laplace_exact(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((w_laplace_exact(1.5, 2.0) - (1.0 - 2.0 / (1.0 + 2f64.sqrt()).powi(2))).abs() < 1e-14);
    }
}
