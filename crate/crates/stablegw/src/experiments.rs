//! Experiment drivers behind the command-line subcommands.
//!
//! Replicas are keyed by (seed, experiment, parameters, replica index) and
//! collected in replica order, so every output is independent of the number
//! of worker threads. Run inside a rayon pool to control parallelism.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::electric::{backward_stats, harmonic_measure, hit_prob_marked, sample_skeleton};
use crate::error::{Error, Result};
use crate::gwtree::{
    sample_backward, sample_conditioned, sample_marked_levels, sample_reduced_conditioned,
    sample_size_biased, sample_size_biased_reduced, BackwardMode, SizeBiased, Tree, TreeModel,
    DEFAULT_CAP,
};
use crate::offspring::{make_theta, size_bias};
use crate::rde::{self, LambdaEstimate, LambdaMethod, RdeConfig, RdeSolution};
use crate::record::{json_float, Check, Outcome, RecordSet};
use crate::rng::{tag, StreamRng, Streams};
use crate::stats::{self, Estimate};

/// Attempts per replica before a budget overflow becomes fatal.
pub const MAX_RETRIES: u64 = 64;

/// Parameters shared by all subcommands; unset options take per-command
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub gamma: Option<f64>,
    pub n_grid: Vec<u32>,
    pub pool: Option<usize>,
    pub iters: Option<usize>,
    pub readout: Option<usize>,
    pub replicas: Option<usize>,
    pub k_max: Option<usize>,
    pub exact_depth: Option<u32>,
    pub cap: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alphas: Vec::new(),
            gamma: None,
            n_grid: Vec::new(),
            pool: None,
            iters: None,
            readout: None,
            replicas: None,
            k_max: None,
            exact_depth: None,
            cap: DEFAULT_CAP,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    fn alphas_or(&self, default: &[f64]) -> Result<Vec<f64>> {
        let a = if self.alphas.is_empty() {
            default.to_vec()
        } else {
            self.alphas.clone()
        };
        for &x in &a {
            if !(x > 1.0 && x <= 2.0) {
                return Err(Error::Config(format!("alpha = {x} outside (1, 2]")));
            }
        }
        Ok(a)
    }

    fn n_grid_or(&self, default: &[u32]) -> Result<Vec<u32>> {
        let g = if self.n_grid.is_empty() {
            default.to_vec()
        } else {
            self.n_grid.clone()
        };
        if g.contains(&0) {
            return Err(Error::Config("generations must be positive".into()));
        }
        Ok(g)
    }

    fn positive(v: Option<usize>, default: usize, what: &str) -> Result<usize> {
        match v {
            Some(0) => Err(Error::Config(format!("{what} must be positive"))),
            Some(x) => Ok(x),
            None => Ok(default),
        }
    }

    fn rde(&self, alpha: f64, readout_default: usize) -> Result<RdeConfig> {
        let pool = Self::positive(self.pool, 100_000, "pool")?;
        Ok(RdeConfig {
            pool,
            iters: Self::positive(self.iters, 100, "iterations")?,
            readout: Self::positive(self.readout, readout_default, "readout")?,
            ..RdeConfig::new(alpha)
        })
    }

    fn model(&self, alpha: f64, n_max: usize) -> Result<TreeModel> {
        TreeModel::stable(alpha, self.gamma.unwrap_or(1.0 / alpha), n_max)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

fn alpha_key(alpha: f64) -> u64 {
    alpha.to_bits()
}

fn fmt_param(x: f64) -> String {
    format!("{x}")
}

/// Runs `f` with a fresh stream per attempt until it stops overflowing.
/// Returns the value and the number of discarded attempts.
fn with_retries<T, F>(streams: &Streams, key: (u64, u64, u64), f: F) -> Result<(T, u64)>
where
    F: Fn(&mut StreamRng) -> Result<T>,
{
    let mut last = Error::Overflow { cap: 0 };
    for attempt in 0..MAX_RETRIES {
        let s = if attempt == 0 { *streams } else { streams.derive(tag::REPLICA, attempt) };
        let mut rng = s.stream(key.0, key.1, key.2);
        match f(&mut rng) {
            Ok(v) => return Ok((v, attempt)),
            Err(e @ Error::Overflow { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Per-replica values in replica order, plus the overflow count.
fn replicate<F>(streams: &Streams, key: (u64, u64), replicas: usize, f: F) -> Result<(Vec<f64>, u64)>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    let out: Vec<Result<(f64, u64)>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| with_retries(streams, (key.0, key.1, r), &f))
        .collect();
    let mut vals = Vec::with_capacity(replicas);
    let mut overflows = 0;
    for r in out {
        let (v, o) = r?;
        vals.push(v);
        overflows += o;
    }
    Ok((vals, overflows))
}

fn est_json(e: &Estimate) -> Value {
    json!({ "value": json_float(e.value), "stderr": json_float(e.stderr), "n_samples": e.n })
}

fn lambda_json(m: &mut Map<String, Value>, key: &str, l: &LambdaEstimate) {
    m.insert(key.into(), json_float(l.lambda));
    m.insert(format!("{key}_stderr"), json_float(l.stderr));
}

fn solve_reference(cfg: &ExperimentConfig, alpha: f64, readout: usize) -> Result<RdeSolution> {
    let streams = Streams::new(cfg.seed).derive(tag::POOL_C, alpha_key(alpha));
    rde::solve_all(&cfg.rde(alpha, readout)?, &streams)
}

/// The λ estimate used as reference by the other experiments.
pub const REFERENCE_METHOD: LambdaMethod = LambdaMethod::BiasedLogratio;

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

/// Population-dynamics solution at each α, all λ estimators and the
/// fixed-point diagnostics.
pub fn cmd_rde_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let alphas = cfg.alphas_or(&[2.0])?;
    let mut records = RecordSet::new("rde-solve", &["alpha", "method"]);
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &alpha in &alphas {
        let rc = cfg.rde(alpha, 1_000_000)?;
        let sol = solve_reference(cfg, alpha, 1_000_000)?;
        let diag = Streams::new(cfg.seed).derive(tag::DIAGNOSTIC, alpha_key(alpha));
        for l in &sol.lambdas {
            records.push(&[fmt_param(alpha), l.method.name().into()], "lambda", l.as_estimate())?;
        }
        let mut m = Map::new();
        m.insert("alpha".into(), json_float(alpha));
        lambda_json(&mut m, "lambda_chat_mean", sol.lambda(LambdaMethod::ChatMean));
        lambda_json(&mut m, "lambda_wc_mean", sol.lambda(LambdaMethod::WcMean));
        lambda_json(&mut m, "lambda_direct", sol.lambda(LambdaMethod::DirectLogratio));
        lambda_json(&mut m, "lambda_biased", sol.lambda(LambdaMethod::BiasedLogratio));
        let w = sol.joint.w.as_ref().expect("joint pool");
        m.insert("mean_w".into(), est_json(&stats::mean_se(w)));
        m.insert("mean_c".into(), est_json(&stats::mean_se(&sol.joint.c)));
        let ident = rde::log_identity_residual(&sol.chat, &sol.joint, rc.sum_cap, rc.block, &diag)?;
        m.insert("log_identity_residual".into(), est_json(&ident));
        let mut odes = Map::new();
        for ell in [0.5, 1.0, 2.0] {
            let r = rde::laplace_ode_residual(&sol.chat, &sol.joint, ell)?;
            odes.insert(format!("{ell}"), est_json(&r));
        }
        m.insert("laplace_ode_residual".into(), Value::Object(odes));
        let fit = rde::fit_a0(&sol.chat, 50);
        m.insert("a0".into(), json_float(fit.a0));
        m.insert("a0_sup_residual".into(), json_float(fit.sup_residual));
        let k = (sol.chat.len() / 100).max(10);
        m.insert("hill_chat".into(), json_float(stats::hill(&sol.chat.c, k)));
        m.insert(
            "displacement_c".into(),
            json_float(*sol.joint.displacement.last().unwrap_or(&f64::NAN)),
        );
        m.insert(
            "displacement_chat".into(),
            json_float(*sol.chat.displacement.last().unwrap_or(&f64::NAN)),
        );
        results.push(Value::Object(m));

        let main = sol.lambda(REFERENCE_METHOD);
        checks.push(Check::new(
            &format!("lambda_above_bound[alpha={alpha}]"),
            main.exceeds_bound(3.0),
            format!("{:.5} ± {:.5} vs 1/(alpha-1) = {:.5}", main.lambda, main.stderr, 1.0 / (alpha - 1.0)),
        ));
        let trio = [LambdaMethod::ChatMean, LambdaMethod::DirectLogratio, LambdaMethod::BiasedLogratio];
        let worst = trio
            .iter()
            .flat_map(|&a| trio.iter().map(move |&b| (a, b)))
            .map(|(a, b)| sol.lambda(a).as_estimate().z_distance(&sol.lambda(b).as_estimate()))
            .fold(0.0, f64::max);
        checks.push(Check::new(
            &format!("estimators_agree[alpha={alpha}]"),
            worst <= 3.0,
            format!("largest pairwise distance {worst:.2} combined sigma"),
        ));
    }
    Ok(Outcome {
        records,
        summary: json!({ "experiment": "rde-solve", "seed": cfg.seed, "results": results }),
        checks,
    })
}

pub const SWEEP_GRID: [f64; 19] = [
    1.10, 1.15, 1.20, 1.25, 1.30, 1.35, 1.40, 1.45, 1.50, 1.55, 1.60, 1.65, 1.70, 1.75, 1.80,
    1.85, 1.90, 1.95, 2.00,
];

/// λ across an α grid, with (α-1)λ and (α-1)²λ.
pub fn cmd_lambda_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut alphas = cfg.alphas_or(&SWEEP_GRID)?;
    alphas.sort_by(f64::total_cmp);
    let mut records = RecordSet::new("lambda-sweep", &["alpha"]);
    let mut rows = Vec::new();
    let mut lambdas: Vec<LambdaEstimate> = Vec::new();
    let mut order_violations = Vec::new();
    let mut prev_chat: Option<rde::SamplePool> = None;
    for &alpha in &alphas {
        let sol = solve_reference(cfg, alpha, 100_000)?;
        let l = *sol.lambda(REFERENCE_METHOD);
        let p = [fmt_param(alpha)];
        let e = l.as_estimate();
        let scaled = |f: f64| Estimate { value: e.value * f, stderr: e.stderr * f, n: e.n };
        records.push(&p, "lambda", e)?;
        records.push(&p, "lambda_chat_mean", sol.lambda(LambdaMethod::ChatMean).as_estimate())?;
        records.push(&p, "alpha_minus_1_lambda", scaled(alpha - 1.0))?;
        records.push(&p, "alpha_minus_1_sq_lambda", scaled((alpha - 1.0).powi(2)))?;
        if let Some(prev) = &prev_chat {
            order_violations.push(rde::stochastic_order_violations(prev, &sol.chat, 100, 0.0));
        }
        rows.push(json!({
            "alpha": json_float(alpha),
            "lambda": json_float(l.lambda),
            "lambda_stderr": json_float(l.stderr),
            "alpha_minus_1_sq_lambda": json_float((alpha - 1.0).powi(2) * l.lambda),
        }));
        lambdas.push(l);
        prev_chat = Some(sol.chat);
    }
    let mut checks = Vec::new();
    let pairs: Vec<(&LambdaEstimate, &LambdaEstimate)> = lambdas.iter().zip(lambdas.iter().skip(1)).collect();
    let decreasing = pairs.iter().all(|(a, b)| {
        let s = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        b.lambda - a.lambda <= 3.0 * s
    });
    checks.push(Check::new("lambda_decreasing", decreasing, "consecutive grid points, 3 combined sigma".into()));
    let scaled_increasing = pairs.iter().all(|(a, b)| {
        let (fa, fb) = (a.alpha - 1.0, b.alpha - 1.0);
        let s = ((fa * a.stderr).powi(2) + (fb * b.stderr).powi(2)).sqrt();
        fb * b.lambda - fa * a.lambda <= 3.0 * s
    });
    checks.push(Check::new(
        "scaled_lambda_grows_as_alpha_decreases",
        scaled_increasing,
        "(alpha-1) lambda, 3 combined sigma".into(),
    ));
    let window = lambdas.iter().all(|l| {
        let v = (l.alpha - 1.0).powi(2) * l.lambda;
        (0.2..=20.0).contains(&v)
    });
    checks.push(Check::new("window", window, "(alpha-1)^2 lambda in [0.2, 20]".into()));
    let bound = lambdas.iter().all(|l| l.exceeds_bound(3.0));
    checks.push(Check::new("lambda_above_bound", bound, "3 sigma above 1/(alpha-1)".into()));
    let worst = order_violations.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::new(
        "stochastic_order",
        worst < 0.05,
        format!("largest fraction of violating quantiles {worst:.3}"),
    ));
    Ok(Outcome {
        records,
        summary: json!({ "experiment": "lambda-sweep", "seed": cfg.seed, "results": rows }),
        checks,
    })
}

/// Slope of a per-n statistic against log n.
fn scaling_fit(ns: &[u32], means: &[Estimate]) -> stats::LineFit {
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = means.iter().map(|e| e.value).collect();
    let se: Vec<f64> = means.iter().map(|e| e.stderr).collect();
    stats::wls(&x, &y, &se)
}

fn check_grid(ns: &[u32]) -> Result<()> {
    if ns.len() < 2 {
        return Err(Error::Config("a slope needs at least two values of n".into()));
    }
    Ok(())
}

/// -log P(first hit of generation n is the marked spine tip) in the
/// size-biased tree, against log n.
pub fn cmd_thm1_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let alphas = cfg.alphas_or(&[2.0])?;
    let ns = cfg.n_grid_or(&[16, 32, 64, 128, 256, 512, 1024])?;
    check_grid(&ns)?;
    let replicas = ExperimentConfig::positive(cfg.replicas, 2000, "replicas")?;
    let mut records = RecordSet::new("thm1-scaling", &["alpha", "n"]);
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &alpha in &alphas {
        let n_max = *ns.iter().max().unwrap() as usize;
        let model = cfg.model(alpha, n_max)?;
        let streams = Streams::new(cfg.seed).derive(tag::REPLICA, alpha_key(alpha));
        let mut means = Vec::new();
        let mut overflows = 0;
        for &n in &ns {
            let (xs, o) = replicate(&streams, (1, n as u64), replicas, |rng| {
                let t = sample_size_biased_reduced(&model, n, cfg.cap, rng)?;
                Ok(-hit_prob_marked(&t)?)
            })?;
            overflows += o;
            let e = stats::mean_se(&xs);
            let p = [fmt_param(alpha), n.to_string()];
            records.push(&p, "neg_log_p", e)?;
            let ln = (n as f64).ln();
            records.push(&p, "neg_log_p_over_log_n", Estimate { value: e.value / ln, stderr: e.stderr / ln, n: e.n })?;
            means.push(e);
        }
        let fit = scaling_fit(&ns, &means);
        let total = replicas * ns.len();
        let p = [fmt_param(alpha), "all".into()];
        records.push(&p, "slope", Estimate { value: fit.slope, stderr: fit.slope_stderr, n: total })?;
        let rate = overflows as f64 / (total as u64 + overflows) as f64;
        records.push(&p, "overflow_rate", Estimate { value: rate, stderr: 0.0, n: total })?;
        let lam = *solve_reference(cfg, alpha, 200_000)?.lambda(REFERENCE_METHOD);
        records.push(&p, "lambda_rde", lam.as_estimate())?;
        checks.push(Check::new(
            &format!("slope_matches_lambda[alpha={alpha}]"),
            within(fit.slope, lam.lambda, 0.15),
            format!("slope {:.4} ± {:.4}, lambda {:.4}", fit.slope, fit.slope_stderr, lam.lambda),
        ));
        let last = means.last().unwrap().value / (*ns.last().unwrap() as f64).ln();
        checks.push(Check::new(
            &format!("exceeds_dimension[alpha={alpha}]"),
            last > 1.0 / (alpha - 1.0),
            format!("-log P / log n = {last:.4} at the largest n"),
        ));
        results.push(json!({
            "alpha": json_float(alpha),
            "slope": json_float(fit.slope),
            "slope_stderr": json_float(fit.slope_stderr),
            "lambda_rde": json_float(lam.lambda),
            "lambda_rde_stderr": json_float(lam.stderr),
            "overflow_rate": json_float(rate),
            "tolerance_note": "the 15% slope tolerance is an engineering choice for finite n",
        }));
    }
    Ok(Outcome {
        records,
        summary: json!({ "experiment": "thm1-scaling", "seed": cfg.seed, "results": results }),
        checks,
    })
}

/// -Σ μ log μ of the level-n harmonic measure of conditioned trees, against
/// log n.
pub fn cmd_beta_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let alphas = cfg.alphas_or(&[1.5, 2.0])?;
    let ns = cfg.n_grid_or(&[16, 32, 64, 128, 256])?;
    check_grid(&ns)?;
    let replicas = ExperimentConfig::positive(cfg.replicas, 500, "replicas")?;
    let mut records = RecordSet::new("beta-scaling", &["alpha", "n"]);
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &alpha in &alphas {
        let n_max = *ns.iter().max().unwrap() as usize;
        let model = cfg.model(alpha, n_max)?;
        let streams = Streams::new(cfg.seed).derive(tag::REPLICA, alpha_key(alpha));
        let mut means = Vec::new();
        for &n in &ns {
            let (xs, _) = replicate(&streams, (2, n as u64), replicas, |rng| {
                let t = sample_reduced_conditioned(&model, n, cfg.cap, rng)?;
                Ok(-harmonic_measure(&t, n)?.entropy_sum())
            })?;
            let e = stats::mean_se(&xs);
            records.push(&[fmt_param(alpha), n.to_string()], "entropy", e)?;
            means.push(e);
        }
        let fit = scaling_fit(&ns, &means);
        let total = replicas * ns.len();
        let p = [fmt_param(alpha), "all".into()];
        records.push(&p, "beta", Estimate { value: fit.slope, stderr: fit.slope_stderr, n: total })?;
        let lam = *solve_reference(cfg, alpha, 200_000)?.lambda(REFERENCE_METHOD);
        records.push(&p, "lambda_rde", lam.as_estimate())?;
        let dim = 1.0 / (alpha - 1.0);
        checks.push(Check::new(
            &format!("beta_below_dimension_below_lambda[alpha={alpha}]"),
            fit.slope > 0.0 && fit.slope < dim && dim < lam.lambda,
            format!("beta {:.4} ± {:.4}, 1/(alpha-1) {:.4}, lambda {:.4}", fit.slope, fit.slope_stderr, dim, lam.lambda),
        ));
        results.push(json!({
            "alpha": json_float(alpha),
            "beta": json_float(fit.slope),
            "beta_stderr": json_float(fit.slope_stderr),
            "lambda_rde": json_float(lam.lambda),
        }));
    }
    Ok(Outcome {
        records,
        summary: json!({ "experiment": "beta-scaling", "seed": cfg.seed, "results": results }),
        checks,
    })
}

/// Marked levels, Q averages and the hitting recurrence on the backward
/// spine.
pub fn cmd_backward(cfg: &ExperimentConfig) -> Result<Outcome> {
    let alphas = cfg.alphas_or(&[2.0])?;
    let ns = cfg.n_grid_or(&[10_000])?;
    let replicas = ExperimentConfig::positive(cfg.replicas, 500, "replicas")?;
    let k_max = ExperimentConfig::positive(cfg.k_max, 200, "k")?;
    let depth = cfg.exact_depth.unwrap_or(1000);
    let mut records = RecordSet::new("backward", &["alpha", "n", "k"]);
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &alpha in &alphas {
        let streams = Streams::new(cfg.seed).derive(tag::REPLICA, alpha_key(alpha));
        let limit = alpha / (alpha - 1.0);
        for &n in &ns {
            let model = cfg.model(alpha, n as usize)?;
            let (kn, _) = replicate(&streams, (3, n as u64), 2 * replicas, |rng| {
                Ok(sample_marked_levels(&model, n, rng)?.len() as f64)
            })?;
            let ln = (n as f64).ln();
            let e = stats::mean_se(&kn);
            let e = Estimate { value: e.value / ln, stderr: e.stderr / ln, n: e.n };
            records.push(&[fmt_param(alpha), n.to_string(), "-".into()], "kn_over_log_n", e)?;
            checks.push(Check::new(
                &format!("kn_over_log_n[alpha={alpha},n={n}]"),
                (0.8 * limit..=1.2 * limit).contains(&e.value),
                format!("{:.4} ± {:.4}, limit {limit:.3}", e.value, e.stderr),
            ));
        }

        let exact_n = 400u32;
        let small = cfg.model(alpha, exact_n as usize)?;
        let (exact_res, _) = replicate(&streams, (4, 0), 20, |rng| {
            let bt = sample_backward(&small, exact_n, BackwardMode::Reduced, cfg.cap, rng)?;
            if bt.k_n() < 2 {
                return Ok(0.0);
            }
            Ok(backward_stats(&bt, bt.k_n() - 1)?.recurrence_residual())
        })?;

        let sol = solve_reference(cfg, alpha, 200_000)?;
        let lam = *sol.lambda(REFERENCE_METHOD);
        let c_limit = &sol.joint.c;
        let deep = cfg.model(alpha, depth as usize)?;
        let theta_hat = size_bias(&make_theta(alpha)?)?;
        let out: Vec<Result<((f64, f64), u64)>> = (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                with_retries(&streams, (5, k_max as u64, r), |rng| {
                    let sk = sample_skeleton(&deep, &theta_hat, k_max + 1, depth, c_limit, cfg.cap, rng)?;
                    let st = sk.stats(k_max)?;
                    Ok((st.q_average(), st.recurrence_residual()))
                })
            })
            .collect();
        let mut q = Vec::with_capacity(replicas);
        let mut res = exact_res.clone();
        for r in out {
            let ((a, b), _) = r?;
            q.push(a);
            res.push(b);
        }
        let worst = res.iter().cloned().fold(0.0, f64::max);
        let qe = stats::mean_se(&q);
        let kp = [fmt_param(alpha), "-".into(), k_max.to_string()];
        records.push(&kp, "q_average", qe)?;
        records.push(&kp, "recurrence_residual_max", Estimate { value: worst, stderr: 0.0, n: res.len() })?;
        let target = (alpha - 1.0) * lam.lambda / alpha;
        records.push(&kp, "q_target", Estimate { value: target, stderr: (alpha - 1.0) * lam.stderr / alpha, n: lam.n_samples })?;
        let constant = 2f64.powf(2.0 * alpha / (alpha - 1.0));
        records.push(&kp, "reduction_constant", Estimate { value: constant, stderr: 0.0, n: 1 })?;
        checks.push(Check::new(
            &format!("recurrence_residual[alpha={alpha}]"),
            worst < 1e-9,
            format!("largest residual {worst:.3e} over {} replicas", res.len()),
        ));
        checks.push(Check::new(
            &format!("q_average[alpha={alpha}]"),
            within(qe.value, target, 0.15),
            format!("{:.4} ± {:.4} vs (alpha-1) lambda / alpha = {target:.4}", qe.value, qe.stderr),
        ));
        results.push(json!({
            "alpha": json_float(alpha),
            "q_average": json_float(qe.value),
            "q_average_stderr": json_float(qe.stderr),
            "q_target": json_float(target),
            "recurrence_residual_max": json_float(worst),
            "reduction_constant": json_float(constant),
            "exact_depth": depth,
        }));
    }
    Ok(Outcome {
        records,
        summary: json!({ "experiment": "backward", "seed": cfg.seed, "results": results }),
        checks,
    })
}

/// Tree families available to `tree-dump`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Conditioned,
    Reduced,
    SizeBiased,
    Backward,
}

/// One sampled tree in the "id parent generation" format.
pub fn cmd_tree_dump(cfg: &ExperimentConfig, kind: DumpKind) -> Result<String> {
    let alpha = cfg.alphas_or(&[2.0])?[0];
    let n = cfg.n_grid_or(&[8])?[0];
    let model = cfg.model(alpha, n as usize)?;
    let streams = Streams::new(cfg.seed);
    let (tree, _): (Tree, u64) = with_retries(&streams, (6, n as u64, 0), |rng| match kind {
        DumpKind::Conditioned => sample_conditioned(&model, n, cfg.cap, rng),
        DumpKind::Reduced => sample_reduced_conditioned(&model, n, cfg.cap, rng),
        DumpKind::SizeBiased => sample_size_biased(&model, n, SizeBiased::Truncated, cfg.cap, rng),
        DumpKind::Backward => Ok(sample_backward(&model, n, BackwardMode::Full, cfg.cap, rng)?.tree),
    })?;
    let mut out = Vec::new();
    tree.dump(&mut out)?;
    Ok(String::from_utf8(out).expect("ascii dump"))
}
