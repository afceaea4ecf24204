use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stablegw::experiments::{self, DumpKind, ExperimentConfig};
use stablegw::record::Outcome;
use stablegw::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "stablegw", version, about = "Harmonic-measure experiments on stable Galton-Watson trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Solve the conductance fixed point and estimate lambda.
    RdeSolve,
    /// Hitting probability of the marked tip against log n.
    Thm1Scaling,
    /// Harmonic-measure entropy against log n.
    BetaScaling,
    /// Backward-spine statistics.
    Backward,
    /// Lambda across a grid of alpha.
    LambdaSweep,
    /// Print one sampled tree as "id parent generation" lines.
    TreeDump {
        #[arg(long, value_enum, default_value_t = Kind::Reduced)]
        kind: Kind,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Kind {
    Conditioned,
    Reduced,
    SizeBiased,
    Backward,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Comma list, or start:step:end.
    #[arg(long, global = true, conflicts_with = "alpha")]
    alpha_grid: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Comma list, or start:step:end.
    #[arg(long, global = true)]
    n_grid: Option<String>,
    #[arg(long, global = true)]
    pool: Option<usize>,
    #[arg(long, global = true)]
    iters: Option<usize>,
    /// Samples used by the lambda estimators after the pool has converged.
    #[arg(long, global = true)]
    readout: Option<usize>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Spine length for the backward Q averages.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Depth up to which backward skeletons are sampled exactly.
    #[arg(long, global = true)]
    exact_depth: Option<u32>,
    /// Vertex budget per sampled tree.
    #[arg(long, global = true, default_value_t = stablegw::gwtree::DEFAULT_CAP)]
    cap: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse {what} grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let (start, step, end) = (v[0], v[1], v[2]);
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        // Rounded to 12 decimals so that 1.1 + 3 * 0.05 prints as 1.25.
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn config(c: &Common) -> Result<ExperimentConfig> {
    let alphas = match (&c.alpha, &c.alpha_grid) {
        (Some(a), _) => vec![*a],
        (None, Some(g)) => parse_grid(g, "alpha")?,
        (None, None) => Vec::new(),
    };
    let n_grid = match &c.n_grid {
        Some(g) => parse_grid(g, "n")?
            .into_iter()
            .map(|x| {
                if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                    Ok(x as u32)
                } else {
                    Err(Error::Config(format!("generation {x} is not a positive integer")))
                }
            })
            .collect::<Result<Vec<u32>>>()?,
        None => Vec::new(),
    };
    if c.threads == 0 || c.cap == 0 {
        return Err(Error::Config("threads and cap must be positive".into()));
    }
    if let Some(g) = c.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("gamma = {g} must be positive")));
        }
    }
    Ok(ExperimentConfig {
        alphas,
        gamma: c.gamma,
        n_grid,
        pool: c.pool,
        iters: c.iters,
        readout: c.readout,
        replicas: c.replicas,
        k_max: c.k,
        exact_depth: c.exact_depth,
        cap: c.cap,
        seed: c.seed,
    })
}

fn json_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn emit(outcome: &Outcome, c: &Common) -> Result<()> {
    let primary = match c.format {
        Format::Csv => outcome.records.to_csv(),
        Format::Json => outcome.to_json(),
    };
    match &c.out {
        Some(path) => {
            std::fs::write(path, primary)?;
            if c.format == Format::Csv {
                std::fs::write(json_path(path), outcome.to_json())?;
            }
        }
        None => print!("{primary}"),
    }
    for check in &outcome.checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        eprintln!("{tag} {}: {}", check.name, check.detail);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = config(&cli.common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let outcome = match cli.cmd {
            Cmd::RdeSolve => experiments::cmd_rde_solve(&cfg)?,
            Cmd::Thm1Scaling => experiments::cmd_thm1_scaling(&cfg)?,
            Cmd::BetaScaling => experiments::cmd_beta_scaling(&cfg)?,
            Cmd::Backward => experiments::cmd_backward(&cfg)?,
            Cmd::LambdaSweep => experiments::cmd_lambda_sweep(&cfg)?,
            Cmd::TreeDump { kind } => {
                let kind = match kind {
                    Kind::Conditioned => DumpKind::Conditioned,
                    Kind::Reduced => DumpKind::Reduced,
                    Kind::SizeBiased => DumpKind::SizeBiased,
                    Kind::Backward => DumpKind::Backward,
                };
                let text = experiments::cmd_tree_dump(&cfg, kind)?;
                match &cli.common.out {
                    Some(p) => std::fs::write(p, text)?,
                    None => print!("{text}"),
                }
                return Ok(true);
            }
        };
        emit(&outcome, &cli.common)?;
        Ok(outcome.passed())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Overflow { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
