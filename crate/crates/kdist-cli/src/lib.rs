//! Subcommands of the `kdist` binary. Each `cmd_*` returns the bytes to emit
//! so the same code serves the binary and the tests.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use kdist::classical_metrics::{compare_metrics, weak_convergence_table, Check};
use kdist::constructions::{
    construct_dirichlet_uniform, construct_sinc_cauchy, construct_torus_flat, eigen_small_mmd, perturb_sinusoid,
};
use kdist::kernels::KernelFamily;
use kdist::measures::GridDensity1D;
use kdist::mmd::{
    gamma_sq, gamma_sq_density, gamma_sq_discrete, gamma_sq_spectral, gamma_sq_torus, mmd_u_statistic, mmd_v_statistic,
    torus_truncation, Path,
};
use kdist::parse::{parse_kernel, parse_measure};
use kdist::testing::{permutation_test, rejection_rate, DEFAULT_PERMUTATIONS};
use kdist::{ConstructedPair, Kernel, MMDResult, Measure};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] kdist::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_validation() => 2,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        <Format as ValueEnum>::from_str(s, true).or_else(|_| usage(format!("unknown format '{s}' (csv or json)")))
    }
}

/// Flat key=value settings; `#` starts a comment. Command-line flags take
/// precedence over values read from a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub kernel: Option<String>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub grid: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .or_else(|_| usage(format!("bad value '{v}' for {key}")))
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> CliResult<Self> {
        let mut c = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key=value", i + 1));
            };
            let (key, value) = (key.trim(), value.trim().to_string());
            match key {
                "experiment" => c.experiment = Some(value),
                "kernel" => c.kernel = Some(value),
                "p" => c.p = Some(value),
                "q" => c.q = Some(value),
                "grid" | "nu" | "n" => c.grid = Some(parse_grid(&value)?),
                "alpha" => c.alpha = Some(num(key, &value)?),
                "m" => c.m = Some(num(key, &value)?),
                "trials" => c.trials = Some(num(key, &value)?),
                "seed" => c.seed = Some(num(key, &value)?),
                "out" => c.out = Some(PathBuf::from(value)),
                "format" => c.format = Some(value.parse()?),
                _ => return usage(format!("config line {}: unknown key '{key}'", i + 1)),
            }
        }
        Ok(c)
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        fs::read_to_string(path)?.parse()
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ExperimentConfig) -> Self {
        ExperimentConfig {
            experiment: over.experiment.or(self.experiment),
            kernel: over.kernel.or(self.kernel),
            p: over.p.or(self.p),
            q: over.q.or(self.q),
            grid: over.grid.or(self.grid),
            alpha: over.alpha.or(self.alpha),
            m: over.m.or(self.m),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    fn kernel(&self) -> CliResult<Kernel> {
        match &self.kernel {
            Some(s) => Ok(parse_kernel(s)?),
            None => usage("a kernel is required (-k)"),
        }
    }

    fn measure(&self, which: &str) -> CliResult<Measure> {
        let text = if which == "p" { &self.p } else { &self.q };
        match text {
            Some(s) => Ok(parse_measure(s)?),
            None => usage(format!("measure {which} is required (-{which})")),
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// `a:b:step`, `a..b` (integers, inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (i64, i64) = (num("range", a)?, num("range", b)?);
        if b < a {
            return usage(format!("empty range {s}"));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h): (f64, f64, f64) = (num("grid", parts[0])?, num("grid", parts[1])?, num("grid", parts[2])?);
        if h.is_nan() || h <= 0.0 || b < a {
            return usage(format!("bad grid {s}"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * h).collect());
    }
    s.split(',').map(|v| num("grid", v)).collect()
}

fn json<S: Serialize + ?Sized>(v: &S) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Output(e.to_string()))
}

fn csv_rows<S: Serialize>(rows: &[S]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn emit<S: Serialize>(v: &S, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json(v),
        Format::Csv => csv_rows(std::slice::from_ref(v)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathChoice {
    Auto,
    Discrete,
    Density,
    Spectral,
    Torus,
    Closed,
}

pub fn cmd_gamma(cfg: &ExperimentConfig, path: PathChoice) -> CliResult<String> {
    let (k, p, q) = (cfg.kernel()?, cfg.measure("p")?, cfg.measure("q")?);
    let r: MMDResult = match path {
        PathChoice::Auto => gamma_sq(&k, &p, &q)?,
        PathChoice::Discrete => match (p.as_discrete(), q.as_discrete()) {
            (Some(a), Some(b)) => gamma_sq_discrete(&k, a, b),
            _ => return usage("the discrete path needs two discrete measures"),
        },
        PathChoice::Density => gamma_sq_density(&k, &p, &q)?,
        PathChoice::Spectral => gamma_sq_spectral(&k, &p, &q)?,
        PathChoice::Torus => match &k.family {
            KernelFamily::Torus(t) => gamma_sq_torus(t, &p, &q, torus_truncation(t, 1e-16, 256))?,
            _ => return usage("the torus path needs a torus kernel"),
        },
        PathChoice::Closed => {
            let r = gamma_sq(&k, &p, &q)?;
            if r.path != Path::ClosedForm {
                return usage(
                    "no closed form for this kernel and pair (needs a Gaussian kernel and Gaussian measures)",
                );
            }
            r
        }
    };
    emit(&r, cfg.format.unwrap_or(Format::Json))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Statistic {
    U,
    V,
}

pub fn cmd_estimate(cfg: &ExperimentConfig, stat: Statistic) -> CliResult<String> {
    let (k, p, q) = (cfg.kernel()?, cfg.measure("p")?, cfg.measure("q")?);
    let m = cfg.m.unwrap_or(250);
    let x = p.sample_stream(m, cfg.seed(), 0)?;
    let y = q.sample_stream(m, cfg.seed(), 1)?;
    let r = match stat {
        Statistic::U => mmd_u_statistic(&k, &x, &y)?,
        Statistic::V => mmd_v_statistic(&k, &x, &y)?,
    };
    emit(&r, cfg.format.unwrap_or(Format::Json))
}

#[derive(Serialize)]
struct ClassifyRow {
    kernel: String,
    verdict: String,
    reason: String,
}

pub fn cmd_classify(cfg: &ExperimentConfig) -> CliResult<String> {
    let k = cfg.kernel()?;
    let c = k.classify();
    match cfg.format {
        None => Ok(format!("{c}\n")),
        Some(f) => emit(
            &ClassifyRow {
                kernel: k.to_string(),
                verdict: c.verdict.to_string(),
                reason: c.reason,
            },
            f,
        ),
    }
}

/// Parameters of the `construct` subcommand; unset values take the
/// defaults of each construction.
#[derive(Debug, Clone, Default, Args)]
pub struct ConstructArgs {
    /// dirichlet-uniform, sinc-cauchy, torus-flat or eigen-small
    pub name: String,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of sinc factors in the sinc-cauchy perturbation
    #[arg(long = "n")]
    pub n: Option<u32>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Comma-separated frequency vector for torus-flat
    #[arg(long)]
    pub n0: Option<String>,
    /// Grid size for eigen-small
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    /// Write the pair, tabulated on `points` nodes, to this file as JSON
    #[arg(long)]
    pub emit: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

fn build_pair(cfg: &ExperimentConfig, a: &ConstructArgs) -> CliResult<ConstructedPair> {
    Ok(match a.name.as_str() {
        "dirichlet-uniform" => construct_dirichlet_uniform(
            a.tau.unwrap_or(2.0),
            a.l.unwrap_or(2),
            a.beta.unwrap_or(3.0),
            a.alpha.unwrap_or(0.125),
        )?,
        "sinc-cauchy" => {
            let beta = a.beta.unwrap_or(2.0 * std::f64::consts::PI);
            construct_sinc_cauchy(
                beta,
                a.n.unwrap_or(2),
                a.omega0.unwrap_or(2.0 * beta),
                a.alpha.unwrap_or(0.02),
            )?
        }
        "torus-flat" => {
            let n0: Vec<i64> = match &a.n0 {
                Some(s) => s.split(',').map(|v| num("n0", v)).collect::<CliResult<_>>()?,
                None => vec![1; a.d.unwrap_or(1)],
            };
            let d = a.d.unwrap_or(n0.len());
            let pair = construct_torus_flat(d, n0, a.alpha.unwrap_or(0.05))?;
            match cfg.kernel.as_deref().map(parse_kernel::<f64>).transpose()? {
                Some(k) => match k.family {
                    KernelFamily::Torus(t) => pair.with_torus_kernel(t)?,
                    _ => return usage("torus-flat needs a torus kernel"),
                },
                None => pair,
            }
        }
        "eigen-small" => {
            let k = match &cfg.kernel {
                Some(s) => parse_kernel(s)?,
                None => Kernel::bspline(0),
            };
            let q = match cfg.measure("q") {
                Ok(Measure::Analytic(a)) => a,
                Ok(_) => return usage("eigen-small needs an analytic base density"),
                Err(_) => kdist::measures::Analytic1D::uniform(-1.0, 1.0)?,
            };
            let grid = GridDensity1D::from_analytic(&q, a.grid_points)?;
            eigen_small_mmd(&k, &grid, a.l.map(|l| l as usize).unwrap_or(10), a.tau.unwrap_or(0.05))?
        }
        other => return usage(format!("unknown construction '{other}'")),
    })
}

pub fn cmd_construct(cfg: &ExperimentConfig, a: &ConstructArgs) -> CliResult<String> {
    let pair = build_pair(cfg, a)?;
    if let Some(path) = &a.emit {
        fs::write(path, json(&pair.record(a.points))?)?;
    }
    let record = pair.record(a.points);
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json(&pair.record(0)),
        Format::Csv => match &record.grid {
            Some(g) => {
                let rows: Vec<(f64, f64, f64)> = (0..g.x.len()).map(|i| (g.x[i], g.p[i], g.q[i])).collect();
                Ok(format!("x,p,q\n{}", csv_rows(&rows)?))
            }
            None => usage("this construction has no one-dimensional density grid"),
        },
    }
}

#[derive(Serialize)]
struct CheckRow<'a> {
    id: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    pass: bool,
}

pub fn cmd_compare(cfg: &ExperimentConfig) -> CliResult<String> {
    let (k, p, q) = (cfg.kernel()?, cfg.measure("p")?, cfg.measure("q")?);
    let (Some(a), Some(b)) = (p.as_discrete(), q.as_discrete()) else {
        return usage("compare needs two discrete measures");
    };
    let r = compare_metrics(&k, a, b)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json(&r),
        Format::Csv => {
            let rows: Vec<CheckRow> = r
                .checks
                .iter()
                .map(|c: &Check| CheckRow {
                    id: &c.id,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    slack: c.slack(),
                    pass: c.pass,
                })
                .collect();
            csv_rows(&rows)
        }
    }
}

pub fn cmd_weak(cfg: &ExperimentConfig) -> CliResult<String> {
    let k = cfg.kernel()?;
    let grid = cfg.grid.clone().unwrap_or_else(|| (1..=10).map(f64::from).collect());
    let ns = grid
        .iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as u32)
            } else {
                usage(format!("n must be a positive integer, got {v}"))
            }
        })
        .collect::<CliResult<Vec<u32>>>()?;
    let t = weak_convergence_table(&k, &ns)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&t),
        Format::Csv => csv_rows(&t.rows),
    }
}

/// Settings of the `test` subcommand.
#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// Number of label permutations B
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Repeat on fresh samples and report the rejection rate
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
}

pub fn cmd_test(cfg: &ExperimentConfig, a: &TestArgs) -> CliResult<String> {
    let (k, p, q) = (cfg.kernel()?, cfg.measure("p")?, cfg.measure("q")?);
    let m = cfg.m.unwrap_or(100);
    let format = cfg.format.unwrap_or(Format::Json);
    if a.reps > 1 {
        let r = rejection_rate(&k, &p, &q, m, a.permutations, a.level, a.reps, cfg.seed())?;
        return match format {
            Format::Json => json(&r),
            Format::Csv => {
                let rows: Vec<(usize, f64)> = r.p_values.iter().copied().enumerate().collect();
                Ok(format!("rep,p_value\n{}", csv_rows(&rows)?))
            }
        };
    }
    let x = p.sample_stream(m, cfg.seed(), 0)?;
    let y = q.sample_stream(m, cfg.seed(), 1)?;
    emit(
        &permutation_test(&k, &x, &y, a.permutations, a.level, cfg.seed())?,
        format,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig5Row {
    pub nu: f64,
    pub mean_gamma_sq_u: f64,
    pub stderr: f64,
}

/// Mean of γ²_u between q(x)(1 + α sin(νπx)) and q across trials, per ν.
/// Trial t draws from streams 2t and 2t + 1 for every ν; ν = 0 compares q
/// with itself.
pub fn fig5_rows(
    k: &Kernel,
    q: &Measure,
    alpha: f64,
    nus: &[f64],
    m: usize,
    trials: usize,
    seed: u64,
) -> CliResult<Vec<Fig5Row>> {
    if trials == 0 || m < 2 {
        return usage("need trials >= 1 and m >= 2");
    }
    nus.iter()
        .map(|&nu| {
            let p = if nu == 0.0 {
                q.clone()
            } else {
                perturb_sinusoid(q, alpha, nu)?
            };
            let vals = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let x = p.sample_stream(m, seed, 2 * t as u64)?;
                    let y = q.sample_stream(m, seed, 2 * t as u64 + 1)?;
                    Ok(mmd_u_statistic(k, &x, &y)?.gamma_sq)
                })
                .collect::<kdist::Result<Vec<f64>>>()?;
            let n = trials as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let stderr = if trials > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            Ok(Fig5Row {
                nu,
                mean_gamma_sq_u: mean,
                stderr,
            })
        })
        .collect()
}

pub fn cmd_fig5(cfg: &ExperimentConfig) -> CliResult<String> {
    let k = match &cfg.kernel {
        Some(s) => parse_kernel(s)?,
        None => Kernel::bspline(0),
    };
    let q = match &cfg.q {
        Some(s) => parse_measure(s)?,
        None => Measure::uniform(-1.0, 1.0)?,
    };
    let nus = match &cfg.grid {
        Some(g) => g.clone(),
        None => parse_grid("0:4:0.25")?,
    };
    let rows = fig5_rows(
        &k,
        &q,
        cfg.alpha.unwrap_or(0.5),
        &nus,
        cfg.m.unwrap_or(250),
        cfg.trials.unwrap_or(25),
        cfg.seed(),
    )?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows),
        Format::Csv => csv_rows(&rows),
    }
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Kernel and measure text forms, e.g. `gaussian(1)` or `discrete[(0,1)]`.
#[derive(Debug, Clone, Default, Args)]
pub struct Inputs {
    #[arg(short, long)]
    pub kernel: Option<String>,
    #[arg(short, long)]
    pub p: Option<String>,
    #[arg(short, long)]
    pub q: Option<String>,
}

#[derive(Debug, Parser)]
#[command(name = "kdist", version, about = "Kernel distances between probability measures")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population γ² between P and Q
    Gamma {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "auto")]
        path: PathChoice,
    },
    /// γ² estimated from m samples of each measure
    Estimate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value = "u")]
        statistic: Statistic,
    },
    /// Whether a kernel is characteristic
    Classify {
        #[arg(short, long)]
        kernel: Option<String>,
    },
    /// Build a named pair of distinct measures with small or zero γ
    Construct {
        #[arg(short, long)]
        kernel: Option<String>,
        #[arg(short, long)]
        q: Option<String>,
        #[command(flatten)]
        args: ConstructArgs,
    },
    /// γ next to Wasserstein, total variation and Dudley distances
    Compare {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Table along (1 − 1/n)δ₀ + (1/n)δ_n against δ₀
    Weak {
        #[arg(short, long)]
        kernel: Option<String>,
        /// Values of n, e.g. 1..10
        #[arg(long = "n")]
        n: Option<String>,
    },
    /// Permutation two-sample test
    Test {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        m: Option<usize>,
        #[command(flatten)]
        args: TestArgs,
    },
    /// Mean γ²_u over a grid of perturbation frequencies ν
    Fig5 {
        #[arg(short, long)]
        kernel: Option<String>,
        #[arg(short, long)]
        q: Option<String>,
        /// Grid of ν, e.g. 0:4:0.25
        #[arg(long)]
        nu: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(short, long)]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn with_inputs(i: &Inputs) -> ExperimentConfig {
    ExperimentConfig {
        kernel: i.kernel.clone(),
        p: i.p.clone(),
        q: i.q.clone(),
        ..Default::default()
    }
}

/// Runs a parsed command line; returns the output and where to write it.
pub fn run(cli: &Cli) -> CliResult<(String, Option<PathBuf>)> {
    let base = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let common = ExperimentConfig {
        seed: cli.common.seed,
        out: cli.common.out.clone(),
        format: cli.common.format,
        ..Default::default()
    };
    let flags = match &cli.command {
        Command::Gamma { inputs, .. } | Command::Compare { inputs } => with_inputs(inputs),
        Command::Estimate { inputs, m, .. } | Command::Test { inputs, m, .. } => ExperimentConfig {
            m: *m,
            ..with_inputs(inputs)
        },
        Command::Classify { kernel } => ExperimentConfig {
            kernel: kernel.clone(),
            ..Default::default()
        },
        Command::Construct { kernel, q, args } => ExperimentConfig {
            kernel: kernel.clone(),
            q: q.clone(),
            alpha: args.alpha,
            ..Default::default()
        },
        Command::Weak { kernel, n } => ExperimentConfig {
            kernel: kernel.clone(),
            grid: n.as_deref().map(parse_grid).transpose()?,
            ..Default::default()
        },
        Command::Fig5 {
            kernel,
            q,
            nu,
            alpha,
            m,
            trials,
        } => ExperimentConfig {
            kernel: kernel.clone(),
            q: q.clone(),
            grid: nu.as_deref().map(parse_grid).transpose()?,
            alpha: *alpha,
            m: *m,
            trials: *trials,
            ..Default::default()
        },
    };
    let cfg = base.overlay(flags).overlay(common);
    let text = match &cli.command {
        Command::Gamma { path, .. } => cmd_gamma(&cfg, *path)?,
        Command::Estimate { statistic, .. } => cmd_estimate(&cfg, *statistic)?,
        Command::Classify { .. } => cmd_classify(&cfg)?,
        Command::Construct { args, .. } => {
            let mut args = args.clone();
            args.alpha = args.alpha.or(cfg.alpha);
            cmd_construct(&cfg, &args)?
        }
        Command::Compare { .. } => cmd_compare(&cfg)?,
        Command::Weak { .. } => cmd_weak(&cfg)?,
        Command::Test { args, .. } => cmd_test(&cfg, args)?,
        Command::Fig5 { .. } => cmd_fig5(&cfg)?,
    };
    Ok((text, cfg.out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let g = parse_grid("0:4:0.25").unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g[8], 2.0);
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_grid("3..1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn config_round_trip() {
        let c: ExperimentConfig = "# fig5 run\nexperiment = fig5\nkernel=bspline(1)\nnu=0:1:0.5\nm=10 # small\ntrials=2\nseed=7\nformat=json\n"
            .parse()
            .unwrap();
        assert_eq!(c.experiment.as_deref(), Some("fig5"));
        assert_eq!(c.grid, Some(vec![0.0, 0.5, 1.0]));
        assert_eq!(
            (c.m, c.trials, c.seed, c.format),
            (Some(10), Some(2), Some(7), Some(Format::Json))
        );
        assert!("colour=red".parse::<ExperimentConfig>().is_err());
        assert!("m".parse::<ExperimentConfig>().is_err());
        assert!("m=ten".parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = ExperimentConfig {
            m: Some(5),
            seed: Some(1),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            seed: Some(2),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!((c.m, c.seed), (Some(5), Some(2)));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Lib(kdist::Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::Lib(kdist::Error::Numerical("x".into())).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}
