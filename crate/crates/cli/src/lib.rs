//! Command-line driver: parses an experiment config, runs one of the
//! offline, simulate, regret or moments commands and writes CSV files.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fairalloc::config::{parse_config, ConfigError, ExperimentConfig};
use fairalloc::offline::MomentTable;
use fairalloc::report;
use fairalloc::sim::{monte_carlo, regret_curve, run_episode_with, with_threads, EpisodeOptions};
use fairalloc::Error;

#[derive(Debug, Parser)]
#[command(
    name = "fairalloc",
    version,
    about = "Fair time allocation across task groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the offline problem and print t*, r* and the time shares.
    Offline(RunArgs),
    /// Monte Carlo run of the configured policy.
    Simulate(RunArgs),
    /// Regret of OLUM over the configured budget grid.
    Regret(RunArgs),
    /// Tabulate mu(k, t), theta(k, t) and r_k(t) over the deadline set.
    Moments(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    pub config: PathBuf,
    /// Directory for CSV output; created if missing.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count of simulate and regret experiments.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads for the Monte Carlo runs (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// The config parsed but lacks what the command needs.
    Missing(&'static str),
    Model(Error),
    Io {
        path: PathBuf,
        source: io::Error,
    },
}

impl CliError {
    /// 2 for config problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Missing(_) => 2,
            CliError::Model(Error::InvalidParameter { .. } | Error::InvalidDeadline(_)) => 2,
            CliError::Model(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Missing(what) => write!(f, "config error: no `experiment.{what}` section"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

type Handler = fn(&ExperimentConfig, &RunArgs, &mut (dyn Write + Send)) -> Result<(), CliError>;

pub fn run(cli: Cli, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let (args, f): (&RunArgs, Handler) = match &cli.command {
        Command::Offline(a) => (a, offline),
        Command::Simulate(a) => (a, simulate),
        Command::Regret(a) => (a, regret),
        Command::Moments(a) => (a, moments),
    };
    let mut cfg = parse_config(&args.config).map_err(CliError::Config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let header = format!(
        "# fairalloc {}  config {}  seed {}",
        env!("CARGO_PKG_VERSION"),
        args.config.display(),
        cfg.seed
    );
    line(out, &header)?;
    match args.threads {
        Some(n) => with_threads(n, || f(&cfg, args, out))?,
        None => f(&cfg, args, out),
    }
}

fn line(out: &mut (dyn Write + Send), text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn write_csv(dir: &Path, name: &str, body: &str, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    line(out, &format!("wrote {}", path.display()))
}

fn offline(cfg: &ExperimentConfig, args: &RunArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let sol = cfg.env.offline()?;
    line(out, report::offline_table(&cfg.env, &sol).trim_end())?;
    write_csv(
        &args.out_dir,
        "offline.csv",
        &report::offline_csv(&cfg.env, &sol)?,
        out,
    )
}

fn moments(cfg: &ExperimentConfig, args: &RunArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let table = MomentTable::new(&cfg.env.groups, &cfg.env.deadlines)?;
    let body = report::moments_csv(&cfg.env, &table)?;
    line(out, body.trim_end())?;
    write_csv(&args.out_dir, "moments.csv", &body, out)
}

fn simulate(cfg: &ExperimentConfig, args: &RunArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let spec = cfg.simulate.as_ref().ok_or(CliError::Missing("simulate"))?;
    let trials = args.trials.unwrap_or(spec.trials);
    let policy = cfg.build_policy(&spec.policy, spec.budget)?;
    if let Some(v) = policy.v() {
        let source = if cfg.v.is_some() {
            "config"
        } else {
            "sqrt(B / ln B)"
        };
        line(out, &format!("# V = {v} ({source})"))?;
    }
    let options = cfg.episode_options();
    let summary = monte_carlo(&cfg.env, &policy, spec.budget, trials, cfg.seed, options)?;
    line(out, report::summary_table(&cfg.env, &summary).trim_end())?;
    let body = report::summary_csv(&cfg.env, cfg.alpha, std::slice::from_ref(&summary))?;
    write_csv(&args.out_dir, "summary.csv", &body, out)?;
    if options.trace {
        // The trace follows the first trial, which uses the base seed.
        let traced = EpisodeOptions {
            trace: true,
            ..options
        };
        let ep = run_episode_with(&cfg.env, &policy, spec.budget, cfg.seed, traced)?;
        write_csv(
            &args.out_dir,
            "trace.csv",
            &report::trace_csv(&cfg.env, &ep.trace)?,
            out,
        )?;
    }
    Ok(())
}

fn regret(cfg: &ExperimentConfig, args: &RunArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let spec = cfg.regret.as_ref().ok_or(CliError::Missing("regret"))?;
    let trials = args.trials.unwrap_or(spec.trials);
    match cfg.v {
        Some(v) => line(out, &format!("# V = {v} (config)"))?,
        None => line(out, "# V = sqrt(B / ln B) per budget")?,
    }
    let template = cfg.olum_params(spec.budgets[0]);
    let curve = regret_curve(
        &cfg.env,
        &template,
        cfg.v,
        &spec.budgets,
        trials,
        cfg.seed,
        cfg.episode_options(),
    )?;
    let body = report::regret_csv(&curve)?;
    line(out, body.trim_end())?;
    write_csv(&args.out_dir, "regret.csv", &body, out)
}
