//! Command-line driver: reads an ensemble config, runs one engine or the
//! comparison harness, and writes CSV or JSON.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{parse_config, parse_grid_flag, Command, ConfigError, DocFormat, OutputFormat, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wishart", version, about = "Eigenvalue densities of non-i.i.d. Wishart matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Replica fixed-point density on the grid.
    Replica(Flags),
    /// Seed-averaged belief-propagation density on sampled matrices.
    Bp(Flags),
    /// Seed-averaged eigenvalue histogram of sampled matrices.
    Exact(Flags),
    /// Closed-form density for constant hyperparameter laws.
    Mp(Flags),
    /// Trace-form resolvent on one sampled pair of covariance factors.
    Trace(Flags),
    /// Inverse moments and portfolio quantities for the row-variance case.
    Moments(Flags),
    /// Runs several engines and reports edges, masses and distances.
    Compare(Flags),
}

impl CliCommand {
    pub fn split(&self) -> (Command, &Flags) {
        match self {
            Self::Replica(f) => (Command::Replica, f),
            Self::Bp(f) => (Command::Bp, f),
            Self::Exact(f) => (Command::Exact, f),
            Self::Mp(f) => (Command::Mp, f),
            Self::Trace(f) => (Command::Trace, f),
            Self::Moments(f) => (Command::Moments, f),
            Self::Compare(f) => (Command::Compare, f),
        }
    }
}

/// Flags shared by every subcommand; each overrides the matching config key.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// TOML or JSON run configuration (`.json` selects JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Base seed; sample `i` uses `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Grid as `min:max:n`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Number of sampled matrices.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Matrix row count `N`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Loads the config file and applies command-line overrides.
pub fn load_config(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let path = flags.config.to_string_lossy().into_owned();
    let text = std::fs::read_to_string(&flags.config).map_err(|e| CliError::io(&flags.config, e))?;
    let mut cfg = parse_config(&text, DocFormat::from_path(&path))?;
    cfg.command = Some(command);
    if let Some(out) = &flags.out {
        cfg.output.path = Some(out.to_string_lossy().into_owned());
    }
    if let Some(f) = flags.format {
        cfg.output.format = f;
    }
    if let Some(s) = flags.seed {
        cfg.sampling.base_seed = s;
    }
    if let Some(e) = flags.epsilon {
        cfg.grid.epsilon = e;
    }
    if let Some(g) = &flags.grid {
        let (lo, hi, n) = parse_grid_flag(g)?;
        cfg.grid.lambda_min = lo;
        cfg.grid.lambda_max = Some(hi);
        cfg.grid.n_points = n;
    }
    if let Some(k) = flags.samples {
        cfg.sampling.n_samples = k;
    }
    if let Some(n) = flags.n {
        cfg.sampling.n = n;
    }
    Ok(cfg.resolved()?)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_CONFIG } else { error::EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match run_cli(&cli, stdout, stderr) {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (command, flags) = cli.command.split();
    if let Some(k) = flags.threads {
        if k == 0 {
            return Err(ConfigError::at("--threads", "must be >= 1").into());
        }
        // A global pool can be installed only once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let cfg = load_config(command, flags)?;
    let echo = toml::to_string(&cfg).unwrap_or_else(|_| format!("{cfg:#?}\n"));
    let _ = write!(stderr, "# resolved configuration\n{echo}");
    let outcome = commands::execute(command, &cfg)?;
    commands::write_outcome(&outcome, &cfg, stdout)?;
    let _ = writeln!(stderr, "{}", commands::summarize(&outcome));
    Ok(())
}
