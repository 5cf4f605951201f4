//! Argument handling and the top-level run.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_sector, ConfigError, RunConfig, SectorSelection};
use crate::report::{ChainRecord, Report};
use crate::suites::{Lab, Suite};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BETHE_LAB_WORKERS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bethe-lab", version, about = "Numerical checks of the nested Bethe ansatz for U_q(gl_N) chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides both identity and operator tolerances.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sector counts such as `2,1`; repeat for several sectors.
    #[arg(long = "sector", global = true)]
    sectors: Vec<String>,
    /// Number of chains to draw.
    #[arg(long, global = true)]
    chains: Option<usize>,
    /// Skip the summary table.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Yang-Baxter equation and R-matrix degenerations.
    YangBaxter,
    /// RLL relations, transfer commutativity, vacuum and zero modes.
    Rll,
    /// Gauss coordinates and their identities.
    Gauss,
    /// Scalar identities of the symmetrization and kernels.
    Identities,
    /// Solve the Bethe equations in the configured sectors.
    Solve,
    /// Check that solutions give eigenvectors and eigenvalues.
    Verify,
    /// Off-shell behaviour and unwanted terms.
    Offshell,
    /// Reconcile Bethe eigenvalues with the dense spectrum.
    Spectrum,
    /// Every suite.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::All => "all",
            other => other.suites()[0].name(),
        }
    }

    fn suites(self) -> Vec<Suite> {
        match self {
            Command::YangBaxter => vec![Suite::YangBaxter],
            Command::Rll => vec![Suite::Rll],
            Command::Gauss => vec![Suite::Gauss],
            Command::Identities => vec![Suite::Identities],
            Command::Solve => vec![Suite::Solve],
            Command::Verify => vec![Suite::Verify],
            Command::Offshell => vec![Suite::Offshell],
            Command::Spectrum => vec![Suite::Spectrum],
            Command::All => Suite::ALL.to_vec(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let flag = |field: &str, message: String| ConfigError::Invalid { field: format!("--{field}"), message };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.tol_identity = tol;
        cfg.tol_operator = tol;
    }
    if !cli.sectors.is_empty() {
        let list = cli
            .sectors
            .iter()
            .map(|s| parse_sector(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| flag("sector", m))?;
        cfg.sectors = SectorSelection::List(list);
    }
    if let Some(chains) = cli.chains {
        cfg.chains = chains;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn workers() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(ConfigError::Invalid {
                field: WORKERS_ENV.into(),
                message: format!("`{v}` is not a positive count"),
            }),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parses `argv`, runs the selected suites, writes the report and returns the exit code.
///
/// The first element of `argv` is the program name.
pub fn run_command<I, T>(argv: I) -> (i32, Option<Report>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = e.print();
            return (code, None);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let code = if report.summary.pass { EXIT_PASS } else { EXIT_FAIL };
            (code, Some(report))
        }
        Err(e) => {
            eprintln!("bethe-lab: {e}");
            (EXIT_INVALID, None)
        }
    }
}

fn run(cli: &Cli) -> Result<Report, ConfigError> {
    let cfg = load_config(cli)?;
    let workers = workers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::Invalid { field: WORKERS_ENV.into(), message: e.to_string() })?;
    let lab = Lab::new(cfg)?;
    let mut checks = Vec::new();
    for suite in cli.command.suites() {
        checks.extend(pool.install(|| lab.run(suite))?.checks);
    }
    let chains = lab.chain_inputs().map(|c| ChainRecord::new(lab.config(), c)).collect();
    let (sectors, solutions) = lab.solver_records();
    let report = Report::assemble(cli.command.name(), lab.config().seed, workers, chains, sectors, solutions, checks);
    let out = &lab.config().out;
    std::fs::write(out, report.to_json() + "\n")
        .map_err(|e| ConfigError::Io { path: out.display().to_string(), message: e.to_string() })?;
    if !cli.quiet {
        print!("{}", report.table());
        println!("report written to {}", out.display());
    }
    Ok(report)
}
