//! Batch front door for the nodal mountain-pass toolkit: configuration
//! ingestion, experiment orchestration, persistence, and plot-data emission.
//!
//! One JSON config document per run; CLI flags override config keys
//! (flag > config > default). Determinism contract: identical config and seed
//! reproduce every numeric output byte for byte. `NODALMP_THREADS` caps the
//! solver's internal parallelism (the variance-reduction starts of the
//! coercivity search); results do not depend on the thread count.
//!
//! Exit codes: 0 ok; 2 hypothesis violated under `--strict`; 3 numeric domain
//! error; 4 configuration or schema error; 1 other I/O failure.

mod commands;
mod config;
mod emit;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::str::FromStr;

/// Everything that can stop a run, ranked by exit code.
#[derive(Debug)]
pub enum Failure {
    /// A checker verdict under `--strict`: the run's hypotheses are violated.
    Violated(String),
    /// Numeric domain errors: Gamma poles, degenerate meshes, solver
    /// breakdowns — anything the numerics refuse to do.
    Numeric(String),
    /// Configuration and schema errors.
    Config(String),
    /// Filesystem trouble.
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Violated(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Config(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violated(m) | Failure::Numeric(m) | Failure::Config(m) | Failure::Io(m) => m,
        }
    }
}

impl From<nodalmp_core::Error> for Failure {
    fn from(e: nodalmp_core::Error) -> Self {
        match e {
            nodalmp_core::Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Comma-separated float list argument (`--eta 1e-2,1e-3`); an empty string
/// is an empty list.
#[derive(Debug, Clone)]
struct FloatList(Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        config::parse_float_list(s).map(FloatList)
    }
}

#[derive(Parser)]
#[command(
    name = "nodalmp",
    version,
    about = "Mountain-pass search for sign-changing critical points of p-Laplacian energies",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the special-constant table for (n, p) and optionally q.
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        /// Also evaluate the perturbation constant e(n,p,q).
        #[arg(long)]
        q: Option<f64>,
        /// Write constants.json and a manifest to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the pointwise hypothesis cases, exponent windows, and the
    /// level threshold for a configured problem.
    CheckConditions {
        config: PathBuf,
        /// Exit with code 2 when any applicable case fails or is
        /// indeterminate.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the concentration-profile energy expansions against direct
    /// quadrature over a sweep of concentration parameters.
    Expansion {
        config: PathBuf,
        /// Comma-separated concentration parameters (overrides the config).
        #[arg(long)]
        eta: Option<FloatList>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the configured mesh and report measures, symmetry diagnostics,
    /// and the coercivity estimate.
    Mesh {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the mountain-pass search and write the solution, path profile, and
    /// report.
    Solve {
        config: PathBuf,
        /// Override the subcritical defect epsilon.
        #[arg(long)]
        eps: Option<f64>,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Re-run the descent after sign surgery to enforce the two-region
        /// nodal structure.
        #[arg(long)]
        rebuild: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Warm-started solves along a decreasing epsilon schedule with the
    /// boundedness and envelope diagnostics.
    Continue {
        config: PathBuf,
        /// Comma-separated strictly decreasing schedule (overrides the
        /// config).
        #[arg(long)]
        schedule: Option<FloatList>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the domain-scaling identity sign conditions (and, with
    /// --solve, the identity terms on a fresh solution).
    Pohozaev {
        config: PathBuf,
        /// Also run the solver and evaluate the identity term by term on the
        /// resulting field.
        #[arg(long)]
        solve: bool,
        /// Exit with code 2 when the nonexistence criterion is met.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Constants { n, p, q, out } => commands::constants_cmd(n, p, q, out.as_deref()),
        Command::CheckConditions {
            config,
            strict,
            out,
        } => commands::check_conditions_cmd(&config, strict, out.as_deref()),
        Command::Expansion { config, eta, out } => {
            let overrides = config::Overrides {
                eta: eta.map(|l| l.0),
                ..Default::default()
            };
            commands::expansion_cmd(&config, &overrides, out.as_deref())
        }
        Command::Mesh { config, out } => commands::mesh_cmd(&config, out.as_deref()),
        Command::Solve {
            config,
            eps,
            seed,
            rebuild,
            out,
        } => {
            let overrides = config::Overrides {
                epsilon: eps,
                seed,
                ..Default::default()
            };
            commands::solve_cmd(&config, &overrides, rebuild, out.as_deref())
        }
        Command::Continue {
            config,
            schedule,
            seed,
            out,
        } => {
            let overrides = config::Overrides {
                seed,
                schedule: schedule.map(|l| l.0),
                ..Default::default()
            };
            commands::continue_cmd(&config, &overrides, out.as_deref())
        }
        Command::Pohozaev {
            config,
            solve,
            strict,
            eps,
            seed,
            out,
        } => {
            let overrides = config::Overrides {
                epsilon: eps,
                seed,
                ..Default::default()
            };
            commands::pohozaev_cmd(&config, &overrides, solve, strict, out.as_deref())
        }
    }
}

/// Restore default SIGPIPE behaviour so piping into `head` terminates the
/// process instead of panicking on a failed write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are successes; everything else is a usage
            // (configuration) error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.message());
        std::process::exit(f.exit_code());
    }
}
