//! Command-line front end.
//!
//! ```text
//! squeezelab kernel     --config PATH [--out DIR] [--grid-n N]
//! squeezelab transverse --config PATH [--out DIR]
//! squeezelab cluster    --config PATH [--out DIR]
//! squeezelab figures    [--out DIR] [--grid-n N]
//! ```
//!
//! `--config builtin:<name>` selects a shipped configuration. Exit codes:
//! 0 success, 1 I/O failure, 2 configuration or usage error, 3 numerical
//! failure.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_cluster, cmd_kernel, cmd_transverse, run_figures, RunOptions};
pub use config::{ExperimentKind, RunConfig, BUILTIN_CONFIGS, FIGURE_SUITE};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "squeezelab", version, about = "Multimode squeezing kernels, supermodes and cluster states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and diagonalize a kernel (modulated-kernel or spopo experiments).
    Kernel(CommonArgs),
    /// Transverse coupling sweep (transverse-sweep experiments).
    Transverse(CommonArgs),
    /// Coupling-matrix synthesis and GHZ diagnostics.
    Cluster(CommonArgs),
    /// Run every shipped figure configuration into subdirectories of --out.
    Figures(FigureArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Config file, or builtin:<name>.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the axis sample count.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Accepted for compatibility; every algorithm is deterministic.
    #[arg(long)]
    seedless: bool,
    /// Progress messages on stderr.
    #[arg(long)]
    verbose: bool,
}

impl Flags {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            grid_n: self.grid_n,
            verbose: self.verbose,
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::AxisTooNarrow { .. }
        | Error::AboveThreshold(_)
        | Error::DegeneratePump(..) => EXIT_CONFIG,
        Error::Numerical(_) | Error::Singular { .. } | Error::ZeroReference => EXIT_NUMERICAL,
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Kernel(a) => RunConfig::load(&a.config).and_then(|c| cmd_kernel(&c, &a.flags.options()).map(drop)),
        Command::Transverse(a) => {
            RunConfig::load(&a.config).and_then(|c| cmd_transverse(&c, &a.flags.options()).map(drop))
        }
        Command::Cluster(a) => RunConfig::load(&a.config).and_then(|c| cmd_cluster(&c, &a.flags.options()).map(drop)),
        Command::Figures(a) => run_figures(&a.flags.options()).map(drop),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
