use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use biharm::config::JobConfig;
use biharm::pipeline;

/// Boundary-integral solver for the planar biharmonic problem.
#[derive(Parser)]
#[command(name = "biharm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the (1-3)-problem and write densities, fields, diagnostics.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override the node count from the config.
        #[arg(long)]
        nodes: Option<usize>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite against the configured map.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Dump the kernels along one row t = const to CSV.
    Kernel {
        #[arg(long)]
        config: PathBuf,
        /// Collocation parameter t (accepts "inf").
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: &Path, nodes: Option<usize>) -> biharm::Result<JobConfig> {
    let mut cfg = JobConfig::from_path(config)?;
    if let Some(n) = nodes {
        cfg.nodes = n;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run() -> biharm::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, nodes, out } => {
            let cfg = load(&config, nodes)?;
            pipeline::run_solve(&cfg, out.as_deref())
        }
        Command::Verify { config, nodes } => {
            let cfg = load(&config, nodes)?;
            pipeline::run_verify(&cfg)
        }
        Command::Kernel { config, t, out } => {
            let cfg = load(&config, None)?;
            pipeline::run_kernel(&cfg, t, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(pipeline::EXIT_ERROR as u8)
        }
    }
}
