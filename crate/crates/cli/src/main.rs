use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crackbem_cli::output::Output;
use crackbem_cli::{commands, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "crackbem",
    version,
    about = "Small-crack experiments in 2D linear elasticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Background and cracked solves: boundary traces and crack openings.
    Solve,
    /// Boundary and energy asymptotics over the configured crack lengths.
    Convergence,
    /// Topological derivative over a lattice of points and orientations.
    TdMap,
    /// Energy change against its leading term and the topological derivative.
    Energy,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = ExperimentConfig::from_path(path)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot set up {n} threads: {e}")))?;
    }
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| cfg.output.directory.clone());
    let out = Output::new(&dir, cfg.output.precision)?;
    match cli.command {
        Command::Solve => commands::solve(&cfg, &out),
        Command::Convergence => commands::convergence(&cfg, &out),
        Command::TdMap => commands::td_map(&cfg, &out),
        Command::Energy => commands::energy(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crackbem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
