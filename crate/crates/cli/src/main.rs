use clap::{Parser, Subcommand};
use sbfcast::{CliError, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sbfcast", version, about = "Multicast stochastic beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; defaults to the config's output_path or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multicast rates averaged over channel draws.
    Rates(Common),
    /// Rate gaps to the capacity bound and their high-power limits.
    Gaps(Common),
    /// Closed forms against quadrature and Monte Carlo.
    Verify(Common),
    /// Worst-user uncoded bit error rates.
    Ber(Common),
    /// Capacity-optimal transmit covariance for one channel draw.
    SolveCov(Common),
}

fn execute(cli: Cli) -> Result<usize, CliError> {
    let (command, common) = match cli.command {
        Cmd::Rates(c) => (Command::Rates, c),
        Cmd::Gaps(c) => (Command::Gaps, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Ber(c) => (Command::Ber, c),
        Cmd::SolveCov(c) => (Command::SolveCov, c),
    };
    let mut cfg = ExperimentConfig::load(&common.config, command)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let report = sbfcast::run(&cfg)?;
    match common.out.or_else(|| cfg.output_path.clone().map(PathBuf::from)) {
        Some(path) => std::fs::write(&path, &report.csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", report.csv),
    }
    Ok(report.failures)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SBF_THREADS") else { return Ok(()) };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("SBF_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(cli));
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} check(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
