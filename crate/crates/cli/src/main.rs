mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "kinex",
    version,
    about = "Exact suspension flow over a quadratic rotation"
)]
struct Cli {
    /// TOML file with run parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued fraction convergents p_n/q_n and offsets q_nα − p_n.
    Convergents(RunConfig),
    /// Two-column tower partitions for n-min..=n-max with the exact length identity.
    Tower(RunConfig),
    /// Piecewise-linear layers T_n, the truncated return time T_{≤N}, and plot samples.
    Build(RunConfig),
    /// Birkhoff-sum checks at midpoint, endpoints and `samples` random points per level.
    Verify(RunConfig),
    /// Separation certificate on a seeded grid of close pairs.
    Scan(RunConfig),
    /// Expansiveness probe of the suspension flow.
    Probe(RunConfig),
}

fn run(cli: Cli) -> anyhow::Result<(commands::Outcome, Option<PathBuf>)> {
    let (flags, cmd): (
        RunConfig,
        fn(&config::Resolved) -> anyhow::Result<commands::Outcome>,
    ) = match cli.command {
        Command::Convergents(c) => (c, commands::convergents_cmd),
        Command::Tower(c) => (c, commands::tower_cmd),
        Command::Build(c) => (c, commands::build_cmd),
        Command::Verify(c) => (c, commands::verify_cmd),
        Command::Scan(c) => (c, commands::scan_cmd),
        Command::Probe(c) => (c, commands::probe_cmd),
    };
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(flags).resolve()?;
    let outcome = cmd(&cfg)?;
    Ok((outcome, cfg.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    match run(cli) {
        Ok((outcome, out)) => {
            if let Err(e) = output::emit(out.as_deref(), &outcome.artifacts) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            eprintln!(
                "{} in {:.2}s",
                if outcome.ok { "pass" } else { "FAIL" },
                started.elapsed().as_secs_f64()
            );
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
