use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasecover_cli::{load_config, run, thread_count, verify, CliError, FIXTURES};

#[derive(Parser)]
#[command(name = "phasecover", version, about = "Runs phase-space cover experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write tables, invariants and plot data.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute a config and compare against a baseline directory.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the names of the bundled fixtures.
    ListFixtures,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let cfg = load_config(&config)?;
            let art = run(&cfg, &out, thread_count(threads)?)?;
            println!("{} {} -> {}", cfg.name, art.config_hash, out.display());
            Ok(())
        }
        Command::Verify { config, baseline, threads } => {
            let cfg = load_config(&config)?;
            verify(&cfg, &baseline, thread_count(threads)?)?;
            println!("{}: matches {}", cfg.name, baseline.display());
            Ok(())
        }
        Command::ListFixtures => {
            for (name, _) in FIXTURES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
