use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eonjam_cli::{rank_links, simulate, summary, validate, CliError, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "eonjam", version, about = "EON jamming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write blocking.csv and slots.csv.
    Simulate { config: PathBuf },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Rank links by utilization on a jammer-free run; writes ranking.csv.
    RankLinks { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let over = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match cli.command {
        Command::Simulate { config } => {
            let report = simulate(&config, over.as_deref())?;
            println!("{}", summary(&report));
        }
        Command::Validate { config } => {
            validate(&config)?;
            println!("{}: ok", config.display());
        }
        Command::RankLinks { config } => {
            let (path, ranking) = rank_links(&config, over.as_deref())?;
            if let (Some(first), Some(last)) = (ranking.first(), ranking.last()) {
                println!("most used: link {} ({:.4})", first.0, first.1);
                println!("least used: link {} ({:.4})", last.0, last.1);
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
