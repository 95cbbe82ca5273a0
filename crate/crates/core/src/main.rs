use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levy_units::config::{ExperimentConfig, Suite};
use levy_units::runner;

#[derive(Parser)]
#[command(name = "levy-units", version, about = "Numerical checks for truncated Lévy processes and their units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write report.json plus CSV plot data.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// One of the names printed by `list-suites`.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Print the effective config with every default filled in.
    EchoConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// List the available suites.
    ListSuites,
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, String> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::ListSuites => {
            for (suite, description) in runner::list_suites() {
                println!("{:<14} {description}", suite.name());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::EchoConfig { config } => {
            print!("{}", load(config.as_ref())?.canonical_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, seed, out, suite } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(suite) = suite {
                cfg.suite = suite.parse::<Suite>().map_err(|e| e.to_string())?;
            }
            if let Some(out) = &out {
                cfg.output_dir = out.display().to_string();
            }
            let output = runner::run(&cfg).map_err(|e| e.to_string())?;
            let dir = PathBuf::from(&cfg.output_dir);
            output.write_to(&dir).map_err(|e| e.to_string())?;
            let summary = &output.report.summary;
            println!(
                "{} checks, {} passed, {} failed; report in {}",
                summary.total,
                summary.passed,
                summary.failed,
                dir.join("report.json").display()
            );
            if output.report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                for id in output.report.failing_ids() {
                    eprintln!("FAILED {id}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
