//! `teich-lab` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use teich_lab::experiments::{exit_code, list_experiments, run_config_str, RunOptions};
use teich_lab::Error;

#[derive(Parser)]
#[command(name = "teich-lab", version, about = "Reproducible IET and translation-surface experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = "teich-lab-out")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the registered experiments.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn print_catalogue(to_stderr: bool) {
    for e in list_experiments() {
        let line = format!("{:<22} {}", e.name, e.description);
        if to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&list_experiments()).expect("catalogue serializes")
                );
            } else {
                print_catalogue(false);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            threads,
            out,
            seed,
        } => {
            let result = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))
                .and_then(|text| {
                    run_config_str(
                        &text,
                        &RunOptions {
                            out_dir: out,
                            threads,
                            seed,
                        },
                    )
                });
            match result {
                Ok(outcome) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&outcome).expect("summary serializes")
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    if let Error::UnknownExperiment(_) = e {
                        eprintln!("available experiments:");
                        print_catalogue(true);
                    }
                    ExitCode::from(exit_code(&e) as u8)
                }
            }
        }
    }
}
