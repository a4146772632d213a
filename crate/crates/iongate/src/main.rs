use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iongate::{bundled_config, list_experiments, parse_config, run_config, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "iongate", version, about = "Run trapped-ion gate experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file, or a bundled config by name.
    Run {
        config: String,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweeps; defaults to all cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Print the manifest as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the bundled configs.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Print the config JSON schema.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            let entries = list_experiments();
            if json {
                println!("{}", serde_json::to_string_pretty(&entries).unwrap());
            } else {
                for e in entries {
                    println!("{:<22} {:<18} {}", e.name, e.experiment, e.description);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Schema => {
            print!("{}", iongate::CONFIG_SCHEMA);
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed, workers, json } => {
            let opts = RunOptions { out, seed, workers, source: config.clone() };
            match load(&config).and_then(|cfg| run_config(&cfg, &opts)) {
                Ok(outcome) => {
                    if json {
                        println!("{}", serde_json::to_string_pretty(&outcome.manifest).unwrap());
                    } else {
                        for f in &outcome.files {
                            println!("{}", f.display());
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("iongate: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}

fn load(arg: &str) -> Result<iongate::ExperimentConfig, RunError> {
    match std::fs::read_to_string(arg) {
        Ok(text) => parse_config(&text),
        Err(e) => match bundled_config(arg) {
            Some(cfg) => cfg,
            None => Err(RunError::Other(anyhow::anyhow!("reading {arg}: {e}"))),
        },
    }
}
