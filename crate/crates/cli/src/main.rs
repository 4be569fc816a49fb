use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use symdel::boolfun::Engine;
use symdel::bridge::{prove, Bounds, ProveConfig};
use symdel::scenario::{RunOptions, Scenario};
use symdel::symbolic::Mutation;

/// Symbolic model checking for dynamic epistemic logic with factual change.
#[derive(Parser)]
#[command(name = "symdel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and evaluate its queries.
    Check {
        file: PathBuf,
        /// Drop circled copies determined by the law after each update.
        #[arg(long)]
        minimize: bool,
        /// Print every intermediate structure.
        #[arg(long)]
        trace: bool,
        /// Emit the trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a scenario with every update as an action model or as a
    /// transformer.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Compare the symbolic and explicit pipelines on random instances.
    Prove {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Modal depth of the compared formulas.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        max_vars: usize,
        #[arg(long, default_value_t = 2)]
        max_event_vars: usize,
        #[arg(long, default_value_t = 2)]
        max_modified: usize,
        #[arg(long, default_value_t = 2)]
        max_agents: usize,
        #[arg(long, default_value_t = 6)]
        max_worlds: usize,
        #[arg(long, default_value_t = 3)]
        max_events: usize,
        #[arg(long, hide = true, value_enum)]
        mutate: Option<MutationArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Action,
    Transformer,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    DropObsCircle,
}

const QUERY_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;

fn load(file: &PathBuf) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    Scenario::parse(&text).map_err(|e| format!("{}: {e}", file.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check {
            file,
            minimize,
            trace,
            json,
        } => {
            let scenario = load(&file)?;
            let run = scenario
                .run(&Engine::new(), RunOptions { minimize })
                .map_err(|e| format!("{}: {e}", file.display()))?;
            if json {
                let text = serde_json::to_string_pretty(&run.to_json()).map_err(|e| e.to_string())?;
                println!("{text}");
            } else {
                print!("{}", run.render(trace));
            }
            Ok(if run.passed() { 0 } else { QUERY_FAILED })
        }
        Command::Translate { file, to } => {
            let scenario = load(&file)?;
            let out = match to {
                Target::Action => scenario.to_actions(),
                Target::Transformer => scenario.to_transformers(),
            }
            .map_err(|e| format!("{}: {e}", file.display()))?;
            print!("{out}");
            Ok(0)
        }
        Command::Prove {
            seed,
            count,
            depth,
            max_vars,
            max_event_vars,
            max_modified,
            max_agents,
            max_worlds,
            max_events,
            mutate,
        } => {
            let config = ProveConfig {
                seed,
                count,
                depth,
                bounds: Bounds {
                    vars: max_vars,
                    event_vars: max_event_vars,
                    modified: max_modified,
                    agents: max_agents,
                    worlds: max_worlds,
                    events: max_events,
                },
                mutation: mutate.map(|MutationArg::DropObsCircle| Mutation::DropObservationCircling),
            };
            let start = Instant::now();
            let report = prove(&config);
            print!("{report}");
            println!(
                "{count} instances from seed {seed} in {:.2}s",
                start.elapsed().as_secs_f64()
            );
            Ok(if report.passed() { 0 } else { QUERY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
