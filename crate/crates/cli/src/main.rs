//! `grasp` — batch front end for the grasp-planning pipeline.
//!
//! Subcommands mirror the pipeline stages: `extract` (visual features),
//! `train` (fit the grasp model), `plan` (MAP inference on a scene), `eval`
//! (leave-one-out and plan-eval protocols), and the synthetic generators
//! `gen-scene` / `gen-dataset`. Every run is deterministic under `--seed`
//! and emits a manifest describing its inputs, outputs, and resolved
//! configuration.

mod commands;
mod config;
mod context;
mod errors;
mod manifest;

use clap::{Parser, Subcommand};

use crate::context::{Context, LogLevel};
use crate::errors::CliError;

#[derive(Parser)]
#[command(name = "grasp", version, about = "Probabilistic grasp planning pipeline")]
struct Cli {
    /// RNG seed; every command is deterministic given the seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML configuration file (`[model]`, `[inference]`, `[heuristic]` sections).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: std::path::PathBuf,
    /// Logging verbosity: quiet, info, or debug.
    #[arg(long, global = true, default_value = "info")]
    log_level: LogLevel,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract visual features from a point cloud (and optionally fit PCA).
    Extract(commands::extract::ExtractArgs),
    /// Fit the grasp model from a JSON-lines dataset.
    Train(commands::train::TrainArgs),
    /// Plan a grasp for a scene with a trained model.
    Plan(commands::plan::PlanArgs),
    /// Run an evaluation protocol (loo or plan-eval).
    Eval(commands::eval::EvalArgs),
    /// Generate a synthetic tabletop scene as a PLY file.
    GenScene(commands::gen_scene::GenSceneArgs),
    /// Generate a labeled synthetic dataset plus its PCA projection.
    GenDataset(commands::gen_dataset::GenDatasetArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                let _ = e.print();
                eprintln!(
                    "{}",
                    serde_json::json!({"kind": "usage", "message": e.to_string()})
                );
                std::process::exit(2);
            }
            let _ = e.print();
            std::process::exit(0);
        }
    };

    let mut ctx = match Context::new(cli.seed, cli.config.as_deref(), cli.out_dir, cli.log_level) {
        Ok(ctx) => ctx,
        Err(e) => fail(&e),
    };

    let result = match cli.command {
        Command::Extract(args) => commands::extract::run(&mut ctx, args),
        Command::Train(args) => commands::train::run(&mut ctx, args),
        Command::Plan(args) => commands::plan::run(&mut ctx, args),
        Command::Eval(args) => commands::eval::run(&mut ctx, args),
        Command::GenScene(args) => commands::gen_scene::run(&mut ctx, args),
        Command::GenDataset(args) => commands::gen_dataset::run(&mut ctx, args),
    };

    match result {
        Ok(()) => {
            if let Err(e) = ctx.write_manifest() {
                fail(&e);
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(error: &CliError) -> ! {
    eprintln!(
        "{}",
        serde_json::json!({"kind": error.kind(), "message": error.to_string()})
    );
    std::process::exit(error.exit_code());
}
