use std::path::PathBuf;

use clap::Args;
use grasp_core::io::{write_dataset_jsonl, write_pca_json};
use grasp_core::synthetic::{
    benchmark_objects, benchmark_oracle, build_dataset, DatasetBuildSpec, QuotaSpec,
};

use crate::context::Context;
use crate::errors::CliError;

#[derive(Args)]
pub struct GenDatasetArgs {
    /// Dataset build spec TOML; defaults to the built-in benchmark setup.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Number of benchmark objects when no spec is given.
    #[arg(long, default_value_t = 6)]
    pub objects: usize,
    /// Successful samples per grasp type.
    #[arg(long, default_value_t = 20)]
    pub successes: usize,
    /// Failed samples per grasp type.
    #[arg(long, default_value_t = 40)]
    pub failures: usize,
    /// Oracle temperature (label noise; infinity = deterministic).
    #[arg(long, default_value_t = 8.0)]
    pub temperature: f64,
    /// Output dataset file (JSON lines).
    #[arg(long, default_value = "dataset.jsonl")]
    pub out: PathBuf,
    /// Output PCA projection file.
    #[arg(long, default_value = "pca.json")]
    pub pca_out: PathBuf,
}

pub fn run(ctx: &mut Context, args: GenDatasetArgs) -> Result<(), CliError> {
    let spec: DatasetBuildSpec = match &args.spec {
        Some(path) => {
            ctx.record_input(path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
        None => DatasetBuildSpec {
            objects: benchmark_objects(args.objects, ctx.seed.wrapping_add(17)),
            oracle: benchmark_oracle(args.temperature),
            quota: QuotaSpec {
                successes_per_type: args.successes,
                failures_per_type: args.failures,
                attempt_factor: 100,
            },
            heuristic: ctx.config.heuristic.clone(),
            latent_dim: 15,
            ransac_iters: 200,
            inlier_threshold: 0.005,
            grasps_per_visit: 25,
            seed: ctx.seed,
        },
    };

    let built = build_dataset(&spec)?;
    let counts = built.dataset.counts();
    for grasp_type in built.dataset.types() {
        ctx.info(format!(
            "type {:12} successes {:3} failures {:3}",
            grasp_type.name,
            counts.get(&(grasp_type.index, true)).copied().unwrap_or(0),
            counts.get(&(grasp_type.index, false)).copied().unwrap_or(0),
        ));
    }

    let out = ctx.out_path(&args.out);
    let pca_out = ctx.out_path(&args.pca_out);
    write_dataset_jsonl(&out, &built.dataset)?;
    write_pca_json(&pca_out, &built.pca)?;
    ctx.record_output(&out);
    ctx.record_output(&pca_out);
    ctx.info(format!(
        "built {} samples in {} attempts -> {} (+ {})",
        built.dataset.len(),
        built.attempts,
        out.display(),
        pca_out.display()
    ));
    Ok(())
}
