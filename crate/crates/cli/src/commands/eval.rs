use std::path::PathBuf;

use clap::Args;
use grasp_core::io::{
    read_dataset_jsonl, read_model_json, read_pca_json, write_json, write_loo_csv,
    write_plan_eval_csv, LooReportFile,
};
use grasp_core::model::evaluate_loo;
use grasp_core::synthetic::{
    benchmark_objects, benchmark_oracle, paired_comparison, run_plan_eval, PlanEvalSpec,
    METHOD_HEURISTIC, METHOD_TYPED, METHOD_TYPE_FREE,
};

use crate::context::Context;
use crate::errors::CliError;

#[derive(Args)]
pub struct EvalArgs {
    /// Protocol: "loo" (leave-one-out classifier evaluation) or
    /// "plan-eval" (typed vs type-free vs heuristic planning comparison).
    #[arg(long)]
    pub protocol: String,
    /// Dataset for the loo protocol.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Typed model for plan-eval.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Type-free (single-type) model for plan-eval.
    #[arg(long)]
    pub type_free_model: Option<PathBuf>,
    /// PCA projection for plan-eval.
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Plan-eval spec TOML; defaults to the built-in benchmark scenes.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Number of benchmark objects when no spec file is given.
    #[arg(long, default_value_t = 10)]
    pub objects: usize,
    /// Poses per object when no spec file is given.
    #[arg(long, default_value_t = 5)]
    pub poses: usize,
    /// Oracle temperature when no spec file is given.
    #[arg(long, default_value_t = 8.0)]
    pub temperature: f64,
    /// Output file prefix (writes `<prefix>.json` and `<prefix>.csv`).
    #[arg(long, default_value = "eval")]
    pub out_prefix: String,
}

pub fn run(ctx: &mut Context, args: EvalArgs) -> Result<(), CliError> {
    match args.protocol.as_str() {
        "loo" => run_loo(ctx, &args),
        "plan-eval" => run_plan_eval_cmd(ctx, &args),
        other => Err(CliError::data(format!(
            "unknown protocol {other:?} (use loo or plan-eval)"
        ))),
    }
}

fn run_loo(ctx: &mut Context, args: &EvalArgs) -> Result<(), CliError> {
    let dataset_path = args
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::data("loo protocol requires --dataset".to_string()))?;
    ctx.record_input(dataset_path);
    let dataset = read_dataset_jsonl(dataset_path)?;
    let report = evaluate_loo(&dataset, &ctx.config.model)?;

    for row in &report.per_type {
        ctx.info(format!(
            "loo {:12} accuracy {:.3} f1 {:.3} ({} samples)",
            row.grasp_type.name, row.accuracy, row.f1, row.count
        ));
    }
    ctx.info(format!(
        "loo overall      accuracy {:.3} f1 {:.3} ({} samples)",
        report.overall_accuracy, report.overall_f1, report.count
    ));

    let json_path = ctx.out_path(&PathBuf::from(format!("{}.json", args.out_prefix)));
    let csv_path = ctx.out_path(&PathBuf::from(format!("{}.csv", args.out_prefix)));
    write_json(&json_path, &LooReportFile::from(&report))?;
    write_loo_csv(&csv_path, &report)?;
    ctx.record_output(&json_path);
    ctx.record_output(&csv_path);
    Ok(())
}

fn run_plan_eval_cmd(ctx: &mut Context, args: &EvalArgs) -> Result<(), CliError> {
    let model_path = args
        .model
        .as_ref()
        .ok_or_else(|| CliError::data("plan-eval requires --model".to_string()))?;
    let type_free_path = args.type_free_model.as_ref().ok_or_else(|| {
        CliError::data("plan-eval requires --type-free-model".to_string())
    })?;
    let pca_path = args
        .pca
        .as_ref()
        .ok_or_else(|| CliError::data("plan-eval requires --pca".to_string()))?;
    ctx.record_input(model_path);
    ctx.record_input(type_free_path);
    ctx.record_input(pca_path);

    let typed = read_model_json(model_path)?;
    let type_free = read_model_json(type_free_path)?;
    let pca = read_pca_json(pca_path)?;

    let mut spec: PlanEvalSpec = match &args.spec {
        Some(path) => {
            ctx.record_input(path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
        None => PlanEvalSpec {
            objects: benchmark_objects(args.objects, ctx.seed.wrapping_add(101)),
            poses_per_object: args.poses,
            oracle: benchmark_oracle(args.temperature),
            heuristic: ctx.config.heuristic.clone(),
            inference: ctx.config.inference.clone(),
            heuristic_candidates: 20,
            ransac_iters: 200,
            inlier_threshold: 0.005,
            seed: ctx.seed,
        },
    };
    spec.inference.bounds = typed.bounds.clone();

    let report = run_plan_eval(&typed, &type_free, &pca, &spec)?;
    for rate in &report.rates {
        ctx.info(format!(
            "plan-eval {:10} {:12} {:3}/{:3} = {:.3}",
            rate.method, rate.grasp_type, rate.successes, rate.trials, rate.rate
        ));
    }
    for baseline in [METHOD_TYPE_FREE, METHOD_HEURISTIC] {
        let cmp = paired_comparison(&report.rows, METHOD_TYPED, baseline);
        ctx.info(format!(
            "paired typed vs {:10}: {} pairs, mean diff {:+.3}, 95% lower bound {:+.3}",
            baseline, cmp.pairs, cmp.mean_difference, cmp.lower_confidence_bound
        ));
    }

    let json_path = ctx.out_path(&PathBuf::from(format!("{}.json", args.out_prefix)));
    let csv_path = ctx.out_path(&PathBuf::from(format!("{}.csv", args.out_prefix)));
    write_json(&json_path, &report)?;
    write_plan_eval_csv(&csv_path, &report.rows)?;
    ctx.record_output(&json_path);
    ctx.record_output(&csv_path);
    Ok(())
}
