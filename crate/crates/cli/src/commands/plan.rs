use std::path::PathBuf;

use clap::Args;
use grasp_core::heuristic::{compute_bounding_box, generate_heuristic_grasps, select_init};
use grasp_core::inference::{plan_grasp_for_types, InferenceConfig};
use grasp_core::io::{read_cloud, read_model_json, read_pca_json, write_result_json};
use grasp_core::perception::extract_features;
use nalgebra::Vector3;

use crate::context::Context;
use crate::errors::CliError;

use super::{perceive_cloud, source_id_of};

#[derive(Args)]
pub struct PlanArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// PCA projection matching the model's training features.
    #[arg(long)]
    pub pca: PathBuf,
    /// Scene point cloud (.ply or .csv).
    #[arg(long)]
    pub cloud: PathBuf,
    /// Camera position "x,y,z" in the cloud frame, used to pick the
    /// closest heuristic grasp as the initialization.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.2, 0.6])]
    pub camera: Vec<f64>,
    /// Output result file.
    #[arg(long, default_value = "plan.json")]
    pub out: PathBuf,
    /// Plan only this grasp type.
    #[arg(long = "type")]
    pub grasp_type: Option<String>,
    /// Weight on the log-prior term.
    #[arg(long)]
    pub prior_weight: Option<f64>,
    /// Heuristic candidates to draw for the initialization.
    #[arg(long, default_value_t = 20)]
    pub candidates: usize,
    #[arg(long, default_value_t = 200)]
    pub ransac_iters: usize,
    #[arg(long, default_value_t = 0.005)]
    pub inlier_threshold: f64,
}

pub fn run(ctx: &mut Context, args: PlanArgs) -> Result<(), CliError> {
    ctx.record_input(&args.model);
    ctx.record_input(&args.pca);
    ctx.record_input(&args.cloud);

    let model = read_model_json(&args.model)?;
    let pca = read_pca_json(&args.pca)?;
    let cloud = read_cloud(&args.cloud)?;

    let mut inference: InferenceConfig = ctx.config.inference.clone();
    // The model's bounds govern planning unless the config overrides them.
    inference.bounds = model.bounds.clone();
    if let Some(weight) = args.prior_weight {
        inference.prior_weight = weight;
    }
    ctx.config.inference = inference.clone();

    let mut rng = ctx.rng();
    let (object_cloud, frame, grid) =
        perceive_cloud(&cloud, args.ransac_iters, args.inlier_threshold, &mut rng)?;
    let features = extract_features(&grid, &pca).with_source_id(source_id_of(&args.cloud));
    let bbox = compute_bounding_box(&object_cloud, &frame);
    let camera = Vector3::new(args.camera[0], args.camera[1], args.camera[2]);
    let grasps = generate_heuristic_grasps(
        &bbox,
        &camera,
        &ctx.config.heuristic,
        args.candidates,
        &mut rng,
    );
    let init = select_init(&grasps)?.config.clone();

    let type_indices: Vec<usize> = match &args.grasp_type {
        Some(name) => {
            let t = model.type_by_name(name).ok_or_else(|| {
                CliError::data(format!(
                    "model has no grasp type {name:?} (types: {:?})",
                    model.types().iter().map(|t| t.name.clone()).collect::<Vec<_>>()
                ))
            })?;
            vec![t.index]
        }
        None => (0..model.num_types()).collect(),
    };
    let inits = vec![init; type_indices.len()];

    let result = plan_grasp_for_types(&model, &type_indices, &features, &inits, &inference)?;
    for r in &result.per_type_results {
        ctx.debug(format!(
            "type {:12} objective {:+.4} iterations {} converged {}",
            r.grasp_type.name, r.objective_value, r.iterations, r.converged
        ));
    }

    let out = ctx.out_path(&args.out);
    write_result_json(&out, &result)?;
    ctx.record_output(&out);
    ctx.info(format!(
        "planned {} grasp, success probability {:.3} -> {}",
        result.grasp_type.name, result.success_probability, out.display()
    ));
    Ok(())
}
