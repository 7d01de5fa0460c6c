use std::path::PathBuf;

use clap::Args;
use grasp_core::io::{read_cloud, read_pca_json, write_json, write_pca_json};
use grasp_core::perception::{extract_features, fit_pca, PcaProjection, VoxelGrid};
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::errors::CliError;

use super::{perceive_cloud, source_id_of};

/// Visual feature file: `{version, source_id, values[latent_dim]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureFile {
    pub version: u32,
    pub source_id: String,
    pub values: Vec<f64>,
}

pub const FEATURE_FORMAT_VERSION: u32 = 1;

#[derive(Args)]
pub struct ExtractArgs {
    /// Input point cloud (.ply or .csv).
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Fitted PCA projection (required unless --fit-pca is given).
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Output feature file.
    #[arg(long, default_value = "features.json")]
    pub out: PathBuf,
    /// Fit the PCA projection from every cloud file in this directory.
    #[arg(long)]
    pub fit_pca: Option<PathBuf>,
    /// Where to write the fitted projection.
    #[arg(long, default_value = "pca.json")]
    pub pca_out: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub latent_dim: usize,
    #[arg(long, default_value_t = 200)]
    pub ransac_iters: usize,
    #[arg(long, default_value_t = 0.005)]
    pub inlier_threshold: f64,
    /// Also write the segmented object cloud (.ply or .csv by extension).
    #[arg(long)]
    pub segmented_out: Option<PathBuf>,
}

pub fn run(ctx: &mut Context, args: ExtractArgs) -> Result<(), CliError> {
    let mut rng = ctx.rng();

    let pca: PcaProjection = if let Some(dir) = &args.fit_pca {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("ply") | Some("csv")
                )
            })
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(CliError::data(format!(
                "{}: no .ply or .csv clouds found",
                dir.display()
            )));
        }
        let mut grids: Vec<VoxelGrid> = Vec::with_capacity(paths.len());
        for path in &paths {
            ctx.record_input(path);
            let cloud = read_cloud(path)?;
            let (_, _, grid) =
                perceive_cloud(&cloud, args.ransac_iters, args.inlier_threshold, &mut rng)?;
            grids.push(grid);
        }
        let pca = fit_pca(&grids, args.latent_dim)?;
        let pca_out = ctx.out_path(&args.pca_out);
        write_pca_json(&pca_out, &pca)?;
        ctx.record_output(&pca_out);
        ctx.info(format!(
            "fitted PCA on {} grids -> {}",
            grids.len(),
            pca_out.display()
        ));
        pca
    } else {
        let path = args.pca.as_ref().ok_or_else(|| {
            CliError::data("either --pca or --fit-pca is required".to_string())
        })?;
        ctx.record_input(path);
        read_pca_json(path)?
    };

    if let Some(cloud_path) = &args.cloud {
        ctx.record_input(cloud_path);
        let cloud = read_cloud(cloud_path)?;
        let (object_cloud, _, grid) =
            perceive_cloud(&cloud, args.ransac_iters, args.inlier_threshold, &mut rng)?;
        if let Some(segmented_path) = &args.segmented_out {
            let segmented_path = ctx.out_path(segmented_path);
            match segmented_path.extension().and_then(|e| e.to_str()) {
                Some("ply") => grasp_core::io::write_cloud_ply(&segmented_path, &object_cloud)?,
                _ => grasp_core::io::write_cloud_csv(&segmented_path, &object_cloud)?,
            }
            ctx.record_output(&segmented_path);
        }
        let features = extract_features(&grid, &pca).with_source_id(source_id_of(cloud_path));
        let out = ctx.out_path(&args.out);
        write_json(
            &out,
            &FeatureFile {
                version: FEATURE_FORMAT_VERSION,
                source_id: features.source_id.clone(),
                values: features.values.iter().copied().collect(),
            },
        )?;
        ctx.record_output(&out);
        ctx.info(format!(
            "extracted {}-D features ({} voxels dropped) -> {}",
            features.dim(),
            grid.dropped_count,
            out.display()
        ));
    } else if args.fit_pca.is_none() {
        return Err(CliError::data(
            "nothing to do: give --cloud, --fit-pca, or both".to_string(),
        ));
    }
    Ok(())
}
