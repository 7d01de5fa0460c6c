use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_scene, OracleSpec, SyntheticObjectSpec, SyntheticError};
use crate::heuristic::{compute_bounding_box, generate_heuristic_grasps, BoundingBox, HeuristicParams};
use crate::model::{GraspDataset, GraspType, TrainingSample};
use crate::perception::{
    estimate_object_frame, extract_features, fit_pca, segment_object, voxelize, ObjectFrame,
    PcaProjection, PerceptionError, PointCloud, VoxelGrid,
};

/// Sample quotas per grasp type, mirroring the training protocol's
/// 20-success / 40-failure split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QuotaSpec {
    pub successes_per_type: usize,
    pub failures_per_type: usize,
    /// Attempt budget multiplier: collection aborts for a type after
    /// `attempt_factor * (successes + failures)` attempts.
    pub attempt_factor: usize,
}

impl Default for QuotaSpec {
    fn default() -> Self {
        Self {
            successes_per_type: 20,
            failures_per_type: 40,
            attempt_factor: 100,
        }
    }
}

/// Everything needed to build a labeled dataset from synthetic scenes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetBuildSpec {
    pub objects: Vec<SyntheticObjectSpec>,
    pub oracle: OracleSpec,
    #[serde(default)]
    pub quota: QuotaSpec,
    #[serde(default)]
    pub heuristic: HeuristicParams,
    #[serde(default = "default_latent_dim")]
    pub latent_dim: usize,
    #[serde(default = "default_ransac_iters")]
    pub ransac_iters: usize,
    #[serde(default = "default_inlier_threshold")]
    pub inlier_threshold: f64,
    #[serde(default = "default_grasps_per_visit")]
    pub grasps_per_visit: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_latent_dim() -> usize {
    15
}

pub(crate) fn default_ransac_iters() -> usize {
    200
}

pub(crate) fn default_inlier_threshold() -> f64 {
    0.005
}

fn default_grasps_per_visit() -> usize {
    25
}

/// A scene pushed through the perception pipeline.
#[derive(Debug, Clone)]
pub struct PerceivedScene {
    pub object_cloud: PointCloud,
    pub frame: ObjectFrame,
    pub grid: VoxelGrid,
    pub bbox: BoundingBox,
    pub camera: Vector3<f64>,
}

/// Run segmentation, frame estimation, voxelization, and bounding-box
/// computation on a synthetic scene.
pub fn perceive_scene(
    spec: &SyntheticObjectSpec,
    ransac_iters: usize,
    inlier_threshold: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PerceivedScene, PerceptionError> {
    let cloud = generate_scene(spec);
    let (object_cloud, _) = segment_object(&cloud, ransac_iters, inlier_threshold, rng)?;
    let frame = estimate_object_frame(&object_cloud)?;
    let grid = voxelize(&object_cloud, &frame);
    let bbox = compute_bounding_box(&object_cloud, &frame);
    Ok(PerceivedScene {
        object_cloud,
        frame,
        grid,
        bbox,
        camera: spec.camera_position(),
    })
}

/// The build output: the labeled dataset, the PCA fitted on the training
/// grids, and how many grasp attempts were consumed.
#[derive(Debug)]
pub struct BuiltDataset {
    pub dataset: GraspDataset,
    pub pca: PcaProjection,
    pub attempts: usize,
}

/// Build a labeled dataset by rejection-sampling heuristic grasps until the
/// per-(type, label) quotas are met.
///
/// Scenes are perceived once and visited round-robin; every attempt draws a
/// heuristic grasp, labels it with the oracle for the type being collected,
/// and keeps it only while that (type, label) bucket is unfilled. Features
/// come from a PCA fitted on the voxel grids of the accepted samples, one
/// grid instance per sample. Bit-for-bit reproducible under the spec seed.
pub fn build_dataset(spec: &DatasetBuildSpec) -> Result<BuiltDataset, SyntheticError> {
    spec.oracle
        .validate()
        .map_err(SyntheticError::InvalidSpec)?;
    if spec.objects.is_empty() {
        return Err(SyntheticError::InvalidSpec("no objects given".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut scenes = Vec::with_capacity(spec.objects.len());
    for object in &spec.objects {
        scenes.push(perceive_scene(
            object,
            spec.ransac_iters,
            spec.inlier_threshold,
            &mut rng,
        )?);
    }

    // (scene index, config, type name, label) until features exist.
    let mut pending: Vec<(usize, crate::model::GraspConfiguration, String, bool)> = Vec::new();
    let mut total_attempts = 0usize;

    for target in &spec.oracle.targets {
        let type_name = &target.type_name;
        let quota_success = spec.quota.successes_per_type;
        let quota_failure = spec.quota.failures_per_type;
        let budget = spec.quota.attempt_factor * (quota_success + quota_failure).max(1);
        let mut successes = 0usize;
        let mut failures = 0usize;
        let mut attempts = 0usize;
        let mut scene_cursor = 0usize;

        while (successes < quota_success || failures < quota_failure) && attempts < budget {
            let scene_index = scene_cursor % scenes.len();
            scene_cursor += 1;
            let scene = &scenes[scene_index];
            let grasps = generate_heuristic_grasps(
                &scene.bbox,
                &scene.camera,
                &spec.heuristic,
                spec.grasps_per_visit,
                &mut rng,
            );
            for grasp in grasps {
                if attempts >= budget
                    || (successes >= quota_success && failures >= quota_failure)
                {
                    break;
                }
                attempts += 1;
                let label = spec
                    .oracle
                    .label(&grasp.config, type_name, &mut rng)
                    .expect("target exists");
                let bucket = if label { &mut successes } else { &mut failures };
                let quota = if label { quota_success } else { quota_failure };
                if *bucket < quota {
                    *bucket += 1;
                    pending.push((scene_index, grasp.config, type_name.clone(), label));
                }
            }
        }
        total_attempts += attempts;
        if successes < quota_success {
            return Err(SyntheticError::QuotaUnreachable {
                type_name: type_name.clone(),
                label: true,
                achieved: successes,
                quota: quota_success,
                attempts,
            });
        }
        if failures < quota_failure {
            return Err(SyntheticError::QuotaUnreachable {
                type_name: type_name.clone(),
                label: false,
                achieved: failures,
                quota: quota_failure,
                attempts,
            });
        }
    }

    // PCA over the grids of the accepted samples, then features per sample.
    let grids: Vec<VoxelGrid> = pending
        .iter()
        .map(|(scene_index, _, _, _)| scenes[*scene_index].grid.clone())
        .collect();
    let pca = fit_pca(&grids, spec.latent_dim)?;

    let samples: Vec<TrainingSample> = pending
        .into_iter()
        .enumerate()
        .map(|(i, (scene_index, config, type_name, label))| {
            let sample_id = format!("{}-{:05}", type_name, i);
            let features = extract_features(&scenes[scene_index].grid, &pca)
                .with_source_id(spec.objects[scene_index].name.clone());
            TrainingSample {
                sample_id,
                config,
                grasp_type: GraspType::new(0, type_name),
                features,
                label,
            }
        })
        .collect();

    Ok(BuiltDataset {
        dataset: GraspDataset::new(samples)?,
        pca,
        attempts: total_attempts,
    })
}
