pub mod eval;
pub mod extract;
pub mod gen_dataset;
pub mod gen_scene;
pub mod plan;
pub mod train;

use std::path::Path;

use grasp_core::perception::{
    estimate_object_frame, segment_object, voxelize, ObjectFrame, PointCloud, VoxelGrid,
};
use rand_chacha::ChaCha8Rng;

use crate::errors::CliError;

/// Segment, frame, and voxelize a raw cloud: the shared perception front of
/// `extract` and `plan`.
pub fn perceive_cloud(
    cloud: &PointCloud,
    ransac_iters: usize,
    inlier_threshold: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(PointCloud, ObjectFrame, VoxelGrid), CliError> {
    let (object_cloud, _plane) = segment_object(cloud, ransac_iters, inlier_threshold, rng)?;
    let frame = estimate_object_frame(&object_cloud)?;
    let grid = voxelize(&object_cloud, &frame);
    Ok((object_cloud, frame, grid))
}

pub fn source_id_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cloud")
        .to_string()
}
