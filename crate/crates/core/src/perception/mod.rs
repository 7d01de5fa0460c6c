//! Visual front end: from a raw tabletop point cloud to a 15-D object descriptor.
//!
//! The stages run in order: [`segment_object`] removes the table plane via
//! RANSAC, [`estimate_object_frame`] builds a right-handed frame from the
//! principal axes of the segmented points, [`voxelize`] rasterizes the object
//! into a 20x20x20 occupancy grid centered on that frame, and a fitted
//! [`PcaProjection`] maps the flattened grid down to the visual feature
//! vector consumed by the grasp model.

mod cloud;
mod frame;
mod pca;
mod plane;
mod voxel;

pub use cloud::PointCloud;
pub use frame::{estimate_object_frame, ObjectFrame};
pub use pca::{extract_features, fit_pca, fit_pca_vectors, PcaProjection, VisualFeatures};
pub use plane::{segment_object, PlaneModel};
pub use voxel::{voxelize, VoxelGrid, GRID_DIM, GRID_HALF_EXTENT, VOXEL_CELL_COUNT, VOXEL_SIZE};

use thiserror::Error;

/// Failures of the perception pipeline.
#[derive(Debug, Error)]
pub enum PerceptionError {
    /// RANSAC could not produce a plane hypothesis with at least three
    /// inliers (all sampled triples collinear, or too few points).
    #[error("degenerate plane: no RANSAC hypothesis with >= 3 inliers")]
    DegeneratePlane,
    /// Plane removal left no points above the table.
    #[error("empty segmentation: no points above the table plane")]
    EmptySegmentation,
    /// The point covariance has rank < 2, so principal axes are undefined.
    #[error("degenerate geometry: point covariance rank < 2 (eigenvalue ratio {ratio:.3e})")]
    DegenerateGeometry { ratio: f64 },
    /// Not enough training samples for the requested PCA dimension.
    #[error("insufficient data: PCA with latent dim {latent_dim} needs >= {needed} samples, got {got}")]
    InsufficientData {
        latent_dim: usize,
        needed: usize,
        got: usize,
    },
}
