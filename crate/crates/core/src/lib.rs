//! Probabilistic grasp planning for multi-fingered hands.
//!
//! The pipeline turns a tabletop point cloud into a compact visual descriptor,
//! learns per-grasp-type success classifiers together with data-driven priors
//! over grasp configurations, and synthesizes precision and power grasps for
//! novel objects by bound-constrained MAP inference.
//!
//! Modules follow the pipeline order:
//!
//! * [`perception`] — plane segmentation, object frame estimation, voxel
//!   occupancy grids, and the PCA feature projection.
//! * [`model`] — the probabilistic grasp model: logistic success classifiers
//!   and Gaussian-mixture configuration priors, fitted per grasp type.
//! * [`optim`] — the bound-constrained limited-memory quasi-Newton solver
//!   used by inference.
//! * [`inference`] — the MAP objective, its analytic gradient, and the
//!   per-type planner.
//! * [`heuristic`] — geometry-based grasp generation from object bounding
//!   boxes, used for data collection and inference initialization.
//! * [`synthetic`] — synthetic scenes, a parametric success oracle, and
//!   experiment protocols for desk-scale evaluation.
//! * [`io`] — point-cloud, dataset, model, and report file formats.

pub mod heuristic;
pub mod inference;
pub mod io;
pub mod model;
pub mod optim;
pub mod perception;
pub mod synthetic;

pub use heuristic::{BoundingBox, HeuristicGrasp, HeuristicParams};
pub use inference::{InferenceConfig, InferenceResult};
pub use model::{
    ConfigurationBounds, GraspConfiguration, GraspDataset, GraspModel, GraspType, ModelConfig,
    TrainingSample,
};
pub use perception::{
    ObjectFrame, PcaProjection, PlaneModel, PointCloud, VisualFeatures, VoxelGrid,
};
