//! Desk-scale stand-ins for the robot: synthetic tabletop scenes, a
//! parametric grasp-success oracle, dataset generation at the training
//! protocol's scale, and the evaluation experiments.

mod dataset;
mod experiment;
mod oracle;
mod scene;

pub use dataset::{
    build_dataset, perceive_scene, BuiltDataset, DatasetBuildSpec, PerceivedScene, QuotaSpec,
};
pub use experiment::{
    benchmark_objects, benchmark_oracle, paired_comparison, run_plan_eval, MethodTypeRate,
    PairedComparison, PlanEvalReport, PlanEvalSpec, TrialRow, METHOD_HEURISTIC, METHOD_TYPED,
    METHOD_TYPE_FREE,
};
pub use oracle::{OracleSpec, TypeTarget};
pub use scene::{generate_scene, Primitive, Shape, ShapePart, SyntheticObjectSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error(
        "quota unreachable for type {type_name:?} label {label}: {achieved}/{quota} after {attempts} attempts"
    )]
    QuotaUnreachable {
        type_name: String,
        label: bool,
        achieved: usize,
        quota: usize,
        attempts: usize,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Perception(#[from] crate::perception::PerceptionError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Inference(#[from] crate::inference::InferenceError),
    #[error(transparent)]
    Heuristic(#[from] crate::heuristic::HeuristicError),
}
