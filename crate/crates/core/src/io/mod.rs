//! File formats: ASCII PLY and 3-column CSV point clouds, JSON-lines
//! datasets, and versioned JSON documents for PCA projections, grasp models,
//! inference results, and evaluation reports.

mod cloud;
mod formats;

pub use cloud::{read_cloud, read_cloud_csv, read_cloud_ply, write_cloud_csv, write_cloud_ply};
pub use formats::{
    dataset_from_records, dataset_to_records, read_dataset_jsonl, read_model_json, read_pca_json,
    read_result_json, write_dataset_jsonl, write_grasp_candidates_jsonl, write_json,
    write_loo_csv, write_model_json, write_pca_json, write_plan_eval_csv, write_result_json,
    DatasetRecord, LooReportFile, PlanEvalFile, ResultFile, DATASET_FEATURE_DIM,
    MODEL_FORMAT_VERSION, PCA_FORMAT_VERSION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("invalid data: {0}")]
    Invalid(String),
}
