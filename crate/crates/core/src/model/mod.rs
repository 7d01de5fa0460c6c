//! The probabilistic grasp model: per-type logistic success classifiers and
//! per-type Gaussian-mixture priors over grasp configurations, fitted
//! independently from a labeled dataset.

mod classifier;
mod fit;
mod gaussian;
mod gmm;
mod types;

pub use classifier::{
    assemble_input, fit_classifier, ClassifierDiagnostics, ClassifierSettings, TypeClassifier,
};
pub use fit::{evaluate_loo, fit_model, predict_success, FitReport, GraspModel, LooReport, LooRow,
    TypeFitReport};
pub use gaussian::{GaussianComponent, PreparedGaussian};
pub use gmm::{fit_gmm, fit_prior, prior_log_density, EmDiagnostics, GraspPrior};
pub(crate) use gmm::{log_mixture_density, log_sum_exp};
pub use types::{
    stable_type_seed, ConfigurationBounds, GraspConfiguration, GraspDataset, GraspType,
    TrainingSample, CONFIG_DIM,
};

pub use crate::perception::VisualFeatures;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which samples feed the per-type configuration prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PriorLabelFilter {
    /// Fit the prior on successful grasps only, so it encodes preferred
    /// configurations rather than attempted ones.
    #[default]
    SuccessesOnly,
    /// Fit on every sample of the type regardless of label.
    All,
}

/// Tunables for model fitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Gaussian components per type prior.
    pub gmm_components: usize,
    /// Ridge penalty on classifier weights (bias excluded).
    pub l2_strength: f64,
    pub em_restarts: usize,
    pub em_max_iterations: usize,
    /// EM stops when the log-likelihood gain drops below this.
    pub em_tolerance: f64,
    /// Eigenvalue floor applied to every mixture covariance.
    pub covariance_floor: f64,
    pub classifier_max_sweeps: usize,
    /// Classifier stops at this penalized-gradient norm.
    pub classifier_tolerance: f64,
    pub prior_label_filter: PriorLabelFilter,
    /// Base seed for EM restarts; per-type streams derive from the type name.
    pub seed: u64,
    pub bounds: ConfigurationBounds,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            gmm_components: 4,
            l2_strength: 1e-4,
            em_restarts: 5,
            em_max_iterations: 500,
            em_tolerance: 1e-8,
            covariance_floor: 1e-6,
            classifier_max_sweeps: 10_000,
            classifier_tolerance: 1e-6,
            prior_label_filter: PriorLabelFilter::default(),
            seed: 0,
            bounds: ConfigurationBounds::default_allegro(),
        }
    }
}

impl ModelConfig {
    pub fn classifier_settings(&self) -> ClassifierSettings {
        ClassifierSettings {
            l2_strength: self.l2_strength,
            max_sweeps: self.classifier_max_sweeps,
            gradient_tolerance: self.classifier_tolerance,
        }
    }
}

/// Failures of model fitting and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("grasp type {type_name:?} has samples of only one label")]
    SingleClassData { type_name: String },
    #[error("grasp type {type_name:?}: {got} samples, need at least {needed}")]
    InsufficientData {
        type_name: String,
        needed: usize,
        got: usize,
    },
    #[error("unknown grasp type index {0}")]
    UnknownType(usize),
    #[error("inconsistent dimensions: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
