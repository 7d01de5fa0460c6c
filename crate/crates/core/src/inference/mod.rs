//! Grasp planning as MAP inference.
//!
//! For each grasp type the planner minimizes the negative log posterior of a
//! successful grasp over the 14-D configuration under box constraints:
//! `f(theta) = -log sigma(w^T x) - lambda * log sum_k pi_k N(theta | mu_k,
//! Sigma_k)`, with `x` the concatenated configuration/feature input and
//! `lambda` the prior weight. The best type is the outer argmin over the
//! per-type minima.

use nalgebra::DVector;
use thiserror::Error;

use crate::model::{
    assemble_input, GraspConfiguration, GraspModel, GraspType, ModelError, VisualFeatures,
};
use crate::model::{ConfigurationBounds, GaussianComponent};
use crate::optim::{minimize_bounded, LbfgsConfig, MinimizeOutcome, OptimError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("objective is non-finite at the initial point for type {type_name:?}")]
    NonFiniteObjective { type_name: String },
    #[error("inference failed for every grasp type: {summary}")]
    AllTypesFailed { summary: String },
    #[error("expected {expected} initial configurations, got {got}")]
    MismatchedInits { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Inference settings. `prior_weight` is the multiplicative coefficient on
/// the log-prior term (0.5 by default, keeping the prior from dominating).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub prior_weight: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the projected-gradient norm.
    pub gradient_tolerance: f64,
    pub lbfgs_memory: usize,
    pub bounds: ConfigurationBounds,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            prior_weight: 0.5,
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            lbfgs_memory: 10,
            bounds: ConfigurationBounds::default_allegro(),
        }
    }
}

impl InferenceConfig {
    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig {
            memory: self.lbfgs_memory,
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            ..LbfgsConfig::default()
        }
    }
}

/// The inner minimization result for one grasp type.
#[derive(Debug, Clone)]
pub struct TypeMinimization {
    pub grasp_type: GraspType,
    pub config: GraspConfiguration,
    pub objective_value: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The start point (after projection into bounds, if it was outside).
    pub init: GraspConfiguration,
    pub init_projected: bool,
}

/// Final planning result: the best configuration and type, its success
/// probability, and the per-type inner results.
#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub config: GraspConfiguration,
    pub grasp_type: GraspType,
    pub objective_value: f64,
    pub success_probability: f64,
    pub per_type_results: Vec<TypeMinimization>,
    /// Types whose inner minimization failed, with the failure description.
    pub failures: Vec<(GraspType, String)>,
    pub trace: Vec<f64>,
    pub init: GraspConfiguration,
}

/// The per-type objective with the visual features folded in: only theta
/// varies during the inner optimization.
struct TypeObjective {
    theta_weights: DVector<f64>,
    /// Contribution of the (fixed) features and bias to the classifier margin.
    fixed_margin: f64,
    /// (ln pi_k, prepared Gaussian) per mixture component.
    prior: Vec<(f64, crate::model::PreparedGaussian)>,
    prior_weight: f64,
}

impl TypeObjective {
    fn new(
        model: &GraspModel,
        type_index: usize,
        features: &VisualFeatures,
        cfg: &InferenceConfig,
    ) -> Result<Self, ModelError> {
        let classifier = model.classifier(type_index)?;
        let prior = model.prior(type_index)?;
        let x = assemble_input(&GraspConfiguration::zeros(), features);
        let fixed_margin = classifier.weights.dot(&x);
        Ok(Self {
            theta_weights: classifier.theta_weights(),
            fixed_margin,
            prior: prior.prepared(),
            prior_weight: cfg.prior_weight,
        })
    }

    fn margin(&self, theta: &DVector<f64>) -> f64 {
        self.theta_weights.dot(theta) + self.fixed_margin
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let z = self.margin(theta);
        let classifier_term = softplus(-z); // -log sigma(z)
        let prior_term = crate::model::log_mixture_density(&self.prior, theta);
        classifier_term - self.prior_weight * prior_term
    }

    fn value_and_grad(&self, theta: &DVector<f64>) -> (f64, DVector<f64>) {
        let z = self.margin(theta);
        let classifier_term = softplus(-z);

        let logs: Vec<f64> = self
            .prior
            .iter()
            .map(|(log_pi, g)| log_pi + g.log_density(theta))
            .collect();
        let lse = crate::model::log_sum_exp(&logs);

        let mut grad = -&self.theta_weights * (1.0 - sigmoid(z));
        for ((log_term, (_, gaussian)), _) in logs.iter().zip(&self.prior).zip(0..) {
            let responsibility = (log_term - lse).exp();
            if responsibility > 0.0 {
                grad += gaussian.precision_times_diff(theta) * (self.prior_weight * responsibility);
            }
        }
        (classifier_term - self.prior_weight * lse, grad)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// The MAP objective for one grasp type at one configuration.
pub fn objective(
    model: &GraspModel,
    type_index: usize,
    features: &VisualFeatures,
    config: &GraspConfiguration,
    cfg: &InferenceConfig,
) -> Result<f64, InferenceError> {
    let obj = TypeObjective::new(model, type_index, features, cfg)?;
    Ok(obj.value(&config.to_vector()))
}

/// Analytic gradient of [`objective`] with respect to the configuration.
///
/// The classifier contributes `-w_theta (1 - sigma(w^T x))`; the prior
/// contributes the responsibility-weighted sum of `Sigma_k^{-1}(theta -
/// mu_k)`, scaled by the prior weight.
pub fn gradient(
    model: &GraspModel,
    type_index: usize,
    features: &VisualFeatures,
    config: &GraspConfiguration,
    cfg: &InferenceConfig,
) -> Result<DVector<f64>, InferenceError> {
    let obj = TypeObjective::new(model, type_index, features, cfg)?;
    Ok(obj.value_and_grad(&config.to_vector()).1)
}

/// Minimize the MAP objective of one grasp type from `init` under the box
/// bounds. The start point is projected into the bounds if necessary (the
/// result records that through `init_projected`).
pub fn minimize_for_type(
    model: &GraspModel,
    type_index: usize,
    features: &VisualFeatures,
    init: &GraspConfiguration,
    cfg: &InferenceConfig,
) -> Result<TypeMinimization, InferenceError> {
    let grasp_type = model.classifier(type_index)?.grasp_type.clone();
    let obj = TypeObjective::new(model, type_index, features, cfg)?;
    let x0 = init.to_vector();
    let outcome: MinimizeOutcome = minimize_bounded(
        |theta| obj.value_and_grad(theta),
        &x0,
        &cfg.bounds.lower,
        &cfg.bounds.upper,
        &cfg.lbfgs(),
    )
    .map_err(|e| match e {
        OptimError::NonFiniteAtInit => InferenceError::NonFiniteObjective {
            type_name: grasp_type.name.clone(),
        },
        OptimError::InvalidBounds(_) => InferenceError::NonFiniteObjective {
            type_name: grasp_type.name.clone(),
        },
    })?;

    let projected_init = cfg.bounds.clamp(init);
    Ok(TypeMinimization {
        grasp_type,
        config: GraspConfiguration::from_vector(&outcome.x),
        objective_value: outcome.value,
        trace: outcome.trace,
        iterations: outcome.iterations,
        converged: outcome.converged,
        init: projected_init,
        init_projected: outcome.init_projected,
    })
}

/// Plan a grasp over every type in the model, given one init per type (in
/// type-index order).
pub fn plan_grasp(
    model: &GraspModel,
    features: &VisualFeatures,
    inits: &[GraspConfiguration],
    cfg: &InferenceConfig,
) -> Result<InferenceResult, InferenceError> {
    let types: Vec<usize> = (0..model.num_types()).collect();
    plan_grasp_for_types(model, &types, features, inits, cfg)
}

/// Plan a grasp over a subset of the model's types (e.g. a forced type).
/// `inits` pairs with `type_indices` positionally.
pub fn plan_grasp_for_types(
    model: &GraspModel,
    type_indices: &[usize],
    features: &VisualFeatures,
    inits: &[GraspConfiguration],
    cfg: &InferenceConfig,
) -> Result<InferenceResult, InferenceError> {
    if inits.len() != type_indices.len() {
        return Err(InferenceError::MismatchedInits {
            expected: type_indices.len(),
            got: inits.len(),
        });
    }
    let mut per_type_results = Vec::new();
    let mut failures = Vec::new();
    for (&type_index, init) in type_indices.iter().zip(inits) {
        match minimize_for_type(model, type_index, features, init, cfg) {
            Ok(result) => per_type_results.push(result),
            Err(err) => {
                let grasp_type = model
                    .classifier(type_index)
                    .map(|c| c.grasp_type.clone())
                    .unwrap_or_else(|_| GraspType::new(type_index, "unknown"));
                failures.push((grasp_type, err.to_string()));
            }
        }
    }
    if per_type_results.is_empty() {
        let summary = failures
            .iter()
            .map(|(t, e)| format!("{}: {}", t.name, e))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(InferenceError::AllTypesFailed { summary });
    }

    // Outer argmin; equal objectives resolve to the lowest type index
    // because results arrive in ascending type order.
    let best = per_type_results
        .iter()
        .min_by(|a, b| {
            a.objective_value
                .total_cmp(&b.objective_value)
                .then(a.grasp_type.index.cmp(&b.grasp_type.index))
        })
        .expect("non-empty")
        .clone();

    let x = assemble_input(&best.config, features);
    let success_probability = model.classifier(best.grasp_type.index)?.probability(&x);
    Ok(InferenceResult {
        config: best.config.clone(),
        grasp_type: best.grasp_type.clone(),
        objective_value: best.objective_value,
        success_probability,
        per_type_results,
        failures,
        trace: best.trace.clone(),
        init: best.init.clone(),
    })
}

/// Construct a model directly from parts; used by tests and the type-free
/// comparisons.
pub fn model_from_parts(
    classifiers: Vec<crate::model::TypeClassifier>,
    priors: Vec<crate::model::GraspPrior>,
    bounds: ConfigurationBounds,
) -> GraspModel {
    let m = classifiers.len();
    GraspModel {
        classifiers,
        priors,
        type_prior: vec![1.0 / m as f64; m],
        bounds,
        pca: None,
    }
}

/// A single-Gaussian prior helper for tests and synthetic setups.
pub fn isotropic_component(mean: DVector<f64>, variance: f64) -> GaussianComponent {
    let d = mean.len();
    GaussianComponent {
        weight: 1.0,
        mean,
        covariance: nalgebra::DMatrix::identity(d, d) * variance,
    }
}
