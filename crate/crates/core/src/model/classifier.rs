use nalgebra::DVector;

use super::{GraspDataset, GraspType, ModelError, CONFIG_DIM};
use crate::perception::VisualFeatures;

/// Classifier input: grasp configuration, visual features, and a trailing
/// bias slot, in that fixed order.
pub fn assemble_input(config: &super::GraspConfiguration, features: &VisualFeatures) -> DVector<f64> {
    let theta = config.to_vector();
    let dim = CONFIG_DIM + features.dim() + 1;
    let mut x = DVector::zeros(dim);
    x.rows_mut(0, CONFIG_DIM).copy_from(&theta);
    x.rows_mut(CONFIG_DIM, features.dim())
        .copy_from(&features.values);
    x[dim - 1] = 1.0;
    x
}

/// Numerically stable logistic function, clamped into the open unit
/// interval so downstream logs stay finite.
pub fn sigmoid(z: f64) -> f64 {
    logistic_terms(z).0
}

/// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    logistic_terms(z).1
}

/// (sigmoid(z), softplus(z)) from a single exponential.
fn logistic_terms(z: f64) -> (f64, f64) {
    let e = (-z.abs()).exp();
    let softplus = z.max(0.0) + e.ln_1p();
    let sigma = if z >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    };
    (sigma.clamp(1e-300, 1.0 - 1e-16), softplus)
}

/// A logistic-regression grasp success classifier for one grasp type.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassifier {
    pub weights: DVector<f64>,
    pub grasp_type: GraspType,
}

impl TypeClassifier {
    pub fn probability(&self, x: &DVector<f64>) -> f64 {
        sigmoid(self.weights.dot(x))
    }

    /// The weight sub-vector acting on the grasp configuration (the visual
    /// feature and bias weights are constant during inference).
    pub fn theta_weights(&self) -> DVector<f64> {
        self.weights.rows(0, CONFIG_DIM).into_owned()
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierSettings {
    pub l2_strength: f64,
    pub max_sweeps: usize,
    pub gradient_tolerance: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            l2_strength: 1e-4,
            max_sweeps: 10_000,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierDiagnostics {
    pub sweeps: usize,
    pub final_gradient_norm: f64,
    /// False when the sweep cap was hit before the gradient tolerance.
    pub converged: bool,
    /// Final penalized log-likelihood.
    pub objective: f64,
    /// Penalized log-likelihood after each sweep; non-decreasing.
    pub objective_trace: Vec<f64>,
}

/// Fit the success classifier of one grasp type by coordinate descent.
///
/// Maximizes the ridge-penalized log-likelihood (bias excluded from the
/// penalty) with damped one-dimensional Newton updates per coordinate, so
/// the objective never decreases across sweeps. Samples are ordered by id
/// before fitting, making the result independent of dataset order.
pub fn fit_classifier(
    dataset: &GraspDataset,
    grasp_type: &GraspType,
    settings: &ClassifierSettings,
) -> Result<(TypeClassifier, ClassifierDiagnostics), ModelError> {
    let mut rows: Vec<&super::TrainingSample> =
        dataset.samples_of_type(grasp_type.index).collect();
    rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    if rows.is_empty() {
        return Err(ModelError::InsufficientData {
            type_name: grasp_type.name.clone(),
            needed: 2,
            got: 0,
        });
    }
    if rows.iter().all(|s| s.label) || rows.iter().all(|s| !s.label) {
        return Err(ModelError::SingleClassData {
            type_name: grasp_type.name.clone(),
        });
    }

    let xs: Vec<DVector<f64>> = rows
        .iter()
        .map(|s| assemble_input(&s.config, &s.features))
        .collect();
    let ys: Vec<f64> = rows.iter().map(|s| if s.label { 1.0 } else { 0.0 }).collect();
    let (weights, diagnostics) = coordinate_descent(&xs, &ys, settings);
    Ok((
        TypeClassifier {
            weights,
            grasp_type: grasp_type.clone(),
        },
        diagnostics,
    ))
}

/// Penalized log-likelihood given cached margins `z_i = w . x_i`.
fn objective(zs: &[f64], ys: &[f64], weights: &DVector<f64>, l2: f64) -> f64 {
    let ll: f64 = zs
        .iter()
        .zip(ys)
        .map(|(&z, &y)| y * z - softplus(z))
        .sum();
    let dim = weights.len();
    let penalty: f64 = weights.rows(0, dim - 1).iter().map(|w| w * w).sum();
    ll - l2 * penalty
}

fn coordinate_descent(
    xs: &[DVector<f64>],
    ys: &[f64],
    settings: &ClassifierSettings,
) -> (DVector<f64>, ClassifierDiagnostics) {
    let n = xs.len();
    let dim = xs[0].len();
    let l2 = settings.l2_strength;
    let bias_index = dim - 1;

    // Sparse column layout: only the nonzero entries of each coordinate.
    let columns: Vec<Vec<(usize, f64)>> = (0..dim)
        .map(|j| {
            (0..n)
                .filter_map(|i| {
                    let v = xs[i][j];
                    (v != 0.0).then_some((i, v))
                })
                .collect()
        })
        .collect();

    let mut weights = DVector::zeros(dim);
    let mut zs = vec![0.0f64; n];
    // Cached logistic values; exp only runs when a margin actually changes.
    let mut sigmas = vec![0.5f64; n];
    let mut softplusses = vec![std::f64::consts::LN_2; n];
    // Scratch for candidate margins, reused across coordinates.
    let mut scratch: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0); n];

    let mut grad_norm = f64::INFINITY;
    let mut sweeps = 0;
    let mut converged = false;
    let mut obj = objective(&zs, ys, &weights, l2);
    let mut objective_trace: Vec<f64> = Vec::new();
    // A coordinate whose gradient is below its share of the tolerance would
    // gain nothing from an update; skip it this sweep (it re-enters as soon
    // as its gradient grows).
    let skip_threshold = 0.5 * settings.gradient_tolerance / (dim as f64).sqrt();

    while sweeps < settings.max_sweeps {
        for (j, column) in columns.iter().enumerate() {
            let mut grad = 0.0;
            let mut curv = 0.0;
            for &(i, xij) in column {
                let p = sigmas[i];
                grad += (ys[i] - p) * xij;
                curv += p * (1.0 - p) * xij * xij;
            }
            if j != bias_index {
                grad -= 2.0 * l2 * weights[j];
                curv += 2.0 * l2;
            }
            if curv <= 1e-12 || grad.abs() <= skip_threshold {
                continue;
            }
            let mut delta = grad / curv;
            // Damped Newton step: halve until the objective does not drop.
            for _ in 0..40 {
                let mut delta_ll = 0.0;
                for (slot, &(i, xij)) in scratch.iter_mut().zip(column.iter()) {
                    let nz = zs[i] + delta * xij;
                    let (sigma, sp) = logistic_terms(nz);
                    delta_ll += ys[i] * (nz - zs[i]) - sp + softplusses[i];
                    *slot = (nz, sigma, sp);
                }
                let delta_penalty = if j != bias_index {
                    2.0 * weights[j] * delta + delta * delta
                } else {
                    0.0
                };
                let delta_obj = delta_ll - l2 * delta_penalty;
                if delta_obj >= -1e-12 {
                    weights[j] += delta;
                    for (slot, &(i, _)) in scratch.iter().zip(column.iter()) {
                        zs[i] = slot.0;
                        sigmas[i] = slot.1;
                        softplusses[i] = slot.2;
                    }
                    obj += delta_obj;
                    break;
                }
                delta *= 0.5;
            }
        }
        sweeps += 1;
        objective_trace.push(obj);

        // Convergence check from the cached logistic values.
        let mut grad_sq = 0.0;
        for (j, column) in columns.iter().enumerate() {
            let mut g = 0.0;
            for &(i, xij) in column {
                g += (ys[i] - sigmas[i]) * xij;
            }
            if j != bias_index {
                g -= 2.0 * l2 * weights[j];
            }
            grad_sq += g * g;
        }
        grad_norm = grad_sq.sqrt();
        if grad_norm <= settings.gradient_tolerance {
            converged = true;
            break;
        }
    }

    // Incremental accumulation drifts at rounding level over long runs;
    // report a fresh evaluation.
    let obj = objective(&zs, ys, &weights, l2);
    (
        weights,
        ClassifierDiagnostics {
            sweeps,
            final_gradient_norm: grad_norm,
            converged,
            objective: obj,
            objective_trace,
        },
    )
}
