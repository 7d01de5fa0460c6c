use std::sync::Arc;

use nalgebra::DVector;

use super::{
    fit_classifier, fit_prior, ClassifierDiagnostics, ConfigurationBounds, EmDiagnostics,
    GraspDataset, GraspPrior, GraspType, ModelConfig, ModelError, TypeClassifier,
};
use crate::perception::PcaProjection;

/// The fitted grasp model: one classifier and one configuration prior per
/// grasp type, a uniform prior over types, the configuration bounds used at
/// inference time, and (optionally) the PCA projection that produced the
/// training features. Immutable once fitted.
#[derive(Debug, Clone)]
pub struct GraspModel {
    pub classifiers: Vec<TypeClassifier>,
    pub priors: Vec<GraspPrior>,
    pub type_prior: Vec<f64>,
    pub bounds: ConfigurationBounds,
    pub pca: Option<Arc<PcaProjection>>,
}

impl GraspModel {
    pub fn num_types(&self) -> usize {
        self.classifiers.len()
    }

    pub fn types(&self) -> Vec<GraspType> {
        self.classifiers.iter().map(|c| c.grasp_type.clone()).collect()
    }

    pub fn classifier(&self, type_index: usize) -> Result<&TypeClassifier, ModelError> {
        self.classifiers
            .get(type_index)
            .ok_or(ModelError::UnknownType(type_index))
    }

    pub fn prior(&self, type_index: usize) -> Result<&GraspPrior, ModelError> {
        self.priors
            .get(type_index)
            .ok_or(ModelError::UnknownType(type_index))
    }

    pub fn type_by_name(&self, name: &str) -> Option<&GraspType> {
        self.classifiers
            .iter()
            .map(|c| &c.grasp_type)
            .find(|t| t.name == name)
    }

    pub fn with_pca(mut self, pca: Arc<PcaProjection>) -> Self {
        self.pca = Some(pca);
        self
    }
}

/// Success probability of the classifier for `type_index` on an assembled
/// input vector.
pub fn predict_success(
    model: &GraspModel,
    type_index: usize,
    x: &DVector<f64>,
) -> Result<f64, ModelError> {
    Ok(model.classifier(type_index)?.probability(x))
}

/// Per-type fit diagnostics.
#[derive(Debug, Clone)]
pub struct TypeFitReport {
    pub grasp_type: GraspType,
    pub classifier: ClassifierDiagnostics,
    pub prior: EmDiagnostics,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub per_type: Vec<TypeFitReport>,
}

/// Fit the full grasp model: classifier and prior for every type present in
/// the dataset, each fitted independently. A single-type dataset yields the
/// type-free model.
pub fn fit_model(
    dataset: &GraspDataset,
    config: &ModelConfig,
) -> Result<(GraspModel, FitReport), ModelError> {
    let mut classifiers = Vec::new();
    let mut priors = Vec::new();
    let mut per_type = Vec::new();
    for grasp_type in dataset.types() {
        let (classifier, classifier_diag) =
            fit_classifier(dataset, grasp_type, &config.classifier_settings())?;
        let (prior, prior_diag) = fit_prior(dataset, grasp_type, config)?;
        classifiers.push(classifier);
        priors.push(prior);
        per_type.push(TypeFitReport {
            grasp_type: grasp_type.clone(),
            classifier: classifier_diag,
            prior: prior_diag,
        });
    }
    let m = classifiers.len();
    Ok((
        GraspModel {
            classifiers,
            priors,
            type_prior: vec![1.0 / m as f64; m],
            bounds: config.bounds.clone(),
            pca: None,
        },
        FitReport { per_type },
    ))
}

/// One row of a leave-one-out report.
#[derive(Debug, Clone)]
pub struct LooRow {
    pub grasp_type: GraspType,
    pub accuracy: f64,
    pub f1: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct LooReport {
    pub per_type: Vec<LooRow>,
    pub overall_accuracy: f64,
    pub overall_f1: f64,
    pub count: usize,
}

/// Leave-one-out evaluation of the success classifiers.
///
/// For each sample the classifier of that sample's type is refitted on the
/// remaining samples and predicts the held-out label at threshold 0.5; the
/// other types' parameters play no role in the prediction, so only the
/// affected classifier is refitted.
pub fn evaluate_loo(dataset: &GraspDataset, config: &ModelConfig) -> Result<LooReport, ModelError> {
    let settings = config.classifier_settings();
    let n = dataset.len();
    // (type index, actual, predicted)
    let mut outcomes: Vec<(usize, bool, bool)> = Vec::with_capacity(n);
    for held_out in 0..n {
        let sample = &dataset.samples()[held_out];
        let rest = dataset.without_sample(held_out)?;
        let grasp_type = rest
            .types()
            .iter()
            .find(|t| t.name == sample.grasp_type.name)
            .ok_or_else(|| ModelError::SingleClassData {
                type_name: sample.grasp_type.name.clone(),
            })?
            .clone();
        let (classifier, _) = fit_classifier(&rest, &grasp_type, &settings)?;
        let x = super::assemble_input(&sample.config, &sample.features);
        let predicted = classifier.probability(&x) >= 0.5;
        outcomes.push((sample.grasp_type.index, sample.label, predicted));
    }

    let mut per_type = Vec::new();
    for grasp_type in dataset.types() {
        let rows: Vec<&(usize, bool, bool)> = outcomes
            .iter()
            .filter(|(t, _, _)| *t == grasp_type.index)
            .collect();
        let stats = classification_stats(rows.iter().map(|(_, a, p)| (*a, *p)));
        per_type.push(LooRow {
            grasp_type: grasp_type.clone(),
            accuracy: stats.0,
            f1: stats.1,
            count: rows.len(),
        });
    }
    let (overall_accuracy, overall_f1) =
        classification_stats(outcomes.iter().map(|(_, a, p)| (*a, *p)));
    Ok(LooReport {
        per_type,
        overall_accuracy,
        overall_f1,
        count: n,
    })
}

/// (accuracy, F1) with label 1 as the positive class; F1 is 0 when undefined.
fn classification_stats(outcomes: impl Iterator<Item = (bool, bool)>) -> (f64, f64) {
    let (mut tp, mut fp, mut tn, mut fd) = (0usize, 0usize, 0usize, 0usize);
    for (actual, predicted) in outcomes {
        match (actual, predicted) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fd += 1,
        }
    }
    let total = tp + fp + tn + fd;
    if total == 0 {
        return (0.0, 0.0);
    }
    let accuracy = (tp + tn) as f64 / total as f64;
    let f1 = if 2 * tp + fp + fd == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fd) as f64
    };
    (accuracy, f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_input, GraspConfiguration, TrainingSample};
    use crate::perception::VisualFeatures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two types with separable labels driven by different planted weights.
    fn two_type_dataset(n_per_type: usize, seed: u64) -> GraspDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::new();
        for (type_name, flip) in [("power", 1.0), ("precision", -1.0)] {
            let truth = DVector::from_fn(30, |i, _| {
                flip * if i == 29 { 0.1 } else { rng.random_range(-1.0..1.0) }
            });
            let mut count = 0;
            while count < n_per_type {
                let config = GraspConfiguration::from_vector(&DVector::from_fn(14, |_, _| {
                    rng.random_range(-1.0..1.0)
                }));
                let features = VisualFeatures::new(DVector::from_fn(15, |_, _| {
                    rng.random_range(-1.0..1.0)
                }));
                let x = assemble_input(&config, &features);
                let margin = truth.dot(&x);
                if margin.abs() < 1.0 {
                    continue;
                }
                samples.push(TrainingSample {
                    sample_id: format!("{type_name}-{count:04}"),
                    config,
                    grasp_type: GraspType::new(0, type_name),
                    features,
                    label: margin > 0.0,
                });
                count += 1;
            }
        }
        GraspDataset::new(samples).unwrap()
    }

    #[test]
    fn fit_model_produces_one_pair_per_type() {
        let dataset = two_type_dataset(30, 3);
        let config = ModelConfig {
            gmm_components: 2,
            em_restarts: 2,
            ..ModelConfig::default()
        };
        let (model, report) = fit_model(&dataset, &config).unwrap();
        assert_eq!(model.num_types(), 2);
        assert_eq!(model.priors.len(), 2);
        assert_eq!(report.per_type.len(), 2);
        assert!((model.type_prior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multi_type_fit_factorizes_into_per_type_fits() {
        let dataset = two_type_dataset(25, 7);
        let config = ModelConfig {
            gmm_components: 2,
            em_restarts: 3,
            ..ModelConfig::default()
        };
        let (joint, _) = fit_model(&dataset, &config).unwrap();
        for grasp_type in dataset.types() {
            let slice = dataset.restricted_to_type(grasp_type.index).unwrap();
            let (single, _) = fit_model(&slice, &config).unwrap();
            let joint_clf = &joint.classifiers[grasp_type.index];
            let single_clf = &single.classifiers[0];
            assert!((joint_clf.weights.clone() - single_clf.weights.clone()).norm() < 1e-9);
            let joint_prior = &joint.priors[grasp_type.index];
            let single_prior = &single.priors[0];
            for (a, b) in joint_prior.components.iter().zip(&single_prior.components) {
                assert!((a.weight - b.weight).abs() < 1e-9);
                assert!((a.mean.clone() - b.mean.clone()).norm() < 1e-9);
                assert!((a.covariance.clone() - b.covariance.clone()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn shuffled_dataset_fits_identically() {
        let dataset = two_type_dataset(20, 11);
        let config = ModelConfig {
            gmm_components: 2,
            em_restarts: 2,
            ..ModelConfig::default()
        };
        let (a, _) = fit_model(&dataset, &config).unwrap();

        let mut samples = dataset.samples().to_vec();
        samples.rotate_left(13);
        samples.reverse();
        let shuffled = GraspDataset::new(samples).unwrap();
        let (b, _) = fit_model(&shuffled, &config).unwrap();

        for (ca, cb) in a.classifiers.iter().zip(&b.classifiers) {
            assert!((ca.weights.clone() - cb.weights.clone()).norm() < 1e-9);
        }
        for (pa, pb) in a.priors.iter().zip(&b.priors) {
            for (ga, gb) in pa.components.iter().zip(&pb.components) {
                assert!((ga.mean.clone() - gb.mean.clone()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn loo_is_perfect_on_separable_data() {
        let dataset = two_type_dataset(50, 19);
        let report = evaluate_loo(&dataset, &ModelConfig::default()).unwrap();
        assert!(report.overall_accuracy >= 0.95, "{}", report.overall_accuracy);
        for row in &report.per_type {
            assert!(row.accuracy >= 0.9, "{}: {}", row.grasp_type.name, row.accuracy);
            assert_eq!(row.count, 50);
        }
    }

    #[test]
    fn loo_on_random_labels_tracks_majority_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut samples = Vec::new();
        let mut positives = 0usize;
        for i in 0..100 {
            let label = rng.random_bool(0.6);
            positives += label as usize;
            samples.push(TrainingSample {
                sample_id: format!("r{i:03}"),
                config: GraspConfiguration::from_vector(&DVector::from_fn(14, |_, _| {
                    rng.random_range(-1.0..1.0)
                })),
                grasp_type: GraspType::new(0, "power"),
                features: VisualFeatures::new(DVector::from_fn(15, |_, _| {
                    rng.random_range(-1.0..1.0)
                })),
                label,
            });
        }
        let dataset = GraspDataset::new(samples).unwrap();
        let report = evaluate_loo(&dataset, &ModelConfig::default()).unwrap();
        let majority = (positives.max(100 - positives)) as f64 / 100.0;
        assert!(
            (report.overall_accuracy - majority).abs() <= 0.15,
            "accuracy {} vs majority {}",
            report.overall_accuracy,
            majority
        );
    }

    #[test]
    fn stats_handle_degenerate_f1() {
        let (acc, f1) = classification_stats(vec![(false, false), (false, false)].into_iter());
        assert_eq!(acc, 1.0);
        assert_eq!(f1, 0.0);
    }
}
