//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured margin (run with `--nocapture` to see them).

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use grasp_core::inference::{
    gradient, isotropic_component, minimize_for_type, model_from_parts, objective,
    InferenceConfig,
};
use grasp_core::model::{
    assemble_input, evaluate_loo, fit_classifier, fit_gmm, fit_model, fit_prior,
    ClassifierSettings, ConfigurationBounds, GraspConfiguration, GraspDataset, GraspModel,
    GraspPrior, GraspType, ModelConfig, TrainingSample, TypeClassifier, CONFIG_DIM,
};
use grasp_core::perception::{
    estimate_object_frame, fit_pca_vectors, segment_object, voxelize, ObjectFrame, PointCloud,
    VisualFeatures,
};
use grasp_core::synthetic::{
    benchmark_objects, benchmark_oracle, build_dataset, paired_comparison, run_plan_eval,
    DatasetBuildSpec, PlanEvalSpec, QuotaSpec, METHOD_HEURISTIC, METHOD_TYPED, METHOD_TYPE_FREE,
};

fn protocol_scale_dataset(seed: u64) -> grasp_core::synthetic::BuiltDataset {
    let spec = DatasetBuildSpec {
        objects: benchmark_objects(6, seed),
        oracle: benchmark_oracle(8.0),
        quota: QuotaSpec {
            successes_per_type: 20,
            failures_per_type: 40,
            attempt_factor: 100,
        },
        heuristic: Default::default(),
        latent_dim: 15,
        ransac_iters: 200,
        inlier_threshold: 0.005,
        grasps_per_visit: 25,
        seed,
    };
    build_dataset(&spec).expect("benchmark dataset builds")
}

fn random_features(rng: &mut impl Rng) -> VisualFeatures {
    VisualFeatures::new(DVector::from_fn(15, |_, _| rng.random_range(-1.0..1.0)))
}

/// Criterion 1: analytic gradient vs central finite differences (h = 1e-6),
/// relative error <= 1e-5 at >= 50 random in-bounds points per fitted model,
/// in under 5 seconds.
#[test]
fn acceptance_1_gradient_fidelity() {
    let built = protocol_scale_dataset(11);
    let config = ModelConfig::default();
    let (typed, _) = fit_model(&built.dataset, &config).expect("typed fit");
    let (type_free, _) =
        fit_model(&built.dataset.relabeled_single_type("all"), &config).expect("type-free fit");

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-6;
    let mut max_rel: f64 = 0.0;
    let mut checked = 0usize;
    let start = Instant::now();
    for model in [&typed, &type_free] {
        let cfg = InferenceConfig {
            bounds: model.bounds.clone(),
            ..InferenceConfig::default()
        };
        for type_index in 0..model.num_types() {
            let features = random_features(&mut rng);
            for _ in 0..50 {
                let theta = DVector::from_fn(CONFIG_DIM, |i, _| {
                    rng.random_range(cfg.bounds.lower[i]..=cfg.bounds.upper[i])
                });
                let config_point = GraspConfiguration::from_vector(&theta);
                let analytic =
                    gradient(model, type_index, &features, &config_point, &cfg).unwrap();
                let mut fd = DVector::zeros(CONFIG_DIM);
                for i in 0..CONFIG_DIM {
                    let mut plus = theta.clone();
                    plus[i] += h;
                    let mut minus = theta.clone();
                    minus[i] -= h;
                    let fp = objective(
                        model,
                        type_index,
                        &features,
                        &GraspConfiguration::from_vector(&plus),
                        &cfg,
                    )
                    .unwrap();
                    let fm = objective(
                        model,
                        type_index,
                        &features,
                        &GraspConfiguration::from_vector(&minus),
                        &cfg,
                    )
                    .unwrap();
                    fd[i] = (fp - fm) / (2.0 * h);
                }
                let rel = (analytic - fd.clone()).norm() / fd.norm().max(1.0);
                max_rel = max_rel.max(rel);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(checked >= 150, "checked {checked} points");
    assert!(max_rel <= 1e-5, "max relative error {max_rel:.3e}");
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "gradient checks took {elapsed:?}"
    );
    println!(
        "acceptance 1 (gradient fidelity): PASS — {checked} points, max rel err {max_rel:.2e}, {elapsed:.2?}"
    );
}

/// Criterion 2: EM log-likelihood non-decreasing (slack 1e-10) on 100 random
/// datasets for K in {1,2,4}; K=1 matches the closed-form mean/covariance
/// within 1e-9.
#[test]
fn acceptance_2_em_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_drop: f64 = 0.0;
    let mut worst_k1: f64 = 0.0;
    let mut floor_hits = 0usize;
    for dataset_index in 0..100 {
        // 1-3 unit-spread blobs of 20 points in 14-D: small enough that
        // mixture components routinely collapse onto the covariance floor,
        // exercising the safeguarded M-step as well as the regular path.
        let blobs = 1 + dataset_index % 3;
        let mut points: Vec<DVector<f64>> = Vec::new();
        for b in 0..blobs {
            let center = DVector::from_fn(CONFIG_DIM, |_, _| rng.random_range(-3.0..3.0))
                * (1.0 + b as f64);
            for _ in 0..20 {
                points.push(DVector::from_fn(CONFIG_DIM, |i, _| {
                    center[i]
                        + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                }));
            }
        }
        for k in [1usize, 2, 4] {
            let (components, diag) = fit_gmm(&points, k, 1, 300, 1e-9, 1e-6, &mut rng);
            floor_hits += diag.covariance_floor_hit as usize;
            for w in diag.ll_trace.windows(2) {
                worst_drop = worst_drop.max(w[0] - w[1]);
                assert!(
                    w[1] >= w[0] - 1e-10,
                    "dataset {dataset_index} K={k}: LL decreased {} -> {}",
                    w[0],
                    w[1]
                );
            }
            if k == 1 {
                // Unit-spread blobs keep the K=1 covariance far from the
                // floor, so the closed form applies unclamped.
                assert!(!diag.covariance_floor_hit);
                let n = points.len() as f64;
                let mut mean = DVector::zeros(CONFIG_DIM);
                for p in &points {
                    mean += p;
                }
                mean /= n;
                let mut cov = DMatrix::zeros(CONFIG_DIM, CONFIG_DIM);
                for p in &points {
                    let d = p - &mean;
                    cov += &d * d.transpose();
                }
                cov /= n;
                let mean_err = (components[0].mean.clone() - mean).norm();
                let cov_err = (components[0].covariance.clone() - cov).norm();
                worst_k1 = worst_k1.max(mean_err).max(cov_err);
                assert!(mean_err < 1e-9 && cov_err < 1e-9);
            }
        }
    }
    println!(
        "acceptance 2 (EM monotonicity): PASS — 100 datasets x K in {{1,2,4}}, worst drop {worst_drop:.2e}, worst K=1 deviation {worst_k1:.2e}, {floor_hits} floor-clamped fits"
    );
}

fn planted_dataset(n: usize, seed: u64) -> GraspDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = DVector::from_fn(30, |i, _| {
        if i == 29 {
            0.2
        } else {
            rng.random_range(-1.0..1.0)
        }
    });
    let mut samples = Vec::new();
    while samples.len() < n {
        let config = GraspConfiguration::from_vector(&DVector::from_fn(CONFIG_DIM, |_, _| {
            rng.random_range(-1.0..1.0)
        }));
        let features = random_features(&mut rng);
        let x = assemble_input(&config, &features);
        let margin = truth.dot(&x);
        if margin.abs() < 1.0 {
            continue;
        }
        samples.push(TrainingSample {
            sample_id: format!("p{:04}", samples.len()),
            config,
            grasp_type: GraspType::new(0, "power"),
            features,
            label: margin > 0.0,
        });
    }
    GraspDataset::new(samples).unwrap()
}

/// Criterion 3: on planted-weight separable data (200 samples, margin >= 1),
/// training accuracy >= 0.99 and LOO accuracy >= 0.95.
#[test]
fn acceptance_3_classifier_fidelity() {
    let dataset = planted_dataset(200, 31);
    let grasp_type = dataset.types()[0].clone();
    let (classifier, _) =
        fit_classifier(&dataset, &grasp_type, &ClassifierSettings::default()).unwrap();
    let correct = dataset
        .samples()
        .iter()
        .filter(|s| {
            (classifier.probability(&assemble_input(&s.config, &s.features)) >= 0.5) == s.label
        })
        .count();
    let train_accuracy = correct as f64 / dataset.len() as f64;
    assert!(train_accuracy >= 0.99, "training accuracy {train_accuracy}");

    let loo = evaluate_loo(&dataset, &ModelConfig::default()).unwrap();
    assert!(
        loo.overall_accuracy >= 0.95,
        "LOO accuracy {}",
        loo.overall_accuracy
    );
    println!(
        "acceptance 3 (classifier fidelity): PASS — train {train_accuracy:.3}, LOO {:.3}",
        loo.overall_accuracy
    );
}

fn convex_test_model(seed: u64, bounds: ConfigurationBounds) -> GraspModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grasp_type = GraspType::new(0, "power");
    let weights = DVector::from_fn(30, |_, _| rng.random_range(-1.5..1.5));
    let mean = DVector::from_fn(CONFIG_DIM, |_, _| rng.random_range(-0.05..0.05));
    model_from_parts(
        vec![TypeClassifier {
            weights,
            grasp_type: grasp_type.clone(),
        }],
        vec![GraspPrior {
            components: vec![isotropic_component(mean, 0.02)],
            grasp_type,
        }],
        bounds,
    )
}

/// Criterion 4: bound-constrained minimizer vs brute-force grid search on
/// 2-D restrictions (within 2e-3); pure-prior convergence to the mean within
/// 1e-4 from 10 random inits; exact bound feasibility; monotone traces
/// (slack 1e-8).
#[test]
fn acceptance_4_optimizer_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_grid_gap: f64 = 0.0;

    // 2-D restriction: all but the first two coordinates pinned by equal
    // bounds; dense 1e-3 grid over the free square.
    for trial in 0..3 {
        let mut lower = DVector::zeros(CONFIG_DIM);
        let mut upper = DVector::zeros(CONFIG_DIM);
        for i in 2..CONFIG_DIM {
            let pin = rng.random_range(-0.05..0.05);
            lower[i] = pin;
            upper[i] = pin;
        }
        lower[0] = -0.2;
        upper[0] = 0.2;
        lower[1] = -0.2;
        upper[1] = 0.2;
        let bounds = ConfigurationBounds::new(lower.clone(), upper.clone());
        let model = convex_test_model(100 + trial, bounds.clone());
        let cfg = InferenceConfig {
            bounds: bounds.clone(),
            ..InferenceConfig::default()
        };
        let features = random_features(&mut rng);

        let step = 1e-3f64;
        let cells = (0.4 / step).round() as usize;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let mut probe = GraspConfiguration::from_vector(&lower);
        for ix in 0..=cells {
            let x = -0.2 + ix as f64 * step;
            probe.palm_position.x = x;
            for iy in 0..=cells {
                let y = -0.2 + iy as f64 * step;
                probe.palm_position.y = y;
                let value = objective(&model, 0, &features, &probe, &cfg).unwrap();
                if value < best.0 {
                    best = (value, x, y);
                }
            }
        }

        let init = GraspConfiguration::from_vector(&DVector::from_fn(CONFIG_DIM, |i, _| {
            rng.random_range(lower[i]..=upper[i].max(lower[i] + f64::EPSILON))
        }));
        let result = minimize_for_type(&model, 0, &features, &init, &cfg).unwrap();
        let gap = ((result.config.palm_position.x - best.1).powi(2)
            + (result.config.palm_position.y - best.2).powi(2))
        .sqrt();
        worst_grid_gap = worst_grid_gap.max(gap);
        assert!(
            gap <= 2e-3,
            "trial {trial}: optimizer at ({}, {}), grid at ({}, {}), gap {gap}",
            result.config.palm_position.x,
            result.config.palm_position.y,
            best.1,
            best.2
        );
        let theta = result.config.to_vector();
        for i in 0..CONFIG_DIM {
            assert!(theta[i] >= bounds.lower[i] && theta[i] <= bounds.upper[i]);
        }
        for w in result.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
    }

    // Pure prior: w = 0, K = 1 converges to the mean from 10 random inits.
    let wide = ConfigurationBounds::new(
        DVector::from_element(CONFIG_DIM, -5.0),
        DVector::from_element(CONFIG_DIM, 5.0),
    );
    let grasp_type = GraspType::new(0, "power");
    let mean = DVector::from_fn(CONFIG_DIM, |_, _| rng.random_range(-1.0..1.0));
    let pure_prior = model_from_parts(
        vec![TypeClassifier {
            weights: DVector::zeros(30),
            grasp_type: grasp_type.clone(),
        }],
        vec![GraspPrior {
            components: vec![isotropic_component(mean.clone(), 1.0)],
            grasp_type,
        }],
        wide.clone(),
    );
    let cfg = InferenceConfig {
        bounds: wide,
        ..InferenceConfig::default()
    };
    let features = random_features(&mut rng);
    let mut worst_mean_gap: f64 = 0.0;
    for _ in 0..10 {
        let init = GraspConfiguration::from_vector(&DVector::from_fn(CONFIG_DIM, |_, _| {
            rng.random_range(-4.0..4.0)
        }));
        let result = minimize_for_type(&pure_prior, 0, &features, &init, &cfg).unwrap();
        let gap = (result.config.to_vector() - mean.clone()).norm();
        worst_mean_gap = worst_mean_gap.max(gap);
        assert!(gap < 1e-4, "converged {gap} away from the prior mean");
        for w in result.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
    }
    println!(
        "acceptance 4 (optimizer correctness): PASS — grid gap {worst_grid_gap:.2e} (<= 2e-3), pure-prior gap {worst_mean_gap:.2e} (<= 1e-4)"
    );
}

/// Criterion 5: the M-type fit equals independent per-type fits within 1e-9,
/// and the M=1 (type-free) model reproduces the single-type pipeline
/// identically.
#[test]
fn acceptance_5_factorization_equivalence() {
    let built = protocol_scale_dataset(21);
    let config = ModelConfig::default();
    let (joint, _) = fit_model(&built.dataset, &config).unwrap();

    let mut worst: f64 = 0.0;
    for grasp_type in built.dataset.types() {
        let slice = built.dataset.restricted_to_type(grasp_type.index).unwrap();
        let (single, _) = fit_model(&slice, &config).unwrap();
        let clf_gap = (joint.classifiers[grasp_type.index].weights.clone()
            - single.classifiers[0].weights.clone())
        .norm();
        worst = worst.max(clf_gap);
        assert!(clf_gap < 1e-9, "{}: classifier gap {clf_gap}", grasp_type.name);
        for (a, b) in joint.priors[grasp_type.index]
            .components
            .iter()
            .zip(&single.priors[0].components)
        {
            let gap = (a.mean.clone() - b.mean.clone())
                .norm()
                .max((a.covariance.clone() - b.covariance.clone()).norm())
                .max((a.weight - b.weight).abs());
            worst = worst.max(gap);
            assert!(gap < 1e-9, "{}: prior gap {gap}", grasp_type.name);
        }
    }

    // The M=1 model is exactly the direct single-type pipeline.
    let merged = built.dataset.relabeled_single_type("all");
    let (type_free, _) = fit_model(&merged, &config).unwrap();
    assert_eq!(type_free.num_types(), 1);
    let t = merged.types()[0].clone();
    let (direct_clf, _) =
        fit_classifier(&merged, &t, &config.classifier_settings()).unwrap();
    let (direct_prior, _) = fit_prior(&merged, &t, &config).unwrap();
    let clf_gap = (type_free.classifiers[0].weights.clone() - direct_clf.weights).norm();
    assert!(clf_gap < 1e-9);
    for (a, b) in type_free.priors[0]
        .components
        .iter()
        .zip(&direct_prior.components)
    {
        assert!((a.mean.clone() - b.mean.clone()).norm() < 1e-9);
        assert!((a.covariance.clone() - b.covariance.clone()).norm() < 1e-9);
    }

    // Same init, same data => identical inner minimization through either
    // model structure.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let features = random_features(&mut rng);
    let cfg = InferenceConfig::default();
    let init = GraspConfiguration::zeros();
    for grasp_type in built.dataset.types() {
        let slice = built.dataset.restricted_to_type(grasp_type.index).unwrap();
        let (single, _) = fit_model(&slice, &config).unwrap();
        let via_joint =
            minimize_for_type(&joint, grasp_type.index, &features, &init, &cfg).unwrap();
        let via_single = minimize_for_type(&single, 0, &features, &init, &cfg).unwrap();
        let gap = (via_joint.config.to_vector() - via_single.config.to_vector()).norm();
        worst = worst.max(gap);
        assert!(gap < 1e-9, "inner minimization differs by {gap}");
    }
    println!("acceptance 5 (factorization equivalence): PASS — worst gap {worst:.2e}");
}

/// Criterion 6: the full protocol at synthetic scale — 120-sample dataset
/// (20/40 per type), K=4 priors, prior weight 0.5, heuristic init at 6 cm
/// with 2 cm noise — train, plan, and evaluate in under 60 seconds, emitting
/// the per-method/per-type success table.
#[test]
fn acceptance_6_protocol_scale() {
    let start = Instant::now();
    let built = protocol_scale_dataset(41);
    let counts = built.dataset.counts();
    for grasp_type in built.dataset.types() {
        assert_eq!(counts[&(grasp_type.index, true)], 20);
        assert_eq!(counts[&(grasp_type.index, false)], 40);
    }
    assert_eq!(built.dataset.len(), 120);

    let config = ModelConfig::default();
    assert_eq!(config.gmm_components, 4);
    let (typed, _) = fit_model(&built.dataset, &config).unwrap();
    let (type_free, _) =
        fit_model(&built.dataset.relabeled_single_type("all"), &config).unwrap();
    for prior in &typed.priors {
        assert_eq!(prior.num_components(), 4);
    }

    let loo = evaluate_loo(&built.dataset, &config).unwrap();
    assert_eq!(loo.per_type.len(), 2);
    for row in &loo.per_type {
        assert!(row.accuracy.is_finite() && row.f1.is_finite());
    }

    let heuristic = grasp_core::heuristic::HeuristicParams::default();
    assert_eq!(heuristic.offset, 0.06);
    assert_eq!(heuristic.noise_sigma, 0.02);
    let inference = InferenceConfig::default();
    assert_eq!(inference.prior_weight, 0.5);
    let eval_spec = PlanEvalSpec {
        objects: benchmark_objects(4, 4041),
        poses_per_object: 5,
        oracle: benchmark_oracle(8.0),
        heuristic,
        inference,
        heuristic_candidates: 20,
        ransac_iters: 200,
        inlier_threshold: 0.005,
        seed: 46,
    };
    let report = run_plan_eval(&typed, &type_free, &built.pca, &eval_spec).unwrap();

    // The comparison table: all six (method, type) cells filled.
    for method in [METHOD_TYPED, METHOD_TYPE_FREE, METHOD_HEURISTIC] {
        for grasp_type in ["power", "precision"] {
            let cell = report.rate_for(method, grasp_type).expect("cell exists");
            assert_eq!(cell.trials, 20, "{method}/{grasp_type}");
        }
    }
    assert_eq!(report.rows.len(), 4 * 5 * 3 * 2);

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "protocol took {elapsed:?} (budget 60 s)"
    );
    println!(
        "acceptance 6 (training protocol at synthetic scale): PASS — 120 samples, LOO acc {:.3}, {} trial rows, {elapsed:.1?}",
        loo.overall_accuracy,
        report.rows.len()
    );
}

/// Criterion 7: with disjoint per-type oracle targets, typed planning's
/// oracle success rate is >= the type-free model's over >= 100 paired trials
/// at 95% confidence, and >= the raw heuristic's in the same test.
#[test]
fn acceptance_7_central_claim_analogue() {
    let built = protocol_scale_dataset(61);
    let config = ModelConfig::default();
    let (typed, _) = fit_model(&built.dataset, &config).unwrap();
    let (type_free, _) =
        fit_model(&built.dataset.relabeled_single_type("all"), &config).unwrap();

    let eval_spec = PlanEvalSpec {
        objects: benchmark_objects(10, 6107),
        poses_per_object: 5,
        oracle: benchmark_oracle(8.0),
        heuristic: Default::default(),
        inference: Default::default(),
        heuristic_candidates: 20,
        ransac_iters: 200,
        inlier_threshold: 0.005,
        seed: 62,
    };
    let report = run_plan_eval(&typed, &type_free, &built.pca, &eval_spec).unwrap();

    for baseline in [METHOD_TYPE_FREE, METHOD_HEURISTIC] {
        let cmp = paired_comparison(&report.rows, METHOD_TYPED, baseline);
        assert!(cmp.pairs >= 100, "only {} paired trials", cmp.pairs);
        assert!(
            cmp.lower_confidence_bound >= 0.0,
            "typed vs {baseline}: mean diff {:.3}, 95% lower bound {:.3}",
            cmp.mean_difference,
            cmp.lower_confidence_bound
        );
    }
    let typed_power = report.rate_for(METHOD_TYPED, "power").unwrap().rate;
    let tf_power = report.rate_for(METHOD_TYPE_FREE, "power").unwrap().rate;
    println!(
        "acceptance 7 (central-claim analogue): PASS — e.g. power: typed {typed_power:.2} vs type-free {tf_power:.2} over {} paired trials",
        paired_comparison(&report.rows, METHOD_TYPED, METHOD_TYPE_FREE).pairs
    );
}

/// Criterion 8: perception invariants — frame orthonormality and
/// right-handedness within 1e-9, voxel translation equivariance, PCA row
/// orthonormality within 1e-6, and exact RANSAC recovery on the constructed
/// 1000+200-point scene.
#[test]
fn acceptance_8_perception_invariants() {
    use nalgebra::{Point3, Vector3};

    // Frames from random clouds are proper rotations.
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst_frame: f64 = 0.0;
    for _ in 0..100 {
        let points: Vec<Point3<f64>> = (0..50)
            .map(|_| {
                Point3::new(
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.05..0.05),
                )
            })
            .collect();
        let frame = estimate_object_frame(&PointCloud::new(points)).unwrap();
        worst_frame = worst_frame
            .max(frame.orthonormality_error())
            .max((frame.axes.determinant() - 1.0).abs());
        assert!(frame.orthonormality_error() < 1e-9);
        assert!((frame.axes.determinant() - 1.0).abs() < 1e-9);
    }

    // Voxelization is translation-equivariant.
    for trial in 0..20 {
        let points: Vec<Point3<f64>> = (0..40)
            .map(|_| {
                Point3::new(
                    rng.random_range(-0.09..0.09),
                    rng.random_range(-0.09..0.09),
                    rng.random_range(-0.09..0.09),
                )
            })
            .collect();
        let cloud = PointCloud::new(points);
        let t = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let base = voxelize(&cloud, &ObjectFrame::identity_at(Point3::origin()));
        let moved = voxelize(
            &cloud.translated(&t),
            &ObjectFrame::identity_at(Point3::origin() + t),
        );
        assert_eq!(
            base.as_feature_vector(),
            moved.as_feature_vector(),
            "trial {trial}"
        );
    }

    // PCA basis rows orthonormal within 1e-6.
    let vectors: Vec<DVector<f64>> = (0..40)
        .map(|_| DVector::from_fn(100, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    let pca = fit_pca_vectors(&vectors, 15).unwrap();
    let ortho = pca.row_orthonormality_error();
    assert!(ortho < 1e-6, "row orthonormality error {ortho:.3e}");

    // RANSAC exact recovery on the constructed scene.
    let mut points = Vec::new();
    for ix in 0..25 {
        for iy in 0..40 {
            points.push(Point3::new(ix as f64 * 0.02, iy as f64 * 0.02, 0.0));
        }
    }
    let mut box_points = Vec::new();
    for i in 0..200 {
        let t = i as f64 / 199.0;
        let p = Point3::new(
            0.1 + 0.1 * t,
            0.2 + 0.08 * (1.0 - t),
            0.02 + 0.08 * ((i % 13) as f64 / 12.0),
        );
        box_points.push(p);
        points.push(p);
    }
    let cloud = PointCloud::new(points);
    let mut seg_rng = ChaCha8Rng::seed_from_u64(7);
    let (object, plane) = segment_object(&cloud, 200, 0.005, &mut seg_rng).unwrap();
    assert_eq!(object.len(), 200);
    for (got, expected) in object.points.iter().zip(&box_points) {
        assert_eq!(got, expected);
    }
    assert!(plane.normal.z > 0.999999);

    println!(
        "acceptance 8 (perception invariants): PASS — worst frame error {worst_frame:.2e}, PCA orthonormality {ortho:.2e}, RANSAC recovered 200/200"
    );
}
