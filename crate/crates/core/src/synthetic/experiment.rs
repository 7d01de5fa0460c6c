use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{default_inlier_threshold, default_ransac_iters, perceive_scene};
use super::{OracleSpec, Shape, ShapePart, SyntheticObjectSpec, SyntheticError, TypeTarget};
use crate::heuristic::{
    approach_orientation, generate_heuristic_grasps, select_init, HeuristicParams,
};
use crate::inference::{plan_grasp_for_types, InferenceConfig};
use crate::model::{GraspModel, CONFIG_DIM};
use crate::perception::{extract_features, PcaProjection};
use crate::synthetic::Primitive;

pub const METHOD_TYPED: &str = "typed";
pub const METHOD_TYPE_FREE: &str = "type-free";
pub const METHOD_HEURISTIC: &str = "heuristic";

/// One grasp attempt of the plan-eval protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRow {
    pub object: String,
    pub pose: usize,
    pub method: String,
    pub grasp_type: String,
    pub success: bool,
    pub oracle_distance: f64,
    /// Inner-optimization objective (absent for the heuristic method).
    pub objective: Option<f64>,
    /// Model success probability at the executed grasp (absent for the
    /// heuristic method).
    pub probability: Option<f64>,
}

/// Aggregated success rate of one (method, type) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodTypeRate {
    pub method: String,
    pub grasp_type: String,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEvalReport {
    pub rows: Vec<TrialRow>,
    pub rates: Vec<MethodTypeRate>,
}

impl PlanEvalReport {
    pub fn rate_for(&self, method: &str, grasp_type: &str) -> Option<&MethodTypeRate> {
        self.rates
            .iter()
            .find(|r| r.method == method && r.grasp_type == grasp_type)
    }
}

/// The plan-eval protocol: each object at several table poses, planned per
/// grasp type by each method and scored by the oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEvalSpec {
    pub objects: Vec<SyntheticObjectSpec>,
    #[serde(default = "default_poses_per_object")]
    pub poses_per_object: usize,
    pub oracle: OracleSpec,
    #[serde(default)]
    pub heuristic: HeuristicParams,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default = "default_heuristic_candidates")]
    pub heuristic_candidates: usize,
    #[serde(default = "default_ransac_iters")]
    pub ransac_iters: usize,
    #[serde(default = "default_inlier_threshold")]
    pub inlier_threshold: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_poses_per_object() -> usize {
    5
}

fn default_heuristic_candidates() -> usize {
    20
}

/// Run the plan-eval comparison: typed planning vs. the type-free model vs.
/// the raw heuristic initialization, each executed as every desired grasp
/// type and labeled by the oracle.
pub fn run_plan_eval(
    typed_model: &GraspModel,
    type_free_model: &GraspModel,
    pca: &PcaProjection,
    spec: &PlanEvalSpec,
) -> Result<PlanEvalReport, SyntheticError> {
    spec.oracle
        .validate()
        .map_err(SyntheticError::InvalidSpec)?;
    if type_free_model.num_types() != 1 {
        return Err(SyntheticError::InvalidSpec(
            "type-free model must have exactly one type".into(),
        ));
    }
    for target in &spec.oracle.targets {
        if typed_model.type_by_name(&target.type_name).is_none() {
            return Err(SyntheticError::InvalidSpec(format!(
                "typed model lacks grasp type {:?}",
                target.type_name
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::new();

    for object in &spec.objects {
        for pose in 0..spec.poses_per_object {
            let scene_spec = object.with_pose(
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                pose as f64 * std::f64::consts::TAU / spec.poses_per_object.max(1) as f64,
                rng.random_range(0..u64::MAX),
            );
            let scene = perceive_scene(
                &scene_spec,
                spec.ransac_iters,
                spec.inlier_threshold,
                &mut rng,
            )?;
            let features =
                extract_features(&scene.grid, pca).with_source_id(scene_spec.name.clone());
            let grasps = generate_heuristic_grasps(
                &scene.bbox,
                &scene.camera,
                &spec.heuristic,
                spec.heuristic_candidates,
                &mut rng,
            );
            let init = select_init(&grasps)?.config.clone();

            // The type-free plan does not depend on the desired type; run it
            // once per scene.
            let type_free_plan =
                plan_grasp_for_types(type_free_model, &[0], &features, std::slice::from_ref(&init), &spec.inference)?;

            for target in &spec.oracle.targets {
                let type_name = &target.type_name;
                let type_index = typed_model
                    .type_by_name(type_name)
                    .expect("validated above")
                    .index;

                let typed_plan = plan_grasp_for_types(
                    typed_model,
                    &[type_index],
                    &features,
                    std::slice::from_ref(&init),
                    &spec.inference,
                )?;
                for (method, config, objective, probability) in [
                    (
                        METHOD_TYPED,
                        &typed_plan.config,
                        Some(typed_plan.objective_value),
                        Some(typed_plan.success_probability),
                    ),
                    (
                        METHOD_TYPE_FREE,
                        &type_free_plan.config,
                        Some(type_free_plan.objective_value),
                        Some(type_free_plan.success_probability),
                    ),
                    (METHOD_HEURISTIC, &init, None, None),
                ] {
                    let success = spec
                        .oracle
                        .label(config, type_name, &mut rng)
                        .expect("target exists");
                    let oracle_distance = spec
                        .oracle
                        .weighted_distance(config, type_name)
                        .expect("target exists");
                    rows.push(TrialRow {
                        object: object.name.clone(),
                        pose,
                        method: method.to_string(),
                        grasp_type: type_name.clone(),
                        success,
                        oracle_distance,
                        objective,
                        probability,
                    });
                }
            }
        }
    }

    let mut rates = Vec::new();
    for method in [METHOD_TYPED, METHOD_TYPE_FREE, METHOD_HEURISTIC] {
        for target in &spec.oracle.targets {
            let cell: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.method == method && r.grasp_type == target.type_name)
                .collect();
            let successes = cell.iter().filter(|r| r.success).count();
            rates.push(MethodTypeRate {
                method: method.to_string(),
                grasp_type: target.type_name.clone(),
                successes,
                trials: cell.len(),
                rate: if cell.is_empty() {
                    0.0
                } else {
                    successes as f64 / cell.len() as f64
                },
            });
        }
    }

    Ok(PlanEvalReport { rows, rates })
}

/// Paired success comparison between two methods over matching
/// (object, pose, type) trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedComparison {
    pub method_a: String,
    pub method_b: String,
    pub pairs: usize,
    pub wins_a: usize,
    pub wins_b: usize,
    pub mean_difference: f64,
    /// One-sided 95% lower confidence bound on the mean success difference
    /// (normal approximation).
    pub lower_confidence_bound: f64,
}

pub fn paired_comparison(rows: &[TrialRow], method_a: &str, method_b: &str) -> PairedComparison {
    let mut diffs = Vec::new();
    let mut wins_a = 0usize;
    let mut wins_b = 0usize;
    for a in rows.iter().filter(|r| r.method == method_a) {
        if let Some(b) = rows.iter().find(|r| {
            r.method == method_b
                && r.object == a.object
                && r.pose == a.pose
                && r.grasp_type == a.grasp_type
        }) {
            let d = a.success as i32 - b.success as i32;
            if d > 0 {
                wins_a += 1;
            } else if d < 0 {
                wins_b += 1;
            }
            diffs.push(d as f64);
        }
    }
    let n = diffs.len();
    let mean = if n == 0 {
        0.0
    } else {
        diffs.iter().sum::<f64>() / n as f64
    };
    let sd = if n < 2 {
        0.0
    } else {
        (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    };
    let lower = if n == 0 {
        0.0
    } else {
        mean - 1.645 * sd / (n as f64).sqrt()
    };
    PairedComparison {
        method_a: method_a.to_string(),
        method_b: method_b.to_string(),
        pairs: n,
        wins_a,
        wins_b,
        mean_difference: mean,
        lower_confidence_bound: lower,
    }
}

/// A small family of benchmark objects spanning boxes, cylinders, and a
/// composite, with per-object seeds derived from `seed`.
pub fn benchmark_objects(count: usize, seed: u64) -> Vec<SyntheticObjectSpec> {
    let catalog: Vec<(&str, Shape)> = vec![
        (
            "tall-box",
            Shape::Box {
                extents: [0.07, 0.10, 0.14],
            },
        ),
        (
            "can",
            Shape::Cylinder {
                radius: 0.035,
                height: 0.12,
            },
        ),
        (
            "squat-box",
            Shape::Box {
                extents: [0.12, 0.08, 0.05],
            },
        ),
        (
            "mug",
            Shape::Cylinder {
                radius: 0.05,
                height: 0.09,
            },
        ),
        (
            "bottle",
            Shape::Composite {
                parts: vec![
                    ShapePart {
                        primitive: Primitive::Cylinder {
                            radius: 0.04,
                            height: 0.10,
                        },
                        offset: [0.0, 0.0, 0.0],
                    },
                    ShapePart {
                        primitive: Primitive::Cylinder {
                            radius: 0.015,
                            height: 0.05,
                        },
                        offset: [0.0, 0.0, 0.075],
                    },
                ],
            },
        ),
        (
            "brick",
            Shape::Box {
                extents: [0.10, 0.05, 0.06],
            },
        ),
    ];
    (0..count)
        .map(|i| {
            let (name, shape) = &catalog[i % catalog.len()];
            SyntheticObjectSpec {
                name: format!("{name}-{i}"),
                shape: shape.clone(),
                position: [0.0, 0.0],
                yaw: 0.35 * i as f64,
                point_density: 2e4,
                noise_sigma: 0.001,
                seed: seed.wrapping_add(i as u64 * 7919),
                table_halfwidth: 0.25,
                camera: [0.8, 0.2, 0.6],
            }
        })
        .collect()
}

/// The benchmark oracle: disjoint per-type target regions in the object
/// frame. Power grasps succeed near the first-principal-axis face, precision
/// grasps near the third-axis face; orientation and joints use loose radii,
/// so palm position is the discriminating coordinate.
pub fn benchmark_oracle(temperature: f64) -> OracleSpec {
    let open_joints = HeuristicParams::default().nominal_preshape;

    let mut power_mean = vec![0.0; CONFIG_DIM];
    power_mean[0] = 0.115; // +first-axis face center + offset
    let power_orientation = approach_orientation(&-Vector3::x());
    power_mean[3] = power_orientation.x;
    power_mean[4] = power_orientation.y;
    power_mean[5] = power_orientation.z;
    power_mean[6..14].copy_from_slice(&open_joints);

    let mut precision_mean = vec![0.0; CONFIG_DIM];
    precision_mean[2] = 0.095; // +third-axis face center + offset
    let precision_orientation = approach_orientation(&-Vector3::z());
    precision_mean[3] = precision_orientation.x;
    precision_mean[4] = precision_orientation.y;
    precision_mean[5] = precision_orientation.z;
    precision_mean[6..14].copy_from_slice(&open_joints);

    let mut radii = vec![0.05; 3]; // position, meters
    radii.extend(vec![6.0; 3]); // orientation: loose
    radii.extend(vec![4.0; 8]); // joints: loose
    OracleSpec {
        targets: vec![
            TypeTarget {
                type_name: "power".into(),
                mean: power_mean,
                radii: radii.clone(),
            },
            TypeTarget {
                type_name: "precision".into(),
                mean: precision_mean,
                radii,
            },
        ],
        temperature,
    }
}
