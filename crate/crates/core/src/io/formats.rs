use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::IoError;
use crate::heuristic::HeuristicGrasp;
use crate::inference::InferenceResult;
use crate::model::{
    ConfigurationBounds, GaussianComponent, GraspConfiguration, GraspDataset, GraspModel,
    GraspPrior, GraspType, LooReport, TrainingSample, TypeClassifier, CONFIG_DIM,
};
use crate::perception::{PcaProjection, VisualFeatures};
use crate::synthetic::{PlanEvalReport, TrialRow};

pub const PCA_FORMAT_VERSION: u32 = 1;
pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Feature dimension expected by the dataset schema.
pub const DATASET_FEATURE_DIM: usize = 15;

/// Serialize any document as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

// ---------------------------------------------------------------------------
// PCA projection: {version, latent_dim, mean[8000], basis[15][8000]}

#[derive(Serialize, Deserialize)]
struct PcaFile {
    version: u32,
    latent_dim: usize,
    mean: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

pub fn write_pca_json(path: &Path, pca: &PcaProjection) -> Result<(), IoError> {
    let file = PcaFile {
        version: PCA_FORMAT_VERSION,
        latent_dim: pca.latent_dim(),
        mean: pca.mean().iter().copied().collect(),
        basis: (0..pca.latent_dim())
            .map(|i| pca.basis().row(i).iter().copied().collect())
            .collect(),
    };
    write_json(path, &file)
}

pub fn read_pca_json(path: &Path) -> Result<PcaProjection, IoError> {
    let file: PcaFile = read_json(path)?;
    if file.version != PCA_FORMAT_VERSION {
        return Err(IoError::Version {
            expected: PCA_FORMAT_VERSION,
            found: file.version,
        });
    }
    if file.basis.len() != file.latent_dim {
        return Err(IoError::Invalid(format!(
            "basis has {} rows, latent_dim is {}",
            file.basis.len(),
            file.latent_dim
        )));
    }
    let d = file.mean.len();
    for (i, row) in file.basis.iter().enumerate() {
        if row.len() != d {
            return Err(IoError::Invalid(format!(
                "basis row {i} has length {}, mean has {d}",
                row.len()
            )));
        }
    }
    let mean = DVector::from_vec(file.mean);
    let basis = DMatrix::from_fn(file.latent_dim, d, |i, j| file.basis[i][j]);
    Ok(PcaProjection::from_parts(mean, basis))
}

// ---------------------------------------------------------------------------
// Dataset: JSON lines, one sample per line.

/// One JSON-lines dataset record:
/// `{sample_id, type, theta[14], features[15], label}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub sample_id: String,
    pub r#type: String,
    pub theta: Vec<f64>,
    pub features: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

pub fn dataset_to_records(dataset: &GraspDataset) -> Vec<DatasetRecord> {
    dataset
        .samples()
        .iter()
        .map(|s| DatasetRecord {
            sample_id: s.sample_id.clone(),
            r#type: s.grasp_type.name.clone(),
            theta: s.config.to_vector().iter().copied().collect(),
            features: s.features.values.iter().copied().collect(),
            label: Some(s.label as u8),
        })
        .collect()
}

pub fn dataset_from_records(records: Vec<DatasetRecord>) -> Result<GraspDataset, IoError> {
    let mut samples = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        if r.theta.len() != CONFIG_DIM {
            return Err(IoError::Invalid(format!(
                "record {i} ({}): theta must be {CONFIG_DIM}-D, got {}",
                r.sample_id,
                r.theta.len()
            )));
        }
        let label = match r.label {
            Some(0) => false,
            Some(1) => true,
            Some(other) => {
                return Err(IoError::Invalid(format!(
                    "record {i} ({}): label must be 0 or 1, got {other}",
                    r.sample_id
                )))
            }
            None => {
                return Err(IoError::Invalid(format!(
                    "record {i} ({}): label missing",
                    r.sample_id
                )))
            }
        };
        samples.push(TrainingSample {
            sample_id: r.sample_id.clone(),
            config: GraspConfiguration::from_slice(&r.theta),
            grasp_type: GraspType::new(0, r.r#type),
            features: VisualFeatures::new(DVector::from_vec(r.features))
                .with_source_id(r.sample_id),
            label,
        });
    }
    GraspDataset::new(samples).map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn write_dataset_jsonl(path: &Path, dataset: &GraspDataset) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in dataset_to_records(dataset) {
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a JSON-lines dataset; parse failures report the offending line.
pub fn read_dataset_jsonl(path: &Path) -> Result<GraspDataset, IoError> {
    let file = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (n, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| IoError::Parse {
                path: path.display().to_string(),
                line: n + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    dataset_from_records(records)
}

/// Serialize heuristic grasp candidates in the dataset schema (no label —
/// candidates are unlabeled, and no features — none are extracted yet).
pub fn write_grasp_candidates_jsonl(
    path: &Path,
    grasps: &[HeuristicGrasp],
) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (i, g) in grasps.iter().enumerate() {
        let record = DatasetRecord {
            sample_id: format!("candidate-{i:05}"),
            r#type: String::new(),
            theta: g.config.to_vector().iter().copied().collect(),
            features: Vec::new(),
            label: None,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Grasp model: versioned JSON document.

#[derive(Serialize, Deserialize)]
struct ClassifierRepr {
    r#type: String,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    pi: f64,
    mu: Vec<f64>,
    /// Row-major 14x14 covariance.
    sigma: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PriorRepr {
    r#type: String,
    components: Vec<ComponentRepr>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    types: Vec<String>,
    bounds: ConfigurationBounds,
    classifiers: Vec<ClassifierRepr>,
    priors: Vec<PriorRepr>,
}

pub fn write_model_json(path: &Path, model: &GraspModel) -> Result<(), IoError> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        types: model.types().iter().map(|t| t.name.clone()).collect(),
        bounds: model.bounds.clone(),
        classifiers: model
            .classifiers
            .iter()
            .map(|c| ClassifierRepr {
                r#type: c.grasp_type.name.clone(),
                weights: c.weights.iter().copied().collect(),
            })
            .collect(),
        priors: model
            .priors
            .iter()
            .map(|p| PriorRepr {
                r#type: p.grasp_type.name.clone(),
                components: p
                    .components
                    .iter()
                    .map(|c| ComponentRepr {
                        pi: c.weight,
                        mu: c.mean.iter().copied().collect(),
                        sigma: c.covariance.transpose().iter().copied().collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    write_json(path, &file)
}

pub fn read_model_json(path: &Path) -> Result<GraspModel, IoError> {
    let file: ModelFile = read_json(path)?;
    if file.version != MODEL_FORMAT_VERSION {
        return Err(IoError::Version {
            expected: MODEL_FORMAT_VERSION,
            found: file.version,
        });
    }
    let type_index = |name: &str| -> Result<usize, IoError> {
        file.types
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| IoError::Invalid(format!("unknown type {name:?} in model file")))
    };
    let mut classifiers: Vec<Option<TypeClassifier>> = vec![None; file.types.len()];
    for c in &file.classifiers {
        let index = type_index(&c.r#type)?;
        if c.weights.iter().any(|w| !w.is_finite()) {
            return Err(IoError::Invalid(format!(
                "classifier {:?} has non-finite weights",
                c.r#type
            )));
        }
        classifiers[index] = Some(TypeClassifier {
            weights: DVector::from_vec(c.weights.clone()),
            grasp_type: GraspType::new(index, c.r#type.clone()),
        });
    }
    let mut priors: Vec<Option<GraspPrior>> = vec![None; file.types.len()];
    for p in &file.priors {
        let index = type_index(&p.r#type)?;
        let mut components = Vec::with_capacity(p.components.len());
        for (k, comp) in p.components.iter().enumerate() {
            if comp.mu.len() != CONFIG_DIM || comp.sigma.len() != CONFIG_DIM * CONFIG_DIM {
                return Err(IoError::Invalid(format!(
                    "prior {:?} component {k} has wrong dimensions",
                    p.r#type
                )));
            }
            if !comp.pi.is_finite()
                || comp.pi <= 0.0
                || comp.mu.iter().chain(&comp.sigma).any(|v| !v.is_finite())
            {
                return Err(IoError::Invalid(format!(
                    "prior {:?} component {k} has non-finite or non-positive values",
                    p.r#type
                )));
            }
            components.push(GaussianComponent {
                weight: comp.pi,
                mean: DVector::from_vec(comp.mu.clone()),
                covariance: DMatrix::from_row_slice(CONFIG_DIM, CONFIG_DIM, &comp.sigma),
            });
        }
        priors[index] = Some(GraspPrior {
            components,
            grasp_type: GraspType::new(index, p.r#type.clone()),
        });
    }
    let classifiers: Vec<TypeClassifier> = classifiers
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| IoError::Invalid(format!("type {i} lacks a classifier"))))
        .collect::<Result<_, _>>()?;
    let priors: Vec<GraspPrior> = priors
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| IoError::Invalid(format!("type {i} lacks a prior"))))
        .collect::<Result<_, _>>()?;
    let m = classifiers.len();
    Ok(GraspModel {
        classifiers,
        priors,
        type_prior: vec![1.0 / m as f64; m],
        bounds: file.bounds,
        pca: None,
    })
}

// ---------------------------------------------------------------------------
// Inference result.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub theta: Vec<f64>,
    pub r#type: String,
    pub objective: f64,
    pub success_probability: f64,
    pub per_type: Vec<PerTypeResultRepr>,
    pub trace: Vec<f64>,
    pub init: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerTypeResultRepr {
    pub r#type: String,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

impl From<&InferenceResult> for ResultFile {
    fn from(result: &InferenceResult) -> Self {
        ResultFile {
            theta: result.config.to_vector().iter().copied().collect(),
            r#type: result.grasp_type.name.clone(),
            objective: result.objective_value,
            success_probability: result.success_probability,
            per_type: result
                .per_type_results
                .iter()
                .map(|r| PerTypeResultRepr {
                    r#type: r.grasp_type.name.clone(),
                    theta: r.config.to_vector().iter().copied().collect(),
                    objective: r.objective_value,
                    iterations: r.iterations,
                    converged: r.converged,
                    trace: r.trace.clone(),
                })
                .collect(),
            trace: result.trace.clone(),
            init: result.init.to_vector().iter().copied().collect(),
        }
    }
}

pub fn write_result_json(path: &Path, result: &InferenceResult) -> Result<(), IoError> {
    write_json(path, &ResultFile::from(result))
}

pub fn read_result_json(path: &Path) -> Result<ResultFile, IoError> {
    read_json(path)
}

// ---------------------------------------------------------------------------
// Reports.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LooRowRepr {
    pub r#type: String,
    pub accuracy: f64,
    pub f1: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LooReportFile {
    pub per_type: Vec<LooRowRepr>,
    pub overall_accuracy: f64,
    pub overall_f1: f64,
    pub count: usize,
}

impl From<&LooReport> for LooReportFile {
    fn from(report: &LooReport) -> Self {
        LooReportFile {
            per_type: report
                .per_type
                .iter()
                .map(|r| LooRowRepr {
                    r#type: r.grasp_type.name.clone(),
                    accuracy: r.accuracy,
                    f1: r.f1,
                    count: r.count,
                })
                .collect(),
            overall_accuracy: report.overall_accuracy,
            overall_f1: report.overall_f1,
            count: report.count,
        }
    }
}

pub fn write_loo_csv(path: &Path, report: &LooReport) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "type,accuracy,f1,count")?;
    for row in &report.per_type {
        writeln!(
            out,
            "{},{},{},{}",
            row.grasp_type.name, row.accuracy, row.f1, row.count
        )?;
    }
    writeln!(
        out,
        "overall,{},{},{}",
        report.overall_accuracy, report.overall_f1, report.count
    )?;
    Ok(())
}

/// Plan-eval JSON document: long-format rows plus aggregated rates.
pub type PlanEvalFile = PlanEvalReport;

/// Long-format CSV: one row per (object, pose, method, type) trial, ready
/// for external plotting of the per-method success-rate comparison.
pub fn write_plan_eval_csv(path: &Path, rows: &[TrialRow]) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "object,pose,method,type,success,oracle_distance,objective,probability"
    )?;
    for r in rows {
        for name in [&r.object, &r.method, &r.grasp_type] {
            if name.contains(',') {
                return Err(IoError::Invalid(format!(
                    "name {name:?} contains a comma; cannot write CSV"
                )));
            }
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.object,
            r.pose,
            r.method,
            r.grasp_type,
            r.success as u8,
            r.oracle_distance,
            r.objective.map_or(String::new(), |v| v.to_string()),
            r.probability.map_or(String::new(), |v| v.to_string()),
        )?;
    }
    Ok(())
}
