use std::collections::BTreeMap;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::perception::VisualFeatures;

/// Dimension of a grasp configuration: 6-D palm pose plus 8 proximal joints.
pub const CONFIG_DIM: usize = 14;

/// A discrete grasp type with a dense index within its model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraspType {
    pub index: usize,
    pub name: String,
}

impl GraspType {
    pub fn new(index: usize, name: impl Into<String>) -> Self {
        Self {
            index,
            name: name.into(),
        }
    }
}

/// The 14-D hand preshape: palm pose in the object frame plus the first two
/// proximal joint angles of each of four fingers.
///
/// Flattened layout is `[position(3) | roll,pitch,yaw(3) | joints(8)]`;
/// orientation is extrinsic roll-pitch-yaw about the object frame's fixed
/// axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspConfiguration {
    pub palm_position: Vector3<f64>,
    pub palm_orientation: Vector3<f64>,
    pub preshape_joints: [f64; 8],
}

impl GraspConfiguration {
    pub fn zeros() -> Self {
        Self {
            palm_position: Vector3::zeros(),
            palm_orientation: Vector3::zeros(),
            preshape_joints: [0.0; 8],
        }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(CONFIG_DIM);
        for i in 0..3 {
            v[i] = self.palm_position[i];
            v[3 + i] = self.palm_orientation[i];
        }
        for (i, j) in self.preshape_joints.iter().enumerate() {
            v[6 + i] = *j;
        }
        v
    }

    pub fn from_slice(values: &[f64]) -> Self {
        assert_eq!(values.len(), CONFIG_DIM, "grasp configuration must be 14-D");
        let mut joints = [0.0; 8];
        joints.copy_from_slice(&values[6..14]);
        Self {
            palm_position: Vector3::new(values[0], values[1], values[2]),
            palm_orientation: Vector3::new(values[3], values[4], values[5]),
            preshape_joints: joints,
        }
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self::from_slice(v.as_slice())
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Elementwise box limits on grasp configurations (hand joint limits plus
/// workspace limits on the palm pose).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationBounds {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl ConfigurationBounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        assert_eq!(lower.len(), CONFIG_DIM);
        assert_eq!(upper.len(), CONFIG_DIM);
        assert!(
            lower.iter().zip(upper.iter()).all(|(l, u)| l <= u),
            "lower bound exceeds upper bound"
        );
        Self { lower, upper }
    }

    /// Default bounds: palm position within +/-0.5 m of the object, full
    /// orientation range, and approximate Allegro proximal joint limits
    /// (index/middle/ring spread and flexion, then thumb).
    pub fn default_allegro() -> Self {
        use std::f64::consts::PI;
        let lower = DVector::from_vec(vec![
            -0.5, -0.5, -0.5, // position
            -PI, -PI, -PI, // orientation
            -0.47, -0.196, -0.47, -0.196, -0.47, -0.196, 0.263, -0.105,
        ]);
        let upper = DVector::from_vec(vec![
            0.5, 0.5, 0.5, //
            PI, PI, PI, //
            0.47, 1.61, 0.47, 1.61, 0.47, 1.61, 1.396, 1.163,
        ]);
        Self::new(lower, upper)
    }

    pub fn contains(&self, config: &GraspConfiguration) -> bool {
        let v = config.to_vector();
        (0..CONFIG_DIM).all(|i| v[i] >= self.lower[i] && v[i] <= self.upper[i])
    }

    pub fn clamp(&self, config: &GraspConfiguration) -> GraspConfiguration {
        let v = config.to_vector();
        let clamped = DVector::from_fn(CONFIG_DIM, |i, _| v[i].clamp(self.lower[i], self.upper[i]));
        GraspConfiguration::from_vector(&clamped)
    }
}

// Bounds serialize as plain arrays so config files stay hand-editable.
#[derive(Serialize, Deserialize)]
struct BoundsRepr {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Serialize for ConfigurationBounds {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BoundsRepr {
            lower: self.lower.iter().copied().collect(),
            upper: self.upper.iter().copied().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConfigurationBounds {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = BoundsRepr::deserialize(deserializer)?;
        if repr.lower.len() != CONFIG_DIM || repr.upper.len() != CONFIG_DIM {
            return Err(serde::de::Error::custom(format!(
                "bounds must be {CONFIG_DIM}-D"
            )));
        }
        if repr.lower.iter().zip(&repr.upper).any(|(l, u)| l > u) {
            return Err(serde::de::Error::custom("lower bound exceeds upper bound"));
        }
        Ok(ConfigurationBounds {
            lower: DVector::from_vec(repr.lower),
            upper: DVector::from_vec(repr.upper),
        })
    }
}

/// One labeled grasp attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub sample_id: String,
    pub config: GraspConfiguration,
    pub grasp_type: GraspType,
    pub features: VisualFeatures,
    pub label: bool,
}

/// A labeled grasp dataset with dense, name-stable type indices.
///
/// Type indices are normalized on construction: distinct type names are
/// sorted and indexed in order, so the same collection of samples produces
/// the same model regardless of input order.
#[derive(Debug, Clone)]
pub struct GraspDataset {
    samples: Vec<TrainingSample>,
    types: Vec<GraspType>,
}

impl GraspDataset {
    pub fn new(mut samples: Vec<TrainingSample>) -> Result<Self, ModelError> {
        if samples.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        let feature_dim = samples[0].features.dim();
        for s in &samples {
            if s.features.dim() != feature_dim {
                return Err(ModelError::DimensionMismatch {
                    expected: feature_dim,
                    got: s.features.dim(),
                });
            }
        }
        let mut names: Vec<String> = samples
            .iter()
            .map(|s| s.grasp_type.name.clone())
            .collect();
        names.sort();
        names.dedup();
        let index_of: BTreeMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        for s in &mut samples {
            s.grasp_type.index = index_of[s.grasp_type.name.as_str()];
        }
        let types = names
            .into_iter()
            .enumerate()
            .map(|(i, n)| GraspType::new(i, n))
            .collect();
        Ok(Self { samples, types })
    }

    pub fn samples(&self) -> &[TrainingSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn types(&self) -> &[GraspType] {
        &self.types
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.samples[0].features.dim()
    }

    pub fn samples_of_type(&self, type_index: usize) -> impl Iterator<Item = &TrainingSample> {
        self.samples
            .iter()
            .filter(move |s| s.grasp_type.index == type_index)
    }

    /// Sample counts keyed by (type index, label).
    pub fn counts(&self) -> BTreeMap<(usize, bool), usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry((s.grasp_type.index, s.label)).or_insert(0) += 1;
        }
        counts
    }

    /// The dataset restricted to one type, reindexed as a single-type
    /// dataset. Used by the type-free reduction and factorization checks.
    pub fn restricted_to_type(&self, type_index: usize) -> Result<GraspDataset, ModelError> {
        let subset: Vec<TrainingSample> = self
            .samples_of_type(type_index)
            .cloned()
            .collect();
        GraspDataset::new(subset)
    }

    /// A copy with every sample relabeled to a single type, collapsing the
    /// model to its type-free variant.
    pub fn relabeled_single_type(&self, name: &str) -> GraspDataset {
        let samples = self
            .samples
            .iter()
            .cloned()
            .map(|mut s| {
                s.grasp_type = GraspType::new(0, name);
                s
            })
            .collect();
        GraspDataset::new(samples).expect("non-empty by construction")
    }

    /// The dataset without sample `index`, for leave-one-out evaluation.
    pub fn without_sample(&self, index: usize) -> Result<GraspDataset, ModelError> {
        let mut samples = self.samples.clone();
        samples.remove(index);
        GraspDataset::new(samples)
    }
}

/// Deterministic per-type RNG seed derived from the base seed and the type
/// name (FNV-1a), so a type's fit does not depend on its index or on which
/// other types share the dataset.
pub fn stable_type_seed(base: u64, type_name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in type_name.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash ^ base
}
