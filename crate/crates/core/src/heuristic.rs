//! Geometry-based heuristic grasps.
//!
//! Grasps are generated 6 cm off the faces of the object's bounding box with
//! the palm facing the face center, plus Gaussian position noise. They serve
//! both as training-data candidates and as the initialization of MAP
//! inference (the grasp closest to the camera).

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConfigurationBounds, GraspConfiguration};
use crate::perception::{ObjectFrame, PointCloud};

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("empty grasp list")]
    EmptyList,
}

/// Axis-aligned bounding box in an object frame.
#[derive(Debug, Clone)]
pub struct BoundingBox {
    pub frame: ObjectFrame,
    pub half_extents: Vector3<f64>,
}

/// Smallest half extent reported for degenerate clouds.
const MIN_HALF_EXTENT: f64 = 1e-6;

/// Half extents are the maximum absolute frame coordinate per axis.
pub fn compute_bounding_box(cloud: &PointCloud, frame: &ObjectFrame) -> BoundingBox {
    let mut half = Vector3::from_element(MIN_HALF_EXTENT);
    for p in &cloud.points {
        let local = frame.to_local(p);
        for a in 0..3 {
            half[a] = half[a].max(local[a].abs());
        }
    }
    BoundingBox {
        frame: frame.clone(),
        half_extents: half,
    }
}

/// Generation knobs with the documented defaults: 6 cm face offset, 2 cm
/// position noise, and an open-hand nominal preshape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicParams {
    /// Palm offset from the face center along the outward normal, meters.
    pub offset: f64,
    /// Std of the Gaussian position noise per axis, meters.
    pub noise_sigma: f64,
    /// Joint angles of the open hand used for every heuristic preshape.
    pub nominal_preshape: [f64; 8],
    pub bounds: ConfigurationBounds,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self {
            offset: 0.06,
            noise_sigma: 0.02,
            nominal_preshape: [0.0, 0.3, 0.0, 0.3, 0.0, 0.3, 0.8, 0.3],
            bounds: ConfigurationBounds::default_allegro(),
        }
    }
}

/// A heuristic grasp candidate: the preshape, the box face it approaches,
/// and its distance to the camera.
#[derive(Debug, Clone)]
pub struct HeuristicGrasp {
    pub config: GraspConfiguration,
    /// Face index 0..6 as (+x, -x, +y, -y, +z, -z) of the box frame.
    pub face_id: usize,
    pub camera_distance: f64,
}

fn face_axis_sign(face_id: usize) -> (usize, f64) {
    (face_id / 2, if face_id.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// The five reachable faces: all but the one facing the table (the face
/// whose outward normal points most downward in the sensor frame).
pub fn reachable_faces(frame: &ObjectFrame) -> Vec<usize> {
    let mut bottom = 0;
    let mut lowest = f64::INFINITY;
    for face in 0..6 {
        let (axis, sign) = face_axis_sign(face);
        let world_z = sign * frame.axes.column(axis).z;
        if world_z < lowest {
            lowest = world_z;
            bottom = face;
        }
    }
    (0..6).filter(|&f| f != bottom).collect()
}

/// Generate `count` heuristic grasps around the box.
///
/// Faces are drawn uniformly from the reachable set; the palm sits
/// `params.offset` outside the face center with Gaussian position noise, the
/// palm z-axis faces the face center, and joints take the nominal open-hand
/// preshape. Configurations are clamped into the bounds. Deterministic given
/// the RNG state; `camera_position` is in the sensor frame.
pub fn generate_heuristic_grasps(
    bbox: &BoundingBox,
    camera_position: &Vector3<f64>,
    params: &HeuristicParams,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<HeuristicGrasp> {
    assert!(count >= 1);
    let faces = reachable_faces(&bbox.frame);
    let camera_local = bbox
        .frame
        .to_local(&nalgebra::Point3::from(*camera_position));
    let noise = Normal::new(0.0, params.noise_sigma.max(0.0)).expect("valid sigma");

    (0..count)
        .map(|_| {
            let face_id = faces[rng.random_range(0..faces.len())];
            let (axis, sign) = face_axis_sign(face_id);
            let mut outward = Vector3::zeros();
            outward[axis] = sign;
            let face_center = outward * bbox.half_extents[axis];
            let mut position = face_center + outward * params.offset;
            if params.noise_sigma > 0.0 {
                for a in 0..3 {
                    position[a] += noise.sample(rng);
                }
            }
            let orientation = approach_orientation(&-outward);
            let config = params.bounds.clamp(&GraspConfiguration {
                palm_position: position,
                palm_orientation: orientation,
                preshape_joints: params.nominal_preshape,
            });
            let camera_distance = (config.palm_position - camera_local).norm();
            HeuristicGrasp {
                config,
                face_id,
                camera_distance,
            }
        })
        .collect()
}

/// Roll-pitch-yaw (extrinsic, object frame) of a palm whose z-axis points
/// along `approach`, with the palm up-direction resolved against the object
/// frame's third axis (or its first, for top/bottom faces).
pub fn approach_orientation(approach: &Vector3<f64>) -> Vector3<f64> {
    let z = approach.normalize();
    let reference = if z.dot(&Vector3::z()).abs() > 0.999 {
        Vector3::x()
    } else {
        Vector3::z()
    };
    let x = reference.cross(&z).normalize();
    let y = z.cross(&x);
    let rotation = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    let (roll, pitch, yaw) = rotation.euler_angles();
    Vector3::new(roll, pitch, yaw)
}

/// The heuristic grasp closest to the camera; ties resolve to the lowest
/// face id.
pub fn select_init(grasps: &[HeuristicGrasp]) -> Result<&HeuristicGrasp, HeuristicError> {
    grasps
        .iter()
        .min_by(|a, b| {
            a.camera_distance
                .total_cmp(&b.camera_distance)
                .then(a.face_id.cmp(&b.face_id))
        })
        .ok_or(HeuristicError::EmptyList)
}

/// Per-type inits for planning: the closest-to-camera heuristic grasp,
/// replicated for each grasp type.
pub fn inits_for_types(
    grasps: &[HeuristicGrasp],
    num_types: usize,
) -> Result<Vec<GraspConfiguration>, HeuristicError> {
    let init = select_init(grasps)?;
    Ok(vec![init.config.clone(); num_types])
}
