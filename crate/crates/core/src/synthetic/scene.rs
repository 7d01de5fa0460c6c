use nalgebra::{Point3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::perception::PointCloud;

/// Shape primitives sampled on their surface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Primitive {
    /// Axis-aligned box with full edge lengths.
    Box { extents: [f64; 3] },
    /// Upright cylinder (axis along z).
    Cylinder { radius: f64, height: f64 },
}

/// One primitive of a composite object, offset from the object center.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ShapePart {
    pub primitive: Primitive,
    #[serde(default)]
    pub offset: [f64; 3],
}

/// An object shape: a single primitive or a rigid composite of parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Box { extents: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
    Composite { parts: Vec<ShapePart> },
}

impl Shape {
    fn parts(&self) -> Vec<ShapePart> {
        match self {
            Shape::Box { extents } => vec![ShapePart {
                primitive: Primitive::Box { extents: *extents },
                offset: [0.0; 3],
            }],
            Shape::Cylinder { radius, height } => vec![ShapePart {
                primitive: Primitive::Cylinder {
                    radius: *radius,
                    height: *height,
                },
                offset: [0.0; 3],
            }],
            Shape::Composite { parts } => parts.clone(),
        }
    }
}

fn default_density() -> f64 {
    2e4
}

fn default_scene_noise() -> f64 {
    0.001
}

fn default_table_halfwidth() -> f64 {
    0.3
}

fn default_camera() -> [f64; 3] {
    [0.8, 0.2, 0.6]
}

/// A synthetic tabletop scene: one object resting on the z = 0 plane,
/// observed from a single camera position (back-facing surface points are
/// culled to mimic single-view partiality).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SyntheticObjectSpec {
    pub name: String,
    pub shape: Shape,
    /// Object center on the table, meters.
    #[serde(default)]
    pub position: [f64; 2],
    /// Rotation about the vertical axis, radians.
    #[serde(default)]
    pub yaw: f64,
    /// Surface sampling density, points per square meter.
    #[serde(default = "default_density")]
    pub point_density: f64,
    /// Per-coordinate Gaussian sensor noise, meters.
    #[serde(default = "default_scene_noise")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Half width of the sampled table patch around the object.
    #[serde(default = "default_table_halfwidth")]
    pub table_halfwidth: f64,
    /// Camera position in the sensor frame.
    #[serde(default = "default_camera")]
    pub camera: [f64; 3],
}

impl SyntheticObjectSpec {
    pub fn camera_position(&self) -> Vector3<f64> {
        Vector3::new(self.camera[0], self.camera[1], self.camera[2])
    }

    /// A pose variant of this scene: shifted, rotated, and reseeded.
    /// Used by the evaluation protocols to place each object at several
    /// table poses.
    pub fn with_pose(&self, dx: f64, dy: f64, yaw: f64, seed: u64) -> Self {
        Self {
            position: [self.position[0] + dx, self.position[1] + dy],
            yaw: self.yaw + yaw,
            seed,
            ..self.clone()
        }
    }
}

struct SurfaceSample {
    point: Vector3<f64>,
    normal: Vector3<f64>,
}

/// Generate the scene point cloud: table-plane points plus the object's
/// camera-facing surface points, with Gaussian sensor noise. Deterministic
/// under the spec seed.
pub fn generate_scene(spec: &SyntheticObjectSpec) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma.max(0.0)).expect("valid sigma");
    let noisy = |v: Vector3<f64>, rng: &mut ChaCha8Rng| -> Point3<f64> {
        if spec.noise_sigma > 0.0 {
            Point3::new(
                v.x + noise.sample(rng),
                v.y + noise.sample(rng),
                v.z + noise.sample(rng),
            )
        } else {
            Point3::from(v)
        }
    };

    let parts = spec.shape.parts();
    // Rest the composite on the table: lift so its lowest point is z = 0.
    let min_z = parts
        .iter()
        .map(|p| {
            p.offset[2]
                - match p.primitive {
                    Primitive::Box { extents } => extents[2] / 2.0,
                    Primitive::Cylinder { height, .. } => height / 2.0,
                }
        })
        .fold(f64::INFINITY, f64::min);
    let lift = Vector3::new(0.0, 0.0, -min_z);
    let rotation = Rotation3::from_axis_angle(&Vector3::z_axis(), spec.yaw);
    let translation = Vector3::new(spec.position[0], spec.position[1], 0.0);
    let camera = spec.camera_position();

    let mut points: Vec<Point3<f64>> = Vec::new();

    // Table patch around the object.
    let w = spec.table_halfwidth;
    let table_count = ((2.0 * w).powi(2) * spec.point_density).round().max(1.0) as usize;
    for _ in 0..table_count {
        let p = Vector3::new(
            spec.position[0] + rng.random_range(-w..w),
            spec.position[1] + rng.random_range(-w..w),
            0.0,
        );
        points.push(noisy(p, &mut rng));
    }

    // Object surface, camera-facing side only.
    for part in &parts {
        let offset = Vector3::new(part.offset[0], part.offset[1], part.offset[2]);
        for sample in sample_primitive(&part.primitive, spec.point_density, &mut rng) {
            let world_point = rotation * (sample.point + offset + lift) + translation;
            let world_normal = rotation * sample.normal;
            if world_normal.dot(&(camera - world_point)) <= 0.0 {
                continue;
            }
            points.push(noisy(world_point, &mut rng));
        }
    }

    PointCloud::new(points)
}

fn sample_count(area: f64, density: f64) -> usize {
    (area * density).round().max(1.0) as usize
}

fn sample_primitive(
    primitive: &Primitive,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<SurfaceSample> {
    let mut samples = Vec::new();
    match primitive {
        Primitive::Box { extents } => {
            let e = Vector3::new(extents[0], extents[1], extents[2]);
            for axis in 0..3 {
                let u = (axis + 1) % 3;
                let v = (axis + 2) % 3;
                let area = e[u] * e[v];
                for sign in [-1.0, 1.0] {
                    for _ in 0..sample_count(area, density) {
                        let mut p = Vector3::zeros();
                        p[axis] = sign * e[axis] / 2.0;
                        p[u] = rng.random_range(-e[u] / 2.0..e[u] / 2.0);
                        p[v] = rng.random_range(-e[v] / 2.0..e[v] / 2.0);
                        let mut normal = Vector3::zeros();
                        normal[axis] = sign;
                        samples.push(SurfaceSample { point: p, normal });
                    }
                }
            }
        }
        Primitive::Cylinder { radius, height } => {
            let lateral_area = 2.0 * std::f64::consts::PI * radius * height;
            for _ in 0..sample_count(lateral_area, density) {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let z = rng.random_range(-height / 2.0..height / 2.0);
                let normal = Vector3::new(angle.cos(), angle.sin(), 0.0);
                samples.push(SurfaceSample {
                    point: Vector3::new(radius * angle.cos(), radius * angle.sin(), z),
                    normal,
                });
            }
            let cap_area = std::f64::consts::PI * radius * radius;
            for sign in [-1.0, 1.0] {
                for _ in 0..sample_count(cap_area, density) {
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    let r = radius * rng.random_range(0.0f64..1.0).sqrt();
                    samples.push(SurfaceSample {
                        point: Vector3::new(r * angle.cos(), r * angle.sin(), sign * height / 2.0),
                        normal: Vector3::new(0.0, 0.0, sign),
                    });
                }
            }
        }
    }
    samples
}
