use nalgebra::{Point3, Vector3};
use rand::Rng;

use super::{PerceptionError, PointCloud};

/// A table plane `normal . p = offset` with the inlier band used to fit it.
///
/// The normal is unit length and oriented away from the sensor-down
/// direction (non-negative z component, with x then y as tie-breakers for
/// vertical planes), so positive signed distance means "above the table".
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneModel {
    pub normal: Vector3<f64>,
    pub offset: f64,
    pub inlier_threshold: f64,
}

impl PlaneModel {
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Segment the object above the dominant plane of a tabletop cloud.
///
/// RANSAC samples `ransac_iters` point triples, keeps the hypothesis with the
/// most inliers (|signed distance| <= `inlier_threshold`), and returns the
/// points strictly more than `inlier_threshold` above that plane. Hypotheses
/// with equal inlier counts are resolved toward the one with fewer points
/// below the plane: a table supports the scene, so nothing should lie under
/// it. Deterministic given the caller's RNG state.
pub fn segment_object(
    cloud: &PointCloud,
    ransac_iters: usize,
    inlier_threshold: f64,
    rng: &mut impl Rng,
) -> Result<(PointCloud, PlaneModel), PerceptionError> {
    assert!(inlier_threshold > 0.0, "inlier threshold must be positive");
    let n = cloud.len();
    if n < 3 {
        return Err(PerceptionError::DegeneratePlane);
    }

    let mut best: Option<(usize, usize, Vector3<f64>, f64)> = None; // (inliers, below, normal, offset)
    for _ in 0..ransac_iters {
        let (i, j, k) = sample_distinct_triple(n, rng);
        let a = cloud.points[i];
        let b = cloud.points[j];
        let c = cloud.points[k];
        let raw = (b - a).cross(&(c - a));
        if raw.norm() < 1e-12 {
            continue; // collinear triple
        }
        let mut normal = raw.normalize();
        let mut offset = normal.dot(&a.coords);
        orient_upward(&mut normal, &mut offset);

        let mut inliers = 0usize;
        let mut below = 0usize;
        for p in &cloud.points {
            let d = normal.dot(&p.coords) - offset;
            if d.abs() <= inlier_threshold {
                inliers += 1;
            } else if d < 0.0 {
                below += 1;
            }
        }
        let better = match &best {
            None => true,
            Some((bi, bb, _, _)) => inliers > *bi || (inliers == *bi && below < *bb),
        };
        if better {
            best = Some((inliers, below, normal, offset));
        }
    }

    let (inliers, _, normal, offset) = best.ok_or(PerceptionError::DegeneratePlane)?;
    if inliers < 3 {
        return Err(PerceptionError::DegeneratePlane);
    }
    let plane = PlaneModel {
        normal,
        offset,
        inlier_threshold,
    };

    let above: Vec<usize> = (0..n)
        .filter(|&i| plane.signed_distance(&cloud.points[i]) > inlier_threshold)
        .collect();
    if above.is_empty() {
        return Err(PerceptionError::EmptySegmentation);
    }
    Ok((cloud.select(&above), plane))
}

/// Flip the plane normal so it points away from sensor-down (-z). Vertical
/// planes fall back to preferring +x, then +y, keeping the choice
/// deterministic.
fn orient_upward(normal: &mut Vector3<f64>, offset: &mut f64) {
    let flip = if normal.z.abs() > 1e-12 {
        normal.z < 0.0
    } else if normal.x.abs() > 1e-12 {
        normal.x < 0.0
    } else {
        normal.y < 0.0
    };
    if flip {
        *normal = -*normal;
        *offset = -*offset;
    }
}

fn sample_distinct_triple(n: usize, rng: &mut impl Rng) -> (usize, usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n);
    while j == i {
        j = rng.random_range(0..n);
    }
    let mut k = rng.random_range(0..n);
    while k == i || k == j {
        k = rng.random_range(0..n);
    }
    (i, j, k)
}
