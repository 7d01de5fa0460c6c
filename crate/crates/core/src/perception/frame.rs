use nalgebra::{Matrix3, Point3, Vector3};

use super::{PerceptionError, PointCloud};

/// A right-handed reference frame attached to a segmented object.
///
/// `origin` is the cloud centroid; the columns of `axes` are the first,
/// second, and third frame axes expressed in the sensor frame. The first two
/// come from the principal axes of the point covariance, the third completes
/// the right-handed triad.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectFrame {
    pub origin: Point3<f64>,
    pub axes: Matrix3<f64>,
}

impl ObjectFrame {
    /// Identity orientation at the given origin. Handy for tests and
    /// synthetic scenes.
    pub fn identity_at(origin: Point3<f64>) -> Self {
        Self {
            origin,
            axes: Matrix3::identity(),
        }
    }

    /// Sensor-frame point to frame coordinates.
    pub fn to_local(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.axes.transpose() * (p - self.origin)
    }

    /// Frame coordinates back to the sensor frame.
    pub fn to_world(&self, q: &Vector3<f64>) -> Point3<f64> {
        self.origin + self.axes * q
    }

    /// Max deviation of `axes^T axes` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.axes.transpose() * self.axes - Matrix3::identity())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Estimate the object frame from the principal axes of a segmented cloud.
///
/// Axes are eigenvectors of the point covariance in descending eigenvalue
/// order. Eigenvector sign is arbitrary, so each of the first two axes is
/// deterministically disambiguated: the first prefers a non-negative dot
/// product with +x (ties toward +z, then +y), the second with +y (ties
/// toward +z, then +x). The third axis is their cross product.
pub fn estimate_object_frame(cloud: &PointCloud) -> Result<ObjectFrame, PerceptionError> {
    let n = cloud.len();
    if n < 3 {
        return Err(PerceptionError::DegenerateGeometry { ratio: 0.0 });
    }
    let centroid = cloud.centroid();
    let mut cov = Matrix3::zeros();
    for p in &cloud.points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n as f64;

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambda1 = eig.eigenvalues[order[0]];
    let lambda2 = eig.eigenvalues[order[1]];
    if lambda1 <= 0.0 || lambda2 / lambda1 < 1e-9 {
        return Err(PerceptionError::DegenerateGeometry {
            ratio: if lambda1 > 0.0 { lambda2 / lambda1 } else { 0.0 },
        });
    }

    let mut first: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let mut second: Vector3<f64> = eig.eigenvectors.column(order[1]).into_owned();
    // Numerically enforce orthogonality before fixing signs.
    second -= first * first.dot(&second);
    let mut second = second.normalize();

    fix_sign(&mut first, &[Vector3::x(), Vector3::z(), Vector3::y()]);
    fix_sign(&mut second, &[Vector3::y(), Vector3::z(), Vector3::x()]);
    let third = first.cross(&second).normalize();

    Ok(ObjectFrame {
        origin: centroid,
        axes: Matrix3::from_columns(&[first, second, third]),
    })
}

/// Flip `axis` so its dot product with the first preference vector is
/// non-negative, falling through to the next preference on (near-)zero dots.
fn fix_sign(axis: &mut Vector3<f64>, preferences: &[Vector3<f64>; 3]) {
    for pref in preferences {
        let d = axis.dot(pref);
        if d.abs() > 1e-12 {
            if d < 0.0 {
                *axis = -*axis;
            }
            return;
        }
    }
}
