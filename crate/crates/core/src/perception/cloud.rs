use nalgebra::{Point3, Vector3};

/// An unordered 3-D point cloud in the sensor frame, with optional per-point
/// color. Color is carried through segmentation but ignored by the pipeline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self {
            points,
            colors: None,
        }
    }

    pub fn with_colors(points: Vec<Point3<f64>>, colors: Vec<[u8; 3]>) -> Self {
        debug_assert_eq!(points.len(), colors.len());
        Self {
            points,
            colors: Some(colors),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every coordinate is finite.
    pub fn is_finite(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.coords.iter().all(|c| c.is_finite()))
    }

    /// Arithmetic mean of the points. Returns the origin for an empty cloud.
    pub fn centroid(&self) -> Point3<f64> {
        if self.points.is_empty() {
            return Point3::origin();
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Point3::from(sum / self.points.len() as f64)
    }

    /// A copy of the cloud translated by `t`. Used by equivariance tests and
    /// synthetic scene placement.
    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| p + t).collect(),
            colors: self.colors.clone(),
        }
    }

    /// Keep the points (and matching colors) at the given indices.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }
}
