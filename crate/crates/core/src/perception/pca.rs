use nalgebra::{DMatrix, DVector};

use super::{PerceptionError, VoxelGrid, VOXEL_CELL_COUNT};

/// The PCA feature vector of one object: the voxel grid projected to
/// `latent_dim` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualFeatures {
    pub values: DVector<f64>,
    pub source_id: String,
}

impl VisualFeatures {
    pub fn new(values: DVector<f64>) -> Self {
        Self {
            values,
            source_id: String::new(),
        }
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A fitted linear projection from flattened voxel grids to the latent
/// feature space: `f = basis * (v - mean)`.
///
/// Rows of `basis` are the leading principal directions of the training
/// data, mutually orthonormal. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    mean: DVector<f64>,
    basis: DMatrix<f64>,
    latent_dim: usize,
}

impl PcaProjection {
    pub fn from_parts(mean: DVector<f64>, basis: DMatrix<f64>) -> Self {
        let latent_dim = basis.nrows();
        debug_assert_eq!(mean.len(), basis.ncols());
        Self {
            mean,
            basis,
            latent_dim,
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Project an arbitrary real vector of the input dimension.
    pub fn project_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (v - &self.mean)
    }

    /// Map latent features back into the input space.
    pub fn reconstruct(&self, features: &DVector<f64>) -> DVector<f64> {
        &self.mean + self.basis.transpose() * features
    }

    /// Max deviation of `basis * basis^T` from the identity.
    pub fn row_orthonormality_error(&self) -> f64 {
        let gram = &self.basis * self.basis.transpose();
        let mut err = 0.0f64;
        for i in 0..self.latent_dim {
            for j in 0..self.latent_dim {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[(i, j)] - target).abs());
            }
        }
        err
    }
}

/// Fit the PCA projection on training voxel grids.
pub fn fit_pca(grids: &[VoxelGrid], latent_dim: usize) -> Result<PcaProjection, PerceptionError> {
    let vectors: Vec<DVector<f64>> = grids.iter().map(|g| g.as_feature_vector()).collect();
    for v in &vectors {
        debug_assert_eq!(v.len(), VOXEL_CELL_COUNT);
    }
    fit_pca_vectors(&vectors, latent_dim)
}

/// Fit PCA on arbitrary real vectors of a common dimension.
///
/// The input dimension (8000 for voxel grids) far exceeds the sample count,
/// so the eigendecomposition runs on the n x n Gram matrix of the centered
/// data rather than on the d x d covariance; both yield the same leading
/// principal directions. Directions whose eigenvalue is numerically zero are
/// completed to an orthonormal set from canonical basis vectors — any
/// orthonormal basis of the covariance null space is a valid eigenvector
/// set for eigenvalue zero.
pub fn fit_pca_vectors(
    vectors: &[DVector<f64>],
    latent_dim: usize,
) -> Result<PcaProjection, PerceptionError> {
    let n = vectors.len();
    if n < latent_dim + 1 {
        return Err(PerceptionError::InsufficientData {
            latent_dim,
            needed: latent_dim + 1,
            got: n,
        });
    }
    let d = vectors[0].len();
    assert!(latent_dim <= d, "latent dim exceeds input dim");

    let mut mean = DVector::zeros(d);
    for v in vectors {
        mean += v;
    }
    mean /= n as f64;

    // Centered data as rows: X is n x d, Gram = X X^T is n x n.
    let centered = DMatrix::from_fn(n, d, |i, j| vectors[i][j] - mean[j]);
    let gram = &centered * centered.transpose();
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let max_eig = eig.eigenvalues[order[0]].max(0.0);
    let rank_cutoff = (max_eig * 1e-12).max(1e-12);

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(latent_dim);
    for &idx in order.iter().take(latent_dim) {
        let lambda = eig.eigenvalues[idx];
        if lambda <= rank_cutoff {
            break;
        }
        let v = eig.eigenvectors.column(idx);
        let mut direction = centered.transpose() * v;
        let norm = direction.norm();
        if norm <= 1e-12 {
            break;
        }
        direction /= norm;
        // Re-orthogonalize against earlier rows; close eigenvalues can leave
        // residual overlap beyond the 1e-6 contract.
        for r in &rows {
            let overlap = r.dot(&direction);
            direction -= r * overlap;
        }
        let renorm = direction.norm();
        if renorm <= 1e-6 {
            break;
        }
        rows.push(direction / renorm);
    }
    complete_orthonormal(&mut rows, latent_dim, d);

    let basis = DMatrix::from_fn(latent_dim, d, |i, j| rows[i][j]);
    Ok(PcaProjection {
        mean,
        basis,
        latent_dim,
    })
}

/// Extend `rows` to `latent_dim` orthonormal vectors using canonical basis
/// vectors orthogonalized against the existing rows.
fn complete_orthonormal(rows: &mut Vec<DVector<f64>>, latent_dim: usize, d: usize) {
    let mut candidate = 0usize;
    while rows.len() < latent_dim {
        assert!(candidate < d, "cannot complete orthonormal basis");
        let mut v = DVector::zeros(d);
        v[candidate] = 1.0;
        candidate += 1;
        for r in rows.iter() {
            let overlap = r.dot(&v);
            v -= r * overlap;
        }
        let norm = v.norm();
        if norm > 0.5 {
            rows.push(v / norm);
        }
    }
}

/// Project a voxel grid through a fitted PCA. The caller attaches a source
/// id when the grid's provenance matters.
pub fn extract_features(grid: &VoxelGrid, proj: &PcaProjection) -> VisualFeatures {
    VisualFeatures::new(proj.project_vector(&grid.as_feature_vector()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vectors(n: usize, d: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// Independent route to the top principal directions: power iteration
    /// with deflation on the covariance, applied implicitly through the data.
    fn power_iteration_directions(
        vectors: &[DVector<f64>],
        count: usize,
        iters: usize,
    ) -> Vec<DVector<f64>> {
        let n = vectors.len();
        let d = vectors[0].len();
        let mut mean = DVector::zeros(d);
        for v in vectors {
            mean += v;
        }
        mean /= n as f64;
        let centered: Vec<DVector<f64>> = vectors.iter().map(|v| v - &mean).collect();

        let mut found: Vec<DVector<f64>> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        for _ in 0..count {
            let mut u = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            for _ in 0..iters {
                // u <- C u with C = sum_i x_i x_i^T, deflated by found dirs.
                let mut next = DVector::zeros(d);
                for x in &centered {
                    next += x * x.dot(&u);
                }
                for f in &found {
                    let overlap = f.dot(&next);
                    next -= f * overlap;
                }
                let norm = next.norm();
                if norm < 1e-300 {
                    break;
                }
                u = next / norm;
            }
            found.push(u);
        }
        found
    }

    #[test]
    fn rank_one_data_recovers_direction() {
        let d = 50;
        let mut direction = DVector::zeros(d);
        direction[3] = 3.0;
        direction[17] = -4.0; // norm 5
        let vectors: Vec<DVector<f64>> = (0..20)
            .map(|i| &direction * (i as f64 - 10.0))
            .collect();
        let proj = fit_pca_vectors(&vectors, 5).unwrap();
        let unit = &direction / direction.norm();
        let first: DVector<f64> = proj.basis().row(0).transpose();
        let aligned = (first.clone() - &unit).norm().min((first + &unit).norm());
        assert!(aligned < 1e-6);
        assert!(proj.row_orthonormality_error() < 1e-6);
    }

    #[test]
    fn insufficient_samples_is_an_error() {
        let vectors = random_vectors(10, 30, 1);
        match fit_pca_vectors(&vectors, 15) {
            Err(PerceptionError::InsufficientData { needed: 16, got: 10, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn reconstruction_error_non_increasing_in_latent_dim() {
        let vectors = random_vectors(40, 60, 7);
        let mut previous = f64::INFINITY;
        for latent in [5, 10, 15] {
            let proj = fit_pca_vectors(&vectors, latent).unwrap();
            let err: f64 = vectors
                .iter()
                .map(|v| (v - proj.reconstruct(&proj.project_vector(v))).norm_squared())
                .sum();
            assert!(
                err <= previous + 1e-9,
                "residual grew from {previous} to {err} at dim {latent}"
            );
            previous = err;
        }
    }

    #[test]
    fn matches_power_iteration_oracle() {
        let vectors = random_vectors(30, 40, 21);
        let proj = fit_pca_vectors(&vectors, 5).unwrap();
        let oracle = power_iteration_directions(&vectors, 5, 800);
        for (i, dir) in oracle.iter().enumerate() {
            let row: DVector<f64> = proj.basis().row(i).transpose();
            let aligned = (row.clone() - dir).norm().min((row + dir).norm());
            assert!(aligned < 1e-4, "direction {i} misaligned by {aligned}");
        }
    }

    #[test]
    fn projected_training_data_has_zero_mean() {
        let vectors = random_vectors(25, 35, 3);
        let proj = fit_pca_vectors(&vectors, 8).unwrap();
        let mut sum = DVector::zeros(8);
        for v in &vectors {
            sum += proj.project_vector(v);
        }
        sum /= vectors.len() as f64;
        assert!(sum.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn projection_is_linear() {
        let vectors = random_vectors(20, 30, 5);
        let proj = fit_pca_vectors(&vectors, 6).unwrap();
        let a = &vectors[0];
        let b = &vectors[1];
        for alpha in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let blend = a * alpha + b * (1.0 - alpha);
            let expected =
                proj.project_vector(a) * alpha + proj.project_vector(b) * (1.0 - alpha);
            assert!((proj.project_vector(&blend) - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn all_zero_grid_projects_to_finite_features() {
        use crate::perception::ObjectFrame;
        use nalgebra::Point3;
        let grids: Vec<VoxelGrid> = (0..6)
            .map(|i| {
                let mut g = VoxelGrid::empty(ObjectFrame::identity_at(Point3::origin()));
                g.set(i, i, i, true);
                g
            })
            .collect();
        let proj = fit_pca(&grids, 4).unwrap();
        let zero = VoxelGrid::empty(ObjectFrame::identity_at(Point3::origin()));
        let features = extract_features(&zero, &proj);
        assert!(features.is_finite());
        assert_eq!(features.dim(), 4);
    }
}
