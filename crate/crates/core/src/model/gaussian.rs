use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// One weighted Gaussian of a mixture prior.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianComponent {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Factorize the covariance for repeated density and precision products.
    pub fn prepared(&self) -> PreparedGaussian {
        PreparedGaussian::new(self.mean.clone(), &self.covariance)
    }
}

/// A Gaussian with its Cholesky factor cached.
#[derive(Debug, Clone)]
pub struct PreparedGaussian {
    pub mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// -d/2 ln(2 pi) - 1/2 ln det(Sigma)
    log_norm: f64,
}

impl PreparedGaussian {
    pub fn new(mean: DVector<f64>, covariance: &DMatrix<f64>) -> Self {
        let d = mean.len();
        let chol = cholesky_with_jitter(covariance);
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Self {
            mean,
            chol,
            log_norm,
        }
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        self.log_norm - 0.5 * diff.dot(&self.chol.solve(&diff))
    }

    /// `Sigma^{-1} (x - mean)`, the gradient of the negative log density.
    pub fn precision_times_diff(&self, x: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(&(x - &self.mean))
    }
}

/// Cholesky with escalating diagonal jitter; the fitted covariances are
/// eigenvalue-floored so failures only arise from rounding.
fn cholesky_with_jitter(covariance: &DMatrix<f64>) -> Cholesky<f64, Dyn> {
    if let Some(c) = Cholesky::new(covariance.clone()) {
        return c;
    }
    let mut jitter = 1e-12;
    for _ in 0..20 {
        let mut m = covariance.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return c;
        }
        jitter *= 10.0;
    }
    panic!("covariance is not positive definite even after jitter");
}
