use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gaussian::{GaussianComponent, PreparedGaussian};
use super::{
    stable_type_seed, GraspConfiguration, GraspDataset, GraspType, ModelConfig, ModelError,
    PriorLabelFilter,
};

/// The Gaussian-mixture prior over grasp configurations for one grasp type.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspPrior {
    pub components: Vec<GaussianComponent>,
    pub grasp_type: GraspType,
}

impl GraspPrior {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Factorized components for repeated evaluation during inference.
    pub fn prepared(&self) -> Vec<(f64, PreparedGaussian)> {
        self.components
            .iter()
            .map(|c| (c.weight.max(1e-300).ln(), c.prepared()))
            .collect()
    }
}

/// Mixture log density `log sum_k pi_k N(theta | mu_k, Sigma_k)`, evaluated
/// through log-sum-exp so components as small as e^-700 still contribute.
pub fn prior_log_density(prior: &GraspPrior, config: &GraspConfiguration) -> f64 {
    let theta = config.to_vector();
    let prepared = prior.prepared();
    log_mixture_density(&prepared, &theta)
}

pub(crate) fn log_mixture_density(
    prepared: &[(f64, PreparedGaussian)],
    theta: &DVector<f64>,
) -> f64 {
    let logs: Vec<f64> = prepared
        .iter()
        .map(|(log_pi, g)| log_pi + g.log_density(theta))
        .collect();
    log_sum_exp(&logs)
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// EM fit diagnostics for one prior.
#[derive(Debug, Clone)]
pub struct EmDiagnostics {
    /// Final log-likelihood of the winning restart.
    pub log_likelihood: f64,
    /// Per-iteration log-likelihood of the winning restart.
    pub ll_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    /// True when the eigenvalue floor clamped any covariance during the fit.
    /// Monotonicity then holds only to the conditioning limit.
    pub covariance_floor_hit: bool,
}

/// Fit the configuration prior of one grasp type.
///
/// By default only successful samples feed the prior, so it encodes
/// preferred configurations; `PriorLabelFilter::All` reproduces the
/// unfiltered variant. Samples are ordered by id before fitting and the EM
/// seed derives from the type name, making the fit independent of dataset
/// order and of which other types are present.
pub fn fit_prior(
    dataset: &GraspDataset,
    grasp_type: &GraspType,
    config: &ModelConfig,
) -> Result<(GraspPrior, EmDiagnostics), ModelError> {
    let mut rows: Vec<&super::TrainingSample> = dataset
        .samples_of_type(grasp_type.index)
        .filter(|s| match config.prior_label_filter {
            PriorLabelFilter::SuccessesOnly => s.label,
            PriorLabelFilter::All => true,
        })
        .collect();
    rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let k = config.gmm_components;
    if rows.len() < k {
        return Err(ModelError::InsufficientData {
            type_name: grasp_type.name.clone(),
            needed: k,
            got: rows.len(),
        });
    }
    let points: Vec<DVector<f64>> = rows.iter().map(|s| s.config.to_vector()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(stable_type_seed(config.seed, &grasp_type.name));
    let (components, diagnostics) = fit_gmm(
        &points,
        k,
        config.em_restarts,
        config.em_max_iterations,
        config.em_tolerance,
        config.covariance_floor,
        &mut rng,
    );
    Ok((
        GraspPrior {
            components,
            grasp_type: grasp_type.clone(),
        },
        diagnostics,
    ))
}

/// Fit a Gaussian mixture by EM with k-means++ seeding, keeping the best
/// log-likelihood over `restarts` runs.
pub fn fit_gmm(
    points: &[DVector<f64>],
    k: usize,
    restarts: usize,
    max_iterations: usize,
    tolerance: f64,
    covariance_floor: f64,
    rng: &mut impl Rng,
) -> (Vec<GaussianComponent>, EmDiagnostics) {
    assert!(k >= 1 && points.len() >= k);
    let restarts = restarts.max(1);
    let mut best: Option<(Vec<GaussianComponent>, EmDiagnostics)> = None;
    for _ in 0..restarts {
        let (components, mut diag) =
            em_single_run(points, k, max_iterations, tolerance, covariance_floor, rng);
        diag.restarts = restarts;
        let better = match &best {
            None => true,
            Some((_, b)) => diag.log_likelihood > b.log_likelihood,
        };
        if better {
            best = Some((components, diag));
        }
    }
    best.expect("at least one restart")
}

fn em_single_run(
    points: &[DVector<f64>],
    k: usize,
    max_iterations: usize,
    tolerance: f64,
    floor: f64,
    rng: &mut impl Rng,
) -> (Vec<GaussianComponent>, EmDiagnostics) {
    let n = points.len();
    let d = points[0].len();

    // Global covariance seeds every component's shape.
    let global_mean = mean_of(points);
    let (global_cov, mut floor_hit) =
        floor_covariance(&scatter(points, &global_mean, None, n as f64), floor);

    let mut components: Vec<GaussianComponent> = kmeans_pp_means(points, k, rng)
        .into_iter()
        .map(|mean| GaussianComponent {
            weight: 1.0 / k as f64,
            mean,
            covariance: global_cov.clone(),
        })
        .collect();

    let mut ll_trace: Vec<f64> = Vec::new();
    let mut responsibilities = DMatrix::zeros(n, k);
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iterations {
        iterations += 1;
        // E-step.
        let prepared: Vec<(f64, PreparedGaussian)> = components
            .iter()
            .map(|c| (c.weight.max(1e-300).ln(), c.prepared()))
            .collect();
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            let logs: Vec<f64> = prepared
                .iter()
                .map(|(log_pi, g)| log_pi + g.log_density(x))
                .collect();
            let lse = log_sum_exp(&logs);
            ll += lse;
            for (j, &lr) in logs.iter().enumerate() {
                responsibilities[(i, j)] = (lr - lse).exp();
            }
        }
        let improved = match ll_trace.last() {
            Some(&prev) => ll - prev,
            None => f64::INFINITY,
        };
        ll_trace.push(ll);
        if improved.abs() < tolerance {
            converged = true;
            break;
        }

        // M-step.
        for j in 0..k {
            let nk: f64 = (0..n).map(|i| responsibilities[(i, j)]).sum::<f64>().max(1e-12);
            let mut mean = DVector::zeros(d);
            for (i, x) in points.iter().enumerate() {
                mean += x * responsibilities[(i, j)];
            }
            mean /= nk;
            let cov = scatter(points, &mean, Some((&responsibilities, j)), nk);
            let (covariance, clamped) = floor_covariance(&cov, floor);
            floor_hit |= clamped;
            if clamped {
                // Eigen-clamping is the exact constrained maximizer, but its
                // floating-point reconstruction error gets amplified by the
                // floored precision. Safeguard: keep the previous parameters
                // unless the clamped candidate improves this component's
                // M-step objective by more than the evaluation noise
                // (rejecting a sub-noise improvement never lowers the
                // likelihood; accepting one can).
                let q_new = neg_component_q(&covariance, &cov);
                let shift = &mean - &components[j].mean;
                let old_centered = &cov + &shift * shift.transpose();
                let q_old = neg_component_q(&components[j].covariance, &old_centered);
                let noise_margin = 1e-14 * d as f64 * (1.0 + cov.norm() / floor);
                if q_new > q_old - noise_margin {
                    components[j].weight = nk / n as f64;
                    continue;
                }
            }
            components[j] = GaussianComponent {
                weight: nk / n as f64,
                mean,
                covariance,
            };
        }
        // Keep the weights an exact distribution after the responsibility
        // floor.
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
    }

    let log_likelihood = ll_trace.last().copied().unwrap_or(f64::NEG_INFINITY);
    (
        components,
        EmDiagnostics {
            log_likelihood,
            ll_trace,
            iterations,
            converged,
            restarts: 1,
            covariance_floor_hit: floor_hit,
        },
    )
}

/// Per-component M-step objective up to constants: `ln det Sigma +
/// tr(Sigma^{-1} S)` for the responsibility-weighted scatter `S`. Smaller is
/// better.
fn neg_component_q(covariance: &DMatrix<f64>, scatter: &DMatrix<f64>) -> f64 {
    let chol = match nalgebra::Cholesky::new(covariance.clone()) {
        Some(c) => c,
        None => return f64::INFINITY,
    };
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let trace = chol.solve(scatter).trace();
    log_det + trace
}

fn mean_of(points: &[DVector<f64>]) -> DVector<f64> {
    let mut m = DVector::zeros(points[0].len());
    for p in points {
        m += p;
    }
    m / points.len() as f64
}

/// (Weighted) scatter matrix around `mean`, normalized by `denom`.
fn scatter(
    points: &[DVector<f64>],
    mean: &DVector<f64>,
    weights: Option<(&DMatrix<f64>, usize)>,
    denom: f64,
) -> DMatrix<f64> {
    let d = mean.len();
    let mut cov = DMatrix::zeros(d, d);
    for (i, p) in points.iter().enumerate() {
        let w = match weights {
            Some((r, j)) => r[(i, j)],
            None => 1.0,
        };
        if w == 0.0 {
            continue;
        }
        let diff = p - mean;
        cov.syger(w, &diff, &diff, 1.0);
    }
    cov /= denom;
    // syger fills the lower triangle; mirror it.
    for i in 0..d {
        for j in (i + 1)..d {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    cov
}

/// Clamp covariance eigenvalues at `floor`. This is the exact M-step
/// maximizer under the constraint `Sigma >= floor * I`, so EM monotonicity
/// survives the flooring. The matrix is returned untouched when the floor is
/// inactive; rebuilding from the eigendecomposition would perturb it at
/// rounding level.
pub(crate) fn floor_covariance(cov: &DMatrix<f64>, floor: f64) -> (DMatrix<f64>, bool) {
    let eig = cov.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return (cov.clone(), false);
    }
    let d = cov.nrows();
    let mut rebuilt = DMatrix::zeros(d, d);
    for idx in 0..d {
        let lambda = eig.eigenvalues[idx].max(floor);
        let v = eig.eigenvectors.column(idx);
        rebuilt.syger(lambda, &v, &v, 1.0);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            rebuilt[(i, j)] = rebuilt[(j, i)];
        }
    }
    (rebuilt, true)
}

/// k-means++ seeding: the first center is uniform, each next is sampled
/// proportionally to squared distance from the chosen set.
fn kmeans_pp_means(points: &[DVector<f64>], k: usize, rng: &mut impl Rng) -> Vec<DVector<f64>> {
    let n = points.len();
    let mut means: Vec<DVector<f64>> = vec![points[rng.random_range(0..n)].clone()];
    let mut dist_sq: Vec<f64> = points
        .iter()
        .map(|p| (p - &means[0]).norm_squared())
        .collect();
    while means.len() < k {
        let total: f64 = dist_sq.iter().sum();
        let next = if total <= 0.0 {
            points[rng.random_range(0..n)].clone()
        } else {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &dsq) in dist_sq.iter().enumerate() {
                target -= dsq;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            points[chosen].clone()
        };
        for (i, p) in points.iter().enumerate() {
            dist_sq[i] = dist_sq[i].min((p - &next).norm_squared());
        }
        means.push(next);
    }
    means
}
