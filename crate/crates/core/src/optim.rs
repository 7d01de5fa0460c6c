//! Bound-constrained limited-memory quasi-Newton minimization.
//!
//! Implements projected L-BFGS over a box: the inverse-Hessian two-loop
//! recursion restricted to the free variables, a strong-Wolfe line search on
//! the feasible segment, and exact projection onto the bounds. Convergence is
//! declared on the projected-gradient norm, the box-constrained stationarity
//! measure `|| x - clamp(x - g) ||`.

use nalgebra::DVector;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("objective or gradient is non-finite at the initial point")]
    NonFiniteAtInit,
    #[error("bounds are inconsistent: lower > upper at coordinate {0}")]
    InvalidBounds(usize),
}

/// Solver knobs. Defaults: memory 10, strong-Wolfe constants (1e-4, 0.9).
#[derive(Debug, Clone)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the projected-gradient norm.
    pub gradient_tolerance: f64,
    pub armijo_c1: f64,
    pub wolfe_c2: f64,
    pub max_line_search_steps: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            armijo_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search_steps: 40,
        }
    }
}

/// Result of a bounded minimization run.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    /// Objective value at the start point and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub projected_gradient_norm: f64,
    /// True when the start point had to be projected into the bounds.
    pub init_projected: bool,
}

fn clamp_vec(x: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i].clamp(lower[i], upper[i]))
}

fn projected_gradient(
    x: &DVector<f64>,
    g: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i] - (x[i] - g[i]).clamp(lower[i], upper[i]))
}

/// Minimize `eval` (returning objective value and gradient) over the box
/// `[lower, upper]`, starting from `x0` projected into the box.
pub fn minimize_bounded<E>(
    eval: E,
    x0: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    config: &LbfgsConfig,
) -> Result<MinimizeOutcome, OptimError>
where
    E: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    for i in 0..n {
        if lower[i] > upper[i] {
            return Err(OptimError::InvalidBounds(i));
        }
    }

    let mut x = clamp_vec(x0, lower, upper);
    let init_projected = (&x - x0).norm() > 0.0;
    let (mut fx, mut gx) = eval(&x);
    if !fx.is_finite() || gx.iter().any(|v| !v.is_finite()) {
        return Err(OptimError::NonFiniteAtInit);
    }

    let mut trace = vec![fx];
    let mut s_store: VecDeque<DVector<f64>> = VecDeque::new();
    let mut y_store: VecDeque<DVector<f64>> = VecDeque::new();
    let mut gamma = 1.0f64; // initial inverse-Hessian scaling
    let mut converged = false;
    let mut pg_norm = projected_gradient(&x, &gx, lower, upper).norm();
    let mut iterations = 0usize;

    for _ in 0..config.max_iterations {
        pg_norm = projected_gradient(&x, &gx, lower, upper).norm();
        if pg_norm <= config.gradient_tolerance {
            converged = true;
            break;
        }

        // Variables pinned at a bound with the gradient pushing outward (or
        // bounds collapsed to a point) stay fixed this iteration.
        let fixed: Vec<bool> = (0..n)
            .map(|i| {
                (lower[i] == upper[i])
                    || (x[i] <= lower[i] && gx[i] > 0.0)
                    || (x[i] >= upper[i] && gx[i] < 0.0)
            })
            .collect();
        let masked_grad = DVector::from_fn(n, |i, _| if fixed[i] { 0.0 } else { gx[i] });

        let mut direction = two_loop_direction(&masked_grad, &s_store, &y_store, gamma);
        for i in 0..n {
            if fixed[i] {
                direction[i] = 0.0;
            } else if (x[i] <= lower[i] && direction[i] < 0.0)
                || (x[i] >= upper[i] && direction[i] > 0.0)
            {
                // Quasi-Newton direction points out of the box at an active
                // bound; drop that component.
                direction[i] = 0.0;
            }
        }
        let mut slope = direction.dot(&gx);
        if slope >= 0.0 || !slope.is_finite() {
            // Not a descent direction: restart from steepest descent.
            s_store.clear();
            y_store.clear();
            gamma = 1.0;
            direction = -&masked_grad;
            slope = direction.dot(&gx);
            if slope >= 0.0 {
                break; // no feasible descent left
            }
        }

        // Largest feasible step along the (already box-compatible) direction.
        let mut alpha_bound = 1e10f64;
        for i in 0..n {
            if direction[i] > 0.0 {
                alpha_bound = alpha_bound.min((upper[i] - x[i]) / direction[i]);
            } else if direction[i] < 0.0 {
                alpha_bound = alpha_bound.min((lower[i] - x[i]) / direction[i]);
            }
        }
        alpha_bound = alpha_bound.max(0.0);

        let search = wolfe_line_search(
            &eval,
            &x,
            &direction,
            fx,
            slope,
            alpha_bound,
            lower,
            upper,
            config,
        );
        let Some(step) = search else {
            // The line search could not find any decrease; treat the current
            // point as the answer.
            break;
        };

        let s = &step.x - &x;
        let y = &step.g - &gx;
        let sy = s.dot(&y);
        if sy > 1e-10 * s.norm() * y.norm() {
            s_store.push_back(s);
            y_store.push_back(y.clone());
            if s_store.len() > config.memory {
                s_store.pop_front();
                y_store.pop_front();
            }
            gamma = sy / y.dot(&y).max(1e-300);
        }

        x = step.x;
        fx = step.f;
        gx = step.g;
        trace.push(fx);
        iterations += 1;
        pg_norm = projected_gradient(&x, &gx, lower, upper).norm();
    }
    if !converged {
        converged = pg_norm <= config.gradient_tolerance;
    }

    Ok(MinimizeOutcome {
        x,
        value: fx,
        trace,
        iterations,
        converged,
        projected_gradient_norm: pg_norm,
        init_projected,
    })
}

/// Two-loop recursion for the L-BFGS inverse-Hessian product `-H g`.
fn two_loop_direction(
    grad: &DVector<f64>,
    s_store: &VecDeque<DVector<f64>>,
    y_store: &VecDeque<DVector<f64>>,
    gamma: f64,
) -> DVector<f64> {
    let m = s_store.len();
    let mut q = grad.clone();
    let mut alphas = vec![0.0f64; m];
    for i in (0..m).rev() {
        let rho = 1.0 / s_store[i].dot(&y_store[i]);
        alphas[i] = rho * s_store[i].dot(&q);
        q -= &y_store[i] * alphas[i];
    }
    q *= gamma;
    for i in 0..m {
        let rho = 1.0 / s_store[i].dot(&y_store[i]);
        let beta = rho * y_store[i].dot(&q);
        q += &s_store[i] * (alphas[i] - beta);
    }
    -q
}

struct StepPoint {
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
    #[allow(dead_code)]
    alpha: f64,
}

/// Strong-Wolfe line search on the feasible segment `[0, alpha_bound]`.
///
/// Follows the bracket-then-zoom scheme; if the curvature condition cannot
/// be met before the boundary, the boundary point is accepted as long as it
/// satisfies sufficient decrease.
#[allow(clippy::too_many_arguments)]
fn wolfe_line_search<E>(
    eval: &E,
    x: &DVector<f64>,
    direction: &DVector<f64>,
    f0: f64,
    slope0: f64,
    alpha_bound: f64,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    config: &LbfgsConfig,
) -> Option<StepPoint>
where
    E: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    if alpha_bound <= 0.0 {
        return None;
    }
    let c1 = config.armijo_c1;
    let c2 = config.wolfe_c2;
    let probe = |alpha: f64| -> StepPoint {
        let xt = clamp_vec(&(x + direction * alpha), lower, upper);
        let (f, g) = eval(&xt);
        StepPoint { x: xt, f, g, alpha }
    };

    let mut alpha_prev = 0.0f64;
    let mut f_prev = f0;
    let mut alpha = alpha_bound.min(1.0);
    let mut lo: Option<(f64, f64)> = None; // (alpha, f)
    let mut hi: Option<(f64, f64)> = None;

    for i in 0..config.max_line_search_steps {
        let pt = probe(alpha);
        if !pt.f.is_finite() {
            // Overstepped into a non-finite region; shrink hard.
            alpha *= 0.3;
            if alpha < 1e-20 {
                return None;
            }
            continue;
        }
        if pt.f > f0 + c1 * alpha * slope0 || (i > 0 && pt.f >= f_prev) {
            lo = Some((alpha_prev, f_prev));
            hi = Some((alpha, pt.f));
            break;
        }
        let slope = pt.g.dot(direction);
        if slope.abs() <= -c2 * slope0 {
            return Some(pt);
        }
        if slope >= 0.0 {
            lo = Some((alpha, pt.f));
            hi = Some((alpha_prev, f_prev));
            break;
        }
        if alpha >= alpha_bound {
            // Hit the box boundary while still descending: accept it.
            return Some(pt);
        }
        alpha_prev = alpha;
        f_prev = pt.f;
        alpha = (alpha * 2.0).min(alpha_bound);
    }

    let (mut alpha_lo, mut f_lo) = lo?;
    let (mut alpha_hi, mut _f_hi) = hi?;
    let mut best: Option<StepPoint> = None;
    for _ in 0..config.max_line_search_steps {
        let alpha_mid = 0.5 * (alpha_lo + alpha_hi);
        if (alpha_hi - alpha_lo).abs() < 1e-16 {
            break;
        }
        let pt = probe(alpha_mid);
        if !pt.f.is_finite() || pt.f > f0 + c1 * alpha_mid * slope0 || pt.f >= f_lo {
            alpha_hi = alpha_mid;
            _f_hi = pt.f;
        } else {
            let slope = pt.g.dot(direction);
            if slope.abs() <= -c2 * slope0 {
                return Some(pt);
            }
            if slope * (alpha_hi - alpha_lo) >= 0.0 {
                alpha_hi = alpha_lo;
            }
            alpha_lo = alpha_mid;
            f_lo = pt.f;
            best = Some(pt);
        }
    }
    // Curvature never satisfied inside the bracket; fall back to the best
    // sufficient-decrease point seen.
    if let Some(pt) = best {
        return Some(pt);
    }
    if alpha_lo > 0.0 {
        let pt = probe(alpha_lo);
        if pt.f < f0 {
            return Some(pt);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(center: DVector<f64>) -> impl Fn(&DVector<f64>) -> (f64, DVector<f64>) {
        move |x: &DVector<f64>| {
            let d = x - &center;
            (0.5 * d.norm_squared(), d)
        }
    }

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn unconstrained_quadratic_reaches_center() {
        let center = vec2(0.3, -0.7);
        let out = minimize_bounded(
            quadratic(center.clone()),
            &vec2(5.0, 5.0),
            &vec2(-10.0, -10.0),
            &vec2(10.0, 10.0),
            &LbfgsConfig::default(),
        )
        .unwrap();
        assert!(out.converged);
        assert!((out.x - center).norm() < 1e-5);
    }

    #[test]
    fn bound_excluding_optimum_lands_on_boundary() {
        let center = vec2(2.0, 0.0);
        let out = minimize_bounded(
            quadratic(center),
            &vec2(0.0, 0.0),
            &vec2(-1.0, -1.0),
            &vec2(1.0, 1.0),
            &LbfgsConfig::default(),
        )
        .unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12, "x0 = {}", out.x[0]);
        assert!(out.x[1].abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_within_box() {
        let rosenbrock = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec2(
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            );
            (f, g)
        };
        let cfg = LbfgsConfig {
            max_iterations: 500,
            ..LbfgsConfig::default()
        };
        for start in [vec2(-1.5, 2.0), vec2(0.0, 0.0), vec2(1.9, -1.9)] {
            let out = minimize_bounded(
                rosenbrock,
                &start,
                &vec2(-2.0, -2.0),
                &vec2(2.0, 2.0),
                &cfg,
            )
            .unwrap();
            assert!(out.converged, "start {start:?} did not converge");
            assert!((out.x[0] - 1.0).abs() < 1e-4);
            assert!((out.x[1] - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn trace_is_monotone_within_slack() {
        let rosenbrock = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec2(
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            );
            (f, g)
        };
        let out = minimize_bounded(
            rosenbrock,
            &vec2(-1.2, 1.0),
            &vec2(-2.0, -2.0),
            &vec2(2.0, 2.0),
            &LbfgsConfig {
                max_iterations: 500,
                ..LbfgsConfig::default()
            },
        )
        .unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        assert!(out.value <= out.trace[0]);
    }

    #[test]
    fn pinned_coordinates_never_move() {
        let center = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let lower = DVector::from_vec(vec![-5.0, 0.25, -5.0]);
        let upper = DVector::from_vec(vec![5.0, 0.25, 5.0]);
        let out = minimize_bounded(
            quadratic(center),
            &DVector::from_vec(vec![3.0, 3.0, -3.0]),
            &lower,
            &upper,
            &LbfgsConfig::default(),
        )
        .unwrap();
        assert_eq!(out.x[1], 0.25);
        assert!((out.x[0] - 1.0).abs() < 1e-5);
        assert!((out.x[2] - 1.0).abs() < 1e-5);
        assert!(out.init_projected);
    }

    #[test]
    fn non_finite_at_init_is_an_error() {
        let bad = |_: &DVector<f64>| (f64::NAN, DVector::from_vec(vec![0.0]));
        let r = minimize_bounded(
            bad,
            &DVector::from_vec(vec![0.0]),
            &DVector::from_vec(vec![-1.0]),
            &DVector::from_vec(vec![1.0]),
            &LbfgsConfig::default(),
        );
        assert!(matches!(r, Err(OptimError::NonFiniteAtInit)));
    }

    #[test]
    fn converges_without_iterating_when_already_optimal() {
        let center = vec2(0.0, 0.0);
        let out = minimize_bounded(
            quadratic(center),
            &vec2(0.0, 0.0),
            &vec2(-1.0, -1.0),
            &vec2(1.0, 1.0),
            &LbfgsConfig::default(),
        )
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }
}
