//! Iterative reference minimizers the closed-form solvers are compared to.
//!
//! These are deliberately plain: a reprojection-error Levenberg-Marquardt, a
//! Gauss-Newton on the Mahalanobis law-of-sines cost with covariances
//! re-evaluated at every iterate, and a Nelder-Mead simplex for cost
//! functions with no derivatives at hand.

use nalgebra::{Matrix2x3, Matrix3, Vector3};
use tri_core::{
    bootstrap_range, jac_point, project, residual, residual_covariance, sigma_from_observations,
    CovarianceOptions, Observation, Result, ScaleHint, Track64, TriError, View64,
};

const MAX_ITERS: usize = 100;

fn step_converged(dx: &Vector3<f64>, x: &Vector3<f64>) -> bool {
    dx.norm() <= 1e-13 * (1.0 + x.norm())
}

/// Weighted squared reprojection error `sum_j |pi_j(X) - x_j|^2 / sigma_j^2`.
pub fn reprojection_cost(track: &Track64, views: &[View64], x: &Vector3<f64>) -> f64 {
    let sigma = sigma_from_observations(track);
    track
        .entries
        .iter()
        .zip(&sigma)
        .map(|((j, obs), s)| match project(x, &views[*j]) {
            Ok(p) => (p.xy() - obs.xy()).norm_squared() / (s * s),
            Err(_) => f64::INFINITY,
        })
        .sum()
}

/// Pixel residual and its Jacobian with respect to the point.
fn reprojection_terms(obs: &Observation<f64>, view: &View64, x: &Vector3<f64>) -> Option<(nalgebra::Vector2<f64>, Matrix2x3<f64>)> {
    let r = view.pose.rotation();
    let cam = view.pose.to_camera(x);
    if !(cam.z > 0.0) {
        return None;
    }
    let k = &view.intrinsics;
    let (a, b) = (cam.x / cam.z, cam.y / cam.z);
    let pix = nalgebra::Vector2::new(k.fx * a + k.skew * b + k.cx, k.fy * b + k.cy);
    let dnorm = Matrix2x3::new(1.0, 0.0, -a, 0.0, 1.0, -b) / cam.z;
    let kk = nalgebra::Matrix2::new(k.fx, k.skew, 0.0, k.fy);
    Some((pix - obs.xy(), kk * dnorm * r))
}

/// Levenberg-Marquardt on [`reprojection_cost`] starting from `x0`.
pub fn refine_reprojection(track: &Track64, views: &[View64], x0: &Vector3<f64>) -> Result<Vector3<f64>> {
    let sigma = sigma_from_observations(track);
    let mut x = *x0;
    let mut cost = reprojection_cost(track, views, &x);
    if !cost.is_finite() {
        return Err(TriError::Cheirality { depth: f64::NAN });
    }
    let mut lambda = 1e-6;
    for _ in 0..MAX_ITERS {
        let mut h = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for ((j, obs), s) in track.entries.iter().zip(&sigma) {
            let (r, jac) = reprojection_terms(obs, &views[*j], &x).ok_or(TriError::Cheirality { depth: f64::NAN })?;
            let w = 1.0 / (s * s);
            h += jac.transpose() * jac * w;
            g += jac.transpose() * r * w;
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let damped = h + Matrix3::from_diagonal(&h.diagonal()) * lambda;
            let Some(dx) = damped.cholesky().map(|c| -c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = x + dx;
            let c = reprojection_cost(track, views, &trial);
            if c <= cost {
                let done = step_converged(&dx, &x) || cost - c <= 1e-15 * cost;
                x = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if done {
                    return Ok(x);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(x)
}

/// Gauss-Newton on `sum_j eps_j^T Sigma_j(X)^+ eps_j`, re-evaluating each
/// residual covariance at the current iterate.
pub fn refine_mahalanobis(
    track: &Track64,
    views: &[View64],
    x0: &Vector3<f64>,
    opts: &CovarianceOptions<f64>,
) -> Result<Vector3<f64>> {
    let mut x = *x0;
    for _ in 0..MAX_ITERS {
        let mut h = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for (j, obs) in &track.entries {
            let v = &views[*j];
            let p = residual_covariance(obs, v, ScaleHint::Point(x), None, opts)?.pseudo_inverse;
            let jac = jac_point(obs, v);
            h += jac.transpose() * p * jac;
            g += jac.transpose() * p * residual(obs, v, &x);
        }
        let dx = -h.cholesky().ok_or(TriError::RankDeficient)?.solve(&g);
        x += dx;
        if step_converged(&dx, &x) {
            break;
        }
    }
    Ok(x)
}

/// The Mahalanobis law-of-sines cost with every residual covariance frozen
/// at the law-of-sines range estimates, i.e. the objective LOSTU minimizes.
pub struct MahalanobisCost<'a> {
    terms: Vec<(&'a Observation<f64>, &'a View64, Matrix3<f64>)>,
}

impl<'a> MahalanobisCost<'a> {
    pub fn new(track: &'a Track64, views: &'a [View64], opts: &CovarianceOptions<f64>) -> Result<Self> {
        let terms = track
            .entries
            .iter()
            .enumerate()
            .map(|(e, (j, obs))| {
                let v = &views[*j];
                let rho = bootstrap_range(track, views, e)?;
                let p = residual_covariance(obs, v, ScaleHint::Range(rho), None, opts)?.pseudo_inverse;
                Ok((obs, v, p))
            })
            .collect::<Result<_>>()?;
        Ok(Self { terms })
    }

    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(obs, v, p)| {
                let e = residual(obs, v, x);
                e.dot(&(p * e))
            })
            .sum()
    }
}

/// Nelder-Mead simplex search in three dimensions. Stops when the simplex
/// collapses below `xtol` or after `max_evals` evaluations.
pub fn nelder_mead(
    f: impl Fn(&Vector3<f64>) -> f64,
    x0: &Vector3<f64>,
    step: f64,
    xtol: f64,
    max_evals: usize,
) -> (Vector3<f64>, f64) {
    let mut simplex: Vec<(Vector3<f64>, f64)> = (0..4)
        .map(|i| {
            let mut p = *x0;
            if i > 0 {
                p[i - 1] += step;
            }
            (p, f(&p))
        })
        .collect();
    let mut evals = 4;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = simplex[1..].iter().map(|(p, _)| (p - simplex[0].0).norm()).fold(0.0, f64::max);
        if size < xtol {
            break;
        }
        let centroid = (simplex[0].0 + simplex[1].0 + simplex[2].0) / 3.0;
        let worst = simplex[3];
        let at = |t: f64| centroid + (worst.0 - centroid) * t;
        let r = at(-1.0);
        let fr = f(&r);
        evals += 1;
        if fr < simplex[0].1 {
            let e = at(-2.0);
            let fe = f(&e);
            evals += 1;
            simplex[3] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (r, fr);
        } else {
            let (c, fc) = if fr < worst.1 {
                let c = at(-0.5);
                (c, f(&c))
            } else {
                let c = at(0.5);
                (c, f(&c))
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[3] = (c, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best + (s.0 - best) * 0.5;
                    s.1 = f(&s.0);
                }
                evals += 3;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}
