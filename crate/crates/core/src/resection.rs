//! Camera-center estimation from known 3D points with a known rotation.
//!
//! This is the mirror image of intersection: the same law-of-sines residual
//! is minimized, now over the center with the points held fixed. The center
//! Jacobian is left out of the residual covariance (the center is the
//! unknown) and the point Jacobian is included when point covariances are
//! supplied.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, TriError};
use crate::geometry::{skew, Observation, View};
use crate::residual::{residual_covariance, CovarianceOptions, NoiseSources, PinvMode, ScaleHint};
use crate::scalar::Real;
use crate::triangulate::{invert_symmetric, solve_symmetric, MIN_PARALLAX};

/// A known 3D point observed by the camera being resected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResectionPoint<T: Real> {
    pub position: Vector3<T>,
    pub covariance: Option<Matrix3<T>>,
    pub observation: Observation<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterEstimate<T: Real> {
    pub center: Vector3<T>,
    pub covariance: Matrix3<T>,
    pub residual_cost: T,
}

pub fn default_resection_options<T: Real>() -> CovarianceOptions<T> {
    CovarianceOptions {
        sources: NoiseSources::RESECTION,
        pinv: PinvMode::StrictRank2,
        diagonal_approx: false,
    }
}

/// Law-of-sines range from the camera to each point, pairing every point
/// with the one of largest parallax.
fn ranges<T: Real>(points: &[ResectionPoint<T>], dirs: &[Vector3<T>]) -> Result<Vec<T>> {
    (0..points.len())
        .map(|i| {
            let (sin, k) = dirs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(k, d)| (dirs[i].cross(d).norm(), k))
                .fold(None, |best: Option<(T, usize)>, (s, k)| match best {
                    Some((b, _)) if b >= s => best,
                    _ => Some((s, k)),
                })
                .ok_or(TriError::RankDeficient)?;
            if !(sin >= T::lit(MIN_PARALLAX)) {
                return Err(TriError::RankDeficient);
            }
            let chord = points[i].position - points[k].position;
            Ok(chord.cross(&dirs[k]).norm() / sin)
        })
        .collect()
}

/// Optimal camera center for `view` (its own center is ignored) given
/// observations of known points.
pub fn estimate_camera_center<T: Real>(
    view: &View<T>,
    points: &[ResectionPoint<T>],
    opts: &CovarianceOptions<T>,
) -> Result<CenterEstimate<T>> {
    if points.len() < 2 {
        return Err(TriError::RankDeficient);
    }
    let rot = view.pose.rotation();
    let los: Vec<Vector3<T>> = points.iter().map(|p| view.back_project(&p.observation)).collect();
    let dirs: Vec<Vector3<T>> = los.iter().map(|u| rot.transpose() * u.normalize()).collect();
    let rho = ranges(points, &dirs)?;

    let mut n = Matrix3::zeros();
    let mut b = Vector3::zeros();
    let mut blocks = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let cov = residual_covariance(
            &p.observation,
            view,
            ScaleHint::Range(rho[i]),
            p.covariance.as_ref(),
            opts,
        )?;
        let a = skew(&los[i]) * rot;
        let w = a.transpose() * cov.pseudo_inverse * a;
        n += w;
        b += w * p.position;
        blocks.push((a, cov.pseudo_inverse));
    }
    let center = solve_symmetric(&n, &b, TriError::RankDeficient)?;
    let residual_cost = points
        .iter()
        .zip(&blocks)
        .map(|(p, (a, pinv))| {
            let e = a * (p.position - center);
            e.dot(&(pinv * e))
        })
        .fold(T::zero(), |s, c| s + c);
    Ok(CenterEstimate {
        center,
        covariance: invert_symmetric(&n)?,
        residual_cost,
    })
}
