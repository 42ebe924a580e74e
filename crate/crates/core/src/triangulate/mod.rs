//! Point triangulation from calibrated views.
//!
//! All solvers here are closed form. The linear family shares one structure:
//! each view contributes `A_j = [K^-1 x]_x R_j` and the point solves a
//! weighted least-squares problem in `A_j (X - c_j)`. The solvers differ only
//! in the weights:
//!
//! | method   | weight per view                                   |
//! |----------|---------------------------------------------------|
//! | midpoint | `[a]_x^T [a]_x` on the unit line of sight         |
//! | DLT      | first two rows, unit weight                       |
//! | LOST     | first two rows, weight `q_j` from range and noise |
//! | LOSTU    | pseudo-inverse of the propagated residual covariance |
//!
//! [`hartley_sturm`] provides the two-view reprojection-optimal baseline.

mod hartley_sturm;
mod linear;

pub use hartley_sturm::{correct_correspondence, fundamental_matrix, triangulate_hs};
pub use linear::{
    bootstrap_range, lost_weights, point_covariance, sigma_from_observations, triangulate_dlt,
    triangulate_dlt_unit_los, triangulate_lost, triangulate_lostu, triangulate_midpoint, triangulate_weighted,
    LostWeights, LostuOptions,
};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{invalid, Result, TriError};
use crate::geometry::{Observation, Track, View};
use crate::residual::CovarianceOptions;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Midpoint,
    Dlt,
    Lost,
    Lostu,
    /// Hartley-Sturm two-view polynomial correction followed by DLT.
    Hs,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Midpoint, Method::Dlt, Method::Lost, Method::Lostu, Method::Hs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Midpoint => "midpoint",
            Method::Dlt => "dlt",
            Method::Lost => "lost",
            Method::Lostu => "lostu",
            Method::Hs => "hs",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = TriError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid("method", format!("unknown method '{s}'")))
    }
}

/// Output of a triangulation solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate<T: Real> {
    pub position: Vector3<T>,
    /// Gauss-Markov covariance; `None` when the solver was not asked for it
    /// or every uncertainty in the data is zero.
    pub covariance: Option<Matrix3<T>>,
    /// Value of the solver's own objective at `position`.
    pub residual_cost: T,
    pub method: Method,
}

/// Options for the [`triangulate`] dispatcher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulateOptions<T: Real> {
    pub lostu: LostuOptions<T>,
    /// Attach a covariance to solvers that do not produce one natively.
    pub with_covariance: bool,
}

impl<T: Real> Default for TriangulateOptions<T> {
    fn default() -> Self {
        Self {
            lostu: LostuOptions::default(),
            with_covariance: true,
        }
    }
}

/// Runs `method` on one track. LOST takes its per-view noise level from the
/// observation covariances.
pub fn triangulate<T: Real>(
    method: Method,
    track: &Track<T>,
    views: &[View<T>],
    opts: &TriangulateOptions<T>,
) -> Result<PointEstimate<T>> {
    let mut est = match method {
        Method::Midpoint => triangulate_midpoint(track, views)?,
        Method::Dlt => triangulate_dlt(track, views)?,
        Method::Lost => triangulate_lost(track, views, &sigma_from_observations(track))?,
        Method::Lostu => triangulate_lostu(track, views, &opts.lostu)?,
        Method::Hs => triangulate_hs(track, views)?,
    };
    if opts.with_covariance && est.covariance.is_none() {
        let cov_opts = CovarianceOptions {
            pinv: opts.lostu.covariance.pinv,
            ..CovarianceOptions::default()
        };
        est.covariance = match point_covariance(track, views, &est.position, &cov_opts) {
            Ok(c) => Some(c),
            Err(TriError::AllSourcesZero) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(est)
}

/// One measurement resolved against its view.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ray<'a, T: Real> {
    pub view: &'a View<T>,
    pub obs: &'a Observation<T>,
    /// `K^-1 x`, camera frame, unnormalized.
    pub los: Vector3<T>,
    /// Unit line of sight in the world frame.
    pub world_dir: Vector3<T>,
}

impl<T: Real> Ray<'_, T> {
    #[inline]
    pub fn center(&self) -> &Vector3<T> {
        self.view.pose.center()
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<T> {
        self.view.pose.rotation()
    }
}

pub(crate) fn rays<'a, T: Real>(track: &'a Track<T>, views: &'a [View<T>]) -> Result<Vec<Ray<'a, T>>> {
    track
        .entries
        .iter()
        .map(|(vid, obs)| {
            let view = views
                .get(*vid)
                .ok_or_else(|| invalid("track", format!("view index {vid} out of range")))?;
            let los = view.back_project(obs);
            let world_dir = view.pose.rotation().transpose() * los.normalize();
            Ok(Ray {
                view,
                obs,
                los,
                world_dir,
            })
        })
        .collect()
}

pub(crate) const MIN_PARALLAX: f64 = 1e-12;
pub(crate) const MAX_CONDITION: f64 = 1e12;

/// Rejects tracks with fewer than two views or whose rays are all parallel.
pub(crate) fn check_parallax<T: Real>(rays: &[Ray<'_, T>]) -> Result<()> {
    if rays.len() < 2 {
        return Err(invalid("track", format!("{} view(s); at least 2 required", rays.len())));
    }
    let first = rays[0].world_dir;
    let tol = T::lit(MIN_PARALLAX);
    if rays[1..].iter().all(|r| first.cross(&r.world_dir).norm() < tol) {
        return Err(TriError::DegenerateParallax);
    }
    Ok(())
}

/// Solves the symmetric 3x3 system `N x = b`, refusing ill-conditioned `N`.
pub(crate) fn solve_symmetric<T: Real>(n: &Matrix3<T>, b: &Vector3<T>, err: TriError) -> Result<Vector3<T>> {
    let eig = SymmetricEigen::new(*n);
    let lmax = eig.eigenvalues.amax();
    let lmin = eig.eigenvalues.min();
    if !(lmax > T::zero()) || !(lmin > lmax / T::lit(MAX_CONDITION)) {
        return Err(err);
    }
    let inv = eig.eigenvalues.map(|l| T::one() / l);
    let v = &eig.eigenvectors;
    Ok(v * Matrix3::from_diagonal(&inv) * (v.transpose() * b))
}

pub(crate) fn invert_symmetric<T: Real>(n: &Matrix3<T>) -> Result<Matrix3<T>> {
    let eig = SymmetricEigen::new(*n);
    let lmax = eig.eigenvalues.amax();
    let lmin = eig.eigenvalues.min();
    if !(lmax > T::zero()) || !(lmin > lmax / T::lit(MAX_CONDITION)) {
        return Err(TriError::RankDeficient);
    }
    let inv = eig.eigenvalues.map(|l| T::one() / l);
    let v = &eig.eigenvectors;
    let m = v * Matrix3::from_diagonal(&inv) * v.transpose();
    Ok((m + m.transpose()) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("LOSTU".parse::<Method>().is_ok());
        assert!("niter2".parse::<Method>().is_err());
    }
}
