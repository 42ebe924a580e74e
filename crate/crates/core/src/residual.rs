//! Law-of-sines residual `eps = [K^-1 x]_x R (X - c)`, its Jacobians with
//! respect to every uncertain quantity, and first-order propagation of those
//! uncertainties into a residual covariance with a rank-aware pseudo-inverse.

use nalgebra::{Matrix3, Matrix3x2, SymmetricEigen, Vector3};

use crate::error::{Result, TriError};
use crate::geometry::{skew, Observation, View};
use crate::scalar::Real;

/// Boresight `k = [0, 0, 1]`.
pub fn boresight<T: Real>() -> Vector3<T> {
    Vector3::z()
}

/// Law-of-sines residual of a point against one measurement.
pub fn residual<T: Real>(obs: &Observation<T>, view: &View<T>, point: &Vector3<T>) -> Vector3<T> {
    view.back_project(obs).cross(&view.pose.to_camera(point))
}

/// Derivative of the residual with respect to the pixel `(px, py)`.
pub fn jac_pixel<T: Real>(view: &View<T>, point: &Vector3<T>) -> Matrix3x2<T> {
    jac_pixel_from_camera(view, &view.pose.to_camera(point))
}

fn jac_pixel_from_camera<T: Real>(view: &View<T>, cam: &Vector3<T>) -> Matrix3x2<T> {
    let full = -skew(cam) * view.intrinsics.inverse();
    full.fixed_columns::<2>(0).into_owned()
}

/// Derivative with respect to the camera center.
pub fn jac_center<T: Real>(obs: &Observation<T>, view: &View<T>) -> Matrix3<T> {
    -jac_point(obs, view)
}

/// Derivative with respect to the rotation angle vector (see
/// [`crate::geometry::perturb_rotation`] for the sign convention).
pub fn jac_rotation<T: Real>(obs: &Observation<T>, view: &View<T>, point: &Vector3<T>) -> Matrix3<T> {
    jac_rotation_from_camera(obs, view, &view.pose.to_camera(point))
}

fn jac_rotation_from_camera<T: Real>(obs: &Observation<T>, view: &View<T>, cam: &Vector3<T>) -> Matrix3<T> {
    skew(&view.back_project(obs)) * skew(cam)
}

/// Derivative with respect to the world point.
pub fn jac_point<T: Real>(obs: &Observation<T>, view: &View<T>) -> Matrix3<T> {
    skew(&view.back_project(obs)) * view.pose.rotation()
}

/// Derivative with respect to entry `(row, col)` of the calibration matrix.
/// Only `fx (0,0)`, `skew (0,1)`, `cx (0,2)`, `fy (1,1)` and `cy (1,2)` are
/// free parameters.
pub fn jac_intrinsic_entry<T: Real>(
    obs: &Observation<T>,
    view: &View<T>,
    point: &Vector3<T>,
    row: usize,
    col: usize,
) -> Result<Vector3<T>> {
    jac_intrinsic_from_camera(obs, view, &view.pose.to_camera(point), row, col)
}

fn jac_intrinsic_from_camera<T: Real>(
    obs: &Observation<T>,
    view: &View<T>,
    cam: &Vector3<T>,
    row: usize,
    col: usize,
) -> Result<Vector3<T>> {
    if view.intrinsics.entry(row, col).is_none() {
        return Err(TriError::FixedIntrinsicEntry { row, col });
    }
    // d(K^-1)/dK[l,m] = -K^-1 E_lm K^-1, so
    // J = -[cam]_x (-K^-1 E_lm K^-1) x = [cam]_x K^-1 e_l (K^-1 x)_m.
    let kinv = view.intrinsics.inverse();
    let u = kinv * obs.pixel();
    let dk = kinv.column(row) * u[col];
    Ok(cam.cross(&dk))
}

/// Which uncertainty sources contribute to a residual covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSources {
    pub pixel: bool,
    pub rotation: bool,
    pub center: bool,
    pub intrinsics: bool,
    /// 3D point uncertainty; only meaningful for resection.
    pub point: bool,
}

impl NoiseSources {
    /// Everything relevant to intersection: the point is the unknown, so its
    /// own uncertainty is excluded.
    pub const INTERSECTION: Self = Self {
        pixel: true,
        rotation: true,
        center: true,
        intrinsics: true,
        point: false,
    };

    /// Everything relevant to resection: the center is the unknown.
    pub const RESECTION: Self = Self {
        pixel: true,
        rotation: true,
        center: false,
        intrinsics: true,
        point: true,
    };

    pub const PIXEL_ONLY: Self = Self {
        pixel: true,
        rotation: false,
        center: false,
        intrinsics: false,
        point: false,
    };

    pub const CENTER_ONLY: Self = Self {
        pixel: false,
        rotation: false,
        center: true,
        intrinsics: false,
        point: false,
    };

    pub const NONE: Self = Self {
        pixel: false,
        rotation: false,
        center: false,
        intrinsics: false,
        point: false,
    };
}

impl Default for NoiseSources {
    fn default() -> Self {
        Self::INTERSECTION
    }
}

/// How the Jacobians that depend on `R (X - c)` obtain it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleHint<T: Real> {
    /// Evaluate at a point estimate.
    Point(Vector3<T>),
    /// Use `rho * a` with `a` the unit line of sight and `rho` a range.
    Range(T),
    None,
}

/// Pseudo-inversion policy for the residual covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PinvMode<T: Real> {
    /// Zero eigenvalues below `tau * lambda_max`.
    Threshold(T),
    /// Always zero the smallest eigenvalue, then apply the default threshold.
    StrictRank2,
}

impl<T: Real> Default for PinvMode<T> {
    fn default() -> Self {
        PinvMode::Threshold(T::rank_tolerance())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceOptions<T: Real> {
    pub sources: NoiseSources,
    pub pinv: PinvMode<T>,
    /// Keep only the diagonal of the covariance before inverting.
    pub diagonal_approx: bool,
}

impl<T: Real> Default for CovarianceOptions<T> {
    fn default() -> Self {
        Self {
            sources: NoiseSources::INTERSECTION,
            pinv: PinvMode::default(),
            diagonal_approx: false,
        }
    }
}

/// Residual covariance together with its pseudo-inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualCovariance<T: Real> {
    pub matrix: Matrix3<T>,
    pub pseudo_inverse: Matrix3<T>,
    pub rank: usize,
}

impl<T: Real> ResidualCovariance<T> {
    /// `eps^T Sigma^+ eps`.
    pub fn mahalanobis(&self, eps: &Vector3<T>) -> T {
        eps.dot(&(self.pseudo_inverse * eps))
    }
}

/// Symmetric pseudo-inverse via eigendecomposition.
pub fn pseudo_inverse<T: Real>(m: &Matrix3<T>, mode: PinvMode<T>) -> (Matrix3<T>, usize) {
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.amax();
    if lmax <= T::zero() {
        return (Matrix3::zeros(), 0);
    }
    let (tau, drop_smallest) = match mode {
        PinvMode::Threshold(t) => (t, false),
        PinvMode::StrictRank2 => (T::rank_tolerance(), true),
    };
    let smallest = eig.eigenvalues.imin();
    let mut inv = Vector3::zeros();
    let mut rank = 0;
    for i in 0..3 {
        let l = eig.eigenvalues[i];
        if (drop_smallest && i == smallest) || l <= tau * lmax {
            continue;
        }
        inv[i] = T::one() / l;
        rank += 1;
    }
    let v = &eig.eigenvectors;
    (v * Matrix3::from_diagonal(&inv) * v.transpose(), rank)
}

fn diagonal_pseudo_inverse<T: Real>(m: &Matrix3<T>) -> (Matrix3<T>, usize) {
    let d = m.diagonal();
    let dmax = d.amax();
    let tau = T::rank_tolerance() * dmax;
    let mut inv = Vector3::zeros();
    let mut rank = 0;
    for i in 0..3 {
        if dmax > T::zero() && d[i] > tau {
            inv[i] = T::one() / d[i];
            rank += 1;
        }
    }
    (Matrix3::from_diagonal(&inv), rank)
}

/// Covariance of the residual of `obs` induced by the enabled uncertainty
/// sources of `obs` and `view`, plus an optional 3D point covariance.
///
/// Pixel, rotation and intrinsics Jacobians depend on `R (X - c)`; they take
/// it from `hint` (either a point, or `rho * a` from a range). The center and
/// point Jacobians do not need it.
pub fn residual_covariance<T: Real>(
    obs: &Observation<T>,
    view: &View<T>,
    hint: ScaleHint<T>,
    point_cov: Option<&Matrix3<T>>,
    opts: &CovarianceOptions<T>,
) -> Result<ResidualCovariance<T>> {
    let src = opts.sources;
    let u = view.back_project(obs);
    let rot = view.pose.rotation();
    let unc = &view.uncertainty;
    let zero3 = |m: &Matrix3<T>| m.iter().all(|v| *v == T::zero());

    let pixel_on = src.pixel && obs.cov2d.iter().any(|v| *v != T::zero());
    let rot_on = src.rotation && !zero3(&unc.rot_cov);
    let intr_on = src.intrinsics && view.intrinsics_cov.is_some_and(|c| !c.is_zero());
    let center_on = src.center && !zero3(&unc.center_cov);
    let point_on = src.point && point_cov.is_some_and(|c| !zero3(c));

    let cam = if pixel_on || rot_on || intr_on {
        match hint {
            ScaleHint::Point(x) => Some(view.pose.to_camera(&x)),
            ScaleHint::Range(rho) => Some(u.normalize() * rho),
            ScaleHint::None => return Err(TriError::MissingScale),
        }
    } else {
        None
    };

    let mut sigma = Matrix3::zeros();
    if let Some(cam) = &cam {
        if pixel_on {
            let j = jac_pixel_from_camera(view, cam);
            sigma += j * obs.cov2d * j.transpose();
        }
        if rot_on {
            let j = jac_rotation_from_camera(obs, view, cam);
            sigma += j * unc.rot_cov * j.transpose();
        }
        if intr_on {
            let var = view.intrinsics_cov.unwrap_or_default();
            for (l, m, v) in var.entries() {
                if v > T::zero() {
                    let j = jac_intrinsic_from_camera(obs, view, cam, l, m)?;
                    sigma += j * j.transpose() * v;
                }
            }
        }
    }
    let ux = skew(&u);
    if center_on {
        // J_c = -[u]_x R; the sign cancels in J S J^T.
        let j = ux * rot;
        sigma += j * unc.center_cov * j.transpose();
    }
    if point_on {
        let j = ux * rot;
        sigma += j * point_cov.copied().unwrap_or_else(Matrix3::zeros) * j.transpose();
    }
    sigma = (sigma + sigma.transpose()) * T::lit(0.5);

    if sigma.iter().all(|v| *v == T::zero()) {
        return Err(TriError::AllSourcesZero);
    }
    let (pseudo_inverse, rank) = if opts.diagonal_approx {
        diagonal_pseudo_inverse(&sigma)
    } else {
        pseudo_inverse(&sigma, opts.pinv)
    };
    Ok(ResidualCovariance {
        matrix: sigma,
        pseudo_inverse,
        rank,
    })
}
