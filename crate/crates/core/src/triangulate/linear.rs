use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{check_parallax, invert_symmetric, rays, solve_symmetric, Method, PointEstimate, Ray, MIN_PARALLAX};
use crate::error::{invalid, Result, TriError};
use crate::geometry::{skew, Track, View};
use crate::residual::{residual_covariance, CovarianceOptions, NoiseSources, PinvMode, ScaleHint};
use crate::scalar::Real;

/// Partners for the law-of-sines ranges: the first ray and the ray most
/// oblique to it. Pairing every ray with the better of these two keeps the
/// range bootstrap linear in the number of views.
#[derive(Debug, Clone, Copy)]
struct Anchors(usize, usize);

impl Anchors {
    fn new<T: Real>(rays: &[Ray<'_, T>]) -> Result<Self> {
        let w0 = &rays[0].world_dir;
        let (sin, k) = rays
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, r)| (w0.cross(&r.world_dir).norm(), k))
            .fold((T::zero(), 0), |best, cur| if cur.0 > best.0 { cur } else { best });
        if !(sin >= T::lit(MIN_PARALLAX)) {
            return Err(TriError::DegenerateParallax);
        }
        Ok(Anchors(0, k))
    }

    /// Range from camera `j` to the point, `|X - c_j|`.
    fn range<T: Real>(self, rays: &[Ray<'_, T>], j: usize) -> Result<T> {
        let rj = &rays[j];
        let sin_with = |k: usize| rj.world_dir.cross(&rays[k].world_dir).norm();
        let (sin, k) = [self.0, self.1]
            .into_iter()
            .filter(|&k| k != j)
            .map(|k| (sin_with(k), k))
            .fold((T::zero(), j), |best, cur| if cur.0 > best.0 { cur } else { best });
        if !(sin >= T::lit(MIN_PARALLAX)) {
            return Err(TriError::DegenerateParallax);
        }
        // X = c_j + rho_j w_j = c_k + rho_k w_k; crossing with w_k isolates rho_j.
        let base = rj.center() - rays[k].center();
        Ok(base.cross(&rays[k].world_dir).norm() / sin)
    }
}

/// Law-of-sines range estimate `|X - c_j|` for entry `entry` of `track`.
pub fn bootstrap_range<T: Real>(track: &Track<T>, views: &[View<T>], entry: usize) -> Result<T> {
    let rays = rays(track, views)?;
    if entry >= rays.len() {
        return Err(invalid("entry", format!("{entry} out of range for track of {}", rays.len())));
    }
    if rays.len() < 2 {
        return Err(invalid("track", "at least 2 views required"));
    }
    Anchors::new(&rays)?.range(&rays, entry)
}

/// Midpoint: minimizes the summed squared distances to the rays.
pub fn triangulate_midpoint<T: Real>(track: &Track<T>, views: &[View<T>]) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    let mut n = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for r in &rays {
        let w = &r.world_dir;
        let p = Matrix3::identity() - w * w.transpose();
        n += p;
        b += p * r.center();
    }
    let x = solve_symmetric(&n, &b, TriError::DegenerateParallax)?;
    let cost = rays
        .iter()
        .map(|r| {
            let d = x - r.center();
            (d - r.world_dir * r.world_dir.dot(&d)).norm_squared()
        })
        .fold(T::zero(), |a, c| a + c);
    Ok(PointEstimate {
        position: x,
        covariance: None,
        residual_cost: cost,
        method: Method::Midpoint,
    })
}

/// Weighted stacked system: rows `q_j S [K^-1 x]_x R_j`, right-hand side
/// `q_j S [K^-1 x]_x R_j c_j`, solved by Householder QR.
fn solve_stacked<T: Real>(rays: &[Ray<'_, T>], weight: impl Fn(usize) -> T) -> Result<(Vector3<T>, T)> {
    let m = 2 * rays.len();
    let mut a = DMatrix::zeros(m, 3);
    let mut rhs = DVector::zeros(m);
    for (j, r) in rays.iter().enumerate() {
        let q = weight(j);
        let rows = (skew(&r.los) * r.rotation()).fixed_rows::<2>(0) * q;
        let b = rows * r.center();
        a.fixed_view_mut::<2, 3>(2 * j, 0).copy_from(&rows);
        rhs[2 * j] = b[0];
        rhs[2 * j + 1] = b[1];
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let diag = r.diagonal().map(|v| v.abs());
    if !(diag.min() > diag.max() * T::lit(1e-12)) {
        return Err(TriError::RankDeficient);
    }
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let sol = r
        .solve_upper_triangular(&qtb.rows(0, 3).into_owned())
        .ok_or(TriError::RankDeficient)?;
    let x = Vector3::new(sol[0], sol[1], sol[2]);
    let cost = (a * DVector::from_column_slice(x.as_slice()) - rhs).norm_squared();
    Ok((x, cost))
}

/// Direct linear transform: the stacked system with unit weights.
pub fn triangulate_dlt<T: Real>(track: &Track<T>, views: &[View<T>]) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    let (x, cost) = solve_stacked(&rays, |_| T::one())?;
    Ok(PointEstimate {
        position: x,
        covariance: None,
        residual_cost: cost,
        method: Method::Dlt,
    })
}

/// DLT in normal-equation form with identity residual weights and every
/// line of sight normalized to unit length. Mathematically identical to the
/// midpoint solution.
pub fn triangulate_dlt_unit_los<T: Real>(track: &Track<T>, views: &[View<T>]) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    let mut n = Matrix3::zeros();
    let mut b = Vector3::zeros();
    let mut blocks = Vec::with_capacity(rays.len());
    for r in &rays {
        let a = skew(&r.los.normalize()) * r.rotation();
        let w = a.transpose() * a;
        n += w;
        b += w * r.center();
        blocks.push(a);
    }
    let x = solve_symmetric(&n, &b, TriError::RankDeficient)?;
    let cost = rays
        .iter()
        .zip(&blocks)
        .map(|(r, a)| (a * (x - r.center())).norm_squared())
        .fold(T::zero(), |s, c| s + c);
    Ok(PointEstimate {
        position: x,
        covariance: None,
        residual_cost: cost,
        method: Method::Dlt,
    })
}

/// Per-view weights `q_j = |K^-1 x| / (K^-1[0,0] sigma_j rho_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LostWeights<T: Real> {
    pub q: Vec<T>,
}

fn lost_weights_of<T: Real>(rays: &[Ray<'_, T>], sigma_px: &[T]) -> Result<LostWeights<T>> {
    if sigma_px.len() != rays.len() {
        return Err(invalid(
            "sigma_px",
            format!("{} values for a track of {} views", sigma_px.len(), rays.len()),
        ));
    }
    let anchors = Anchors::new(rays)?;
    let q = rays
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let sigma = sigma_px[j];
            if !(sigma > T::zero()) {
                return Err(invalid("sigma_px", "noise levels must be positive"));
            }
            let rho = anchors.range(rays, j)?;
            let kinv00 = T::one() / r.view.intrinsics.fx;
            Ok(r.los.norm() / (kinv00 * sigma * rho))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LostWeights { q })
}

pub fn lost_weights<T: Real>(track: &Track<T>, views: &[View<T>], sigma_px: &[T]) -> Result<LostWeights<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    lost_weights_of(&rays, sigma_px)
}

/// Isotropic pixel standard deviation of each entry, `sqrt(trace(cov) / 2)`.
/// A track without any pixel covariance gets unit values (only the ratios
/// matter to LOST).
pub fn sigma_from_observations<T: Real>(track: &Track<T>) -> Vec<T> {
    let s: Vec<T> = track
        .entries
        .iter()
        .map(|(_, o)| ((o.cov2d[(0, 0)] + o.cov2d[(1, 1)]) * T::lit(0.5)).sqrt())
        .collect();
    if s.iter().all(|v| *v == T::zero()) {
        vec![T::one(); s.len()]
    } else {
        s
    }
}

/// The stacked system with caller-supplied per-view weights `q`.
pub fn triangulate_weighted<T: Real>(track: &Track<T>, views: &[View<T>], q: &[T]) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    if q.len() != rays.len() {
        return Err(invalid("weights", format!("{} values for a track of {} views", q.len(), rays.len())));
    }
    let (x, cost) = solve_stacked(&rays, |j| q[j])?;
    Ok(PointEstimate {
        position: x,
        covariance: None,
        residual_cost: cost,
        method: Method::Lost,
    })
}

/// LOST: the stacked system weighted by [`lost_weights`].
pub fn triangulate_lost<T: Real>(track: &Track<T>, views: &[View<T>], sigma_px: &[T]) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    let w = lost_weights_of(&rays, sigma_px)?;
    let (x, cost) = solve_stacked(&rays, |j| w.q[j])?;
    Ok(PointEstimate {
        position: x,
        covariance: None,
        residual_cost: cost,
        method: Method::Lost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LostuOptions<T: Real> {
    pub covariance: CovarianceOptions<T>,
    /// Point at which to evaluate the residual covariances instead of the
    /// law-of-sines ranges (e.g. a DLT solution).
    pub prior: Option<Vector3<T>>,
    /// Re-assemble the covariances at the first solution and solve once more.
    pub reweight: bool,
}

impl<T: Real> Default for LostuOptions<T> {
    fn default() -> Self {
        Self {
            covariance: CovarianceOptions {
                sources: NoiseSources::INTERSECTION,
                pinv: PinvMode::StrictRank2,
                diagonal_approx: false,
            },
            prior: None,
            reweight: false,
        }
    }
}

fn needs_scale<T: Real>(r: &Ray<'_, T>, sources: &NoiseSources) -> bool {
    let u = &r.view.uncertainty;
    (sources.pixel && r.obs.cov2d.iter().any(|v| *v != T::zero()))
        || (sources.rotation && u.rot_cov.iter().any(|v| *v != T::zero()))
        || (sources.intrinsics && r.view.intrinsics_cov.is_some_and(|c| !c.is_zero()))
}

struct NormalSystem<T: Real> {
    n: Matrix3<T>,
    b: Vector3<T>,
    /// `A_j` and `Sigma_j^+` per view.
    blocks: Vec<(Matrix3<T>, Matrix3<T>)>,
}

fn assemble<T: Real>(
    rays: &[Ray<'_, T>],
    opts: &CovarianceOptions<T>,
    hint: impl Fn(usize) -> Result<ScaleHint<T>>,
) -> Result<NormalSystem<T>> {
    let mut n = Matrix3::zeros();
    let mut b = Vector3::zeros();
    let mut blocks = Vec::with_capacity(rays.len());
    for (j, r) in rays.iter().enumerate() {
        let h = if needs_scale(r, &opts.sources) {
            hint(j)?
        } else {
            ScaleHint::None
        };
        let cov = residual_covariance(r.obs, r.view, h, None, opts)?;
        let a = skew(&r.los) * r.rotation();
        let w = a.transpose() * cov.pseudo_inverse * a;
        n += w;
        b += w * r.center();
        blocks.push((a, cov.pseudo_inverse));
    }
    Ok(NormalSystem { n, b, blocks })
}

fn mahalanobis_cost<T: Real>(rays: &[Ray<'_, T>], sys: &NormalSystem<T>, x: &Vector3<T>) -> T {
    rays.iter()
        .zip(&sys.blocks)
        .map(|(r, (a, p))| {
            let e = a * (x - r.center());
            e.dot(&(p * e))
        })
        .fold(T::zero(), |s, c| s + c)
}

/// LOSTU: normal equations weighted by the pseudo-inverse of each view's
/// residual covariance. Without a prior the Jacobians that need the range
/// use the law-of-sines estimate.
pub fn triangulate_lostu<T: Real>(
    track: &Track<T>,
    views: &[View<T>],
    opts: &LostuOptions<T>,
) -> Result<PointEstimate<T>> {
    let rays = rays(track, views)?;
    check_parallax(&rays)?;
    let mut sys = match opts.prior {
        Some(p) => assemble(&rays, &opts.covariance, |_| Ok(ScaleHint::Point(p)))?,
        None => {
            let anchors = Anchors::new(&rays)?;
            assemble(&rays, &opts.covariance, |j| anchors.range(&rays, j).map(ScaleHint::Range))?
        }
    };
    let mut x = solve_symmetric(&sys.n, &sys.b, TriError::RankDeficient)?;
    if opts.reweight {
        sys = assemble(&rays, &opts.covariance, |_| Ok(ScaleHint::Point(x)))?;
        x = solve_symmetric(&sys.n, &sys.b, TriError::RankDeficient)?;
    }
    let cost = mahalanobis_cost(&rays, &sys, &x);
    Ok(PointEstimate {
        position: x,
        covariance: Some(invert_symmetric(&sys.n)?),
        residual_cost: cost,
        method: Method::Lostu,
    })
}

/// Covariance of a point estimate: inverse of the uncertainty-weighted normal
/// matrix with residual covariances evaluated at `point`.
pub fn point_covariance<T: Real>(
    track: &Track<T>,
    views: &[View<T>],
    point: &Vector3<T>,
    opts: &CovarianceOptions<T>,
) -> Result<Matrix3<T>> {
    let rays = rays(track, views)?;
    let sys = assemble(&rays, opts, |_| Ok(ScaleHint::Point(*point)))?;
    invert_symmetric(&sys.n)
}
