//! Two-view reprojection-optimal triangulation: the pair of measurements is
//! moved onto the epipolar constraint with the smallest total squared pixel
//! displacement by minimizing over the pencil of epipolar lines (a degree 6
//! polynomial), then intersected.

use nalgebra::{Matrix3, Vector2, Vector3};

use super::{linear::triangulate_dlt, rays, Method, PointEstimate};
use crate::error::{Result, TriError};
use crate::geometry::{skew, Observation, Track, View};
use crate::scalar::Real;

/// Fundamental matrix with `x2^T F x1 = 0` for pixels of the same point,
/// scaled to unit Frobenius norm.
pub fn fundamental_matrix<T: Real>(first: &View<T>, second: &View<T>) -> Result<Matrix3<T>> {
    let r1 = first.pose.rotation();
    let r2 = second.pose.rotation();
    let rel = r2 * r1.transpose();
    let t = r2 * (first.pose.center() - second.pose.center());
    if t.norm() <= T::zero() {
        return Err(TriError::DegenerateParallax);
    }
    let e = skew(&t) * rel;
    let f = second.intrinsics.inverse().transpose() * e * first.intrinsics.inverse();
    Ok(f / f.norm())
}

// Coefficients are stored lowest degree first.
fn poly_mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * *y;
        }
    }
    out
}

fn poly_add<T: Real>(a: &[T], b: &[T], scale_b: T) -> Vec<T> {
    let mut out = vec![T::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += *x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += *y * scale_b;
    }
    out
}

fn poly_eval<T: Real>(p: &[T], t: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, c| acc * t + *c)
}

fn poly_derivative<T: Real>(p: &[T]) -> Vec<T> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| *c * T::from_usize(i).unwrap())
        .collect()
}

/// Real roots of `p`. Between consecutive critical points (the real roots
/// of `p'`, found recursively) a polynomial is monotone, so each sign change
/// there brackets exactly one root, refined by bisection.
fn real_roots<T: Real>(p: &[T]) -> Vec<T> {
    let scale = p.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    if scale <= T::zero() {
        return vec![T::zero()];
    }
    let mut deg = p.len() - 1;
    while deg > 0 && p[deg].abs() <= scale * T::lit(1e-14) {
        deg -= 1;
    }
    let p = &p[..=deg];
    match deg {
        0 => return vec![],
        1 => return vec![-p[0] / p[1]],
        _ => {}
    }
    // Cauchy bound on the root magnitudes.
    let bound = T::one() + p[..deg].iter().fold(T::zero(), |m, c| m.max((*c / p[deg]).abs()));
    let mut knots = vec![-bound];
    let mut crit = real_roots(&poly_derivative(p));
    crit.retain(|t| t.abs() < bound);
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    knots.extend(crit);
    knots.push(bound);

    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (poly_eval(p, lo), poly_eval(p, hi));
        if flo == T::zero() {
            roots.push(lo);
            continue;
        }
        if fhi == T::zero() || (flo > T::zero()) == (fhi > T::zero()) {
            continue;
        }
        let rising = fhi > T::zero();
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if (poly_eval(p, mid) > T::zero()) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        roots.push((lo + hi) * T::lit(0.5));
    }
    if poly_eval(p, bound) == T::zero() {
        roots.push(bound);
    }
    roots
}

fn translation<T: Real>(x: T, y: T) -> Matrix3<T> {
    let (z, o) = (T::zero(), T::one());
    Matrix3::new(o, z, x, z, o, y, z, z, o)
}

/// Rotation taking `e` (with `e0^2 + e1^2 = 1`) to `[1, 0, e2]`.
fn epipole_rotation<T: Real>(e: &Vector3<T>) -> Matrix3<T> {
    let (z, o) = (T::zero(), T::one());
    Matrix3::new(e[0], e[1], z, -e[1], e[0], z, z, z, o)
}

fn normalized_epipole<T: Real>(m: &Matrix3<T>) -> Result<Vector3<T>> {
    // Right null vector of a rank-2 matrix.
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or(TriError::Internal("svd failed"))?;
    let i = svd.singular_values.imin();
    let e = v_t.row(i).transpose();
    let s = (e[0] * e[0] + e[1] * e[1]).sqrt();
    if s <= T::default_epsilon() * e.norm() {
        // The measurement coincides with the epipole.
        return Err(TriError::DegenerateParallax);
    }
    Ok(e / s)
}

/// Closest point to the origin on the line `(l0, l1, l2)`, homogeneous.
fn foot_of_line<T: Real>(l: &Vector3<T>) -> Vector3<T> {
    Vector3::new(-l[0] * l[2], -l[1] * l[2], l[0] * l[0] + l[1] * l[1])
}

/// Moves `x1`, `x2` to the closest pair (summed squared pixel distance)
/// satisfying `x2'^T F x1' = 0`.
pub fn correct_correspondence<T: Real>(f: &Matrix3<T>, x1: &Vector2<T>, x2: &Vector2<T>) -> Result<(Vector2<T>, Vector2<T>)> {
    let t1 = translation(x1.x, x1.y);
    let t2 = translation(x2.x, x2.y);
    let f0 = t2.transpose() * f * t1;
    let e1 = normalized_epipole(&f0)?;
    let e2 = normalized_epipole(&f0.transpose())?;
    let r1 = epipole_rotation(&e1);
    let r2 = epipole_rotation(&e2);
    let fr = r2 * f0 * r1.transpose();

    let (f1, f2) = (e1[2], e2[2]);
    let (a, b, c, d) = (fr[(1, 1)], fr[(1, 2)], fr[(2, 1)], fr[(2, 2)]);

    // g(t) = t ((a t + b)^2 + f2^2 (c t + d)^2)^2
    //        - (a d - b c) (1 + f1^2 t^2)^2 (a t + b) (c t + d)
    let p1 = [b, a];
    let p2 = [d, c];
    let q = poly_add(&poly_mul(&p1, &p1), &poly_mul(&p2, &p2), f2 * f2);
    let term1 = poly_mul(&[T::zero(), T::one()], &poly_mul(&q, &q));
    let w = [T::one(), T::zero(), f1 * f1];
    let term2 = poly_mul(&poly_mul(&w, &w), &poly_mul(&p1, &p2));
    let g = poly_add(&term1, &term2, -(a * d - b * c));

    let cost = |t: T| {
        let num2 = c * t + d;
        let den2 = (a * t + b).powi(2) + f2 * f2 * num2 * num2;
        let s1 = t * t / (T::one() + f1 * f1 * t * t);
        if den2 > T::zero() {
            s1 + num2 * num2 / den2
        } else {
            s1
        }
    };

    let mut best: Option<(T, T)> = None;
    for t in real_roots(&g) {
        if !t.is_finite() {
            continue;
        }
        let s = cost(t);
        if best.is_none_or(|(bs, _)| s < bs) {
            best = Some((s, t));
        }
    }
    // t -> infinity
    let denom_inf = a * a + f2 * f2 * c * c;
    let s_inf = if f1 != T::zero() && denom_inf > T::zero() {
        Some(T::one() / (f1 * f1) + c * c / denom_inf)
    } else {
        None
    };

    let (l1, l2) = match (best, s_inf) {
        (Some((s, t)), inf) if inf.is_none_or(|si| s <= si) => (
            Vector3::new(t * f1, T::one(), -t),
            Vector3::new(-f2 * (c * t + d), a * t + b, c * t + d),
        ),
        (_, Some(_)) => (Vector3::new(f1, T::zero(), -T::one()), Vector3::new(-f2 * c, a, c)),
        _ => return Err(TriError::Internal("no candidate epipolar line")),
    };

    let back = |t_inv: &Matrix3<T>, r: &Matrix3<T>, l: &Vector3<T>| -> Result<Vector2<T>> {
        let p = t_inv * r.transpose() * foot_of_line(l);
        if p.z == T::zero() {
            return Err(TriError::Internal("corrected point at infinity"));
        }
        Ok(Vector2::new(p.x / p.z, p.y / p.z))
    };
    Ok((back(&t1, &r1, &l1)?, back(&t2, &r2, &l2)?))
}

/// Hartley-Sturm triangulation of a two-view track. The reported cost is the
/// total squared pixel correction.
pub fn triangulate_hs<T: Real>(track: &Track<T>, views: &[View<T>]) -> Result<PointEstimate<T>> {
    if track.len() != 2 {
        return Err(TriError::TwoViewOnly(track.len()));
    }
    let rays = rays(track, views)?;
    super::check_parallax(&rays)?;
    let (v1, v2) = (rays[0].view, rays[1].view);
    let (o1, o2) = (rays[0].obs, rays[1].obs);
    let f = fundamental_matrix(v1, v2)?;
    let (x1, x2) = correct_correspondence(&f, &o1.xy(), &o2.xy())?;
    let corrected = Track::new(
        track.point_id,
        vec![
            (track.entries[0].0, Observation::new(x1.x, x1.y, o1.cov2d).unwrap_or(*o1)),
            (track.entries[1].0, Observation::new(x2.x, x2.y, o2.cov2d).unwrap_or(*o2)),
        ],
    );
    let est = triangulate_dlt(&corrected, views)?;
    let cost = (x1 - o1.xy()).norm_squared() + (x2 - o2.xy()).norm_squared();
    Ok(PointEstimate {
        position: est.position,
        covariance: None,
        residual_cost: cost,
        method: Method::Hs,
    })
}
