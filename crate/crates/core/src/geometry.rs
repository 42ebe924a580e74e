//! Camera and scene data model: pinhole projection, line-of-sight
//! directions and the pose noise model.
//!
//! Conventions used throughout the crate:
//!
//! * `CameraPose::rotation` maps world vectors into the camera frame, so a
//!   world point `X` has camera coordinates `R (X - c)`.
//! * Homogeneous pixels are stored with third entry exactly `1`.
//! * A rotation perturbation by the angle vector `phi` produces
//!   `exp(-[phi x]) R` (attitude-error convention); the rotation Jacobian in
//!   [`crate::residual`] is consistent with this.

use nalgebra::{Matrix2, Matrix3, Rotation3, SymmetricEigen, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result, TriError};
use crate::scalar::Real;

/// Skew-symmetric cross-product matrix: `skew(a) * b == a.cross(&b)`.
#[inline]
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Rotation `exp(-[phi x]) * rotation`.
pub fn perturb_rotation<T: Real>(rotation: &Matrix3<T>, phi: &Vector3<T>) -> Matrix3<T> {
    Rotation3::new(-phi).into_inner() * rotation
}

/// Pinhole calibration matrix
///
/// ```text
/// [ fx  skew  cx ]
/// [  0   fy   cy ]
/// [  0    0    1 ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub skew: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, skew: T) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            skew,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square pixels, centered principal point and no skew.
    pub fn from_focal(focal: T) -> Result<Self> {
        Self::new(focal, focal, T::zero(), T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.skew]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("intrinsics", "non-finite entry"));
        }
        if self.fx <= T::zero() || self.fy <= T::zero() {
            return Err(invalid("intrinsics", "focal lengths must be positive"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<T> {
        let (z, o) = (T::zero(), T::one());
        Matrix3::new(
            self.fx, self.skew, self.cx, z, self.fy, self.cy, z, z, o,
        )
    }

    /// Closed-form inverse of [`Self::matrix`].
    pub fn inverse(&self) -> Matrix3<T> {
        let (z, o) = (T::zero(), T::one());
        let fxfy = self.fx * self.fy;
        Matrix3::new(
            o / self.fx,
            -self.skew / fxfy,
            (self.skew * self.cy - self.cx * self.fy) / fxfy,
            z,
            o / self.fy,
            -self.cy / self.fy,
            z,
            z,
            o,
        )
    }

    /// Value of entry `(row, col)` of the calibration matrix.
    pub fn entry(&self, row: usize, col: usize) -> Option<T> {
        match (row, col) {
            (0, 0) => Some(self.fx),
            (0, 1) => Some(self.skew),
            (0, 2) => Some(self.cx),
            (1, 1) => Some(self.fy),
            (1, 2) => Some(self.cy),
            _ => None,
        }
    }

    /// Copy with entry `(row, col)` replaced. Only the five free entries of
    /// the upper triangle are accepted.
    pub fn with_entry(&self, row: usize, col: usize, value: T) -> Result<Self> {
        let mut k = *self;
        match (row, col) {
            (0, 0) => k.fx = value,
            (0, 1) => k.skew = value,
            (0, 2) => k.cx = value,
            (1, 1) => k.fy = value,
            (1, 2) => k.cy = value,
            _ => return Err(TriError::FixedIntrinsicEntry { row, col }),
        }
        Ok(k)
    }
}

/// Extrinsics: world-to-camera rotation and camera center in world units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose<T: Real> {
    rotation: Matrix3<T>,
    center: Vector3<T>,
}

impl<T: Real> CameraPose<T> {
    /// Checks `R^T R = I` to 1e-10 and `det R = +1`.
    pub fn new(rotation: Matrix3<T>, center: Vector3<T>) -> Result<Self> {
        let tol = T::lit(1e-10).max(T::default_epsilon() * T::lit(64.0));
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if !(ortho <= tol) {
            return Err(invalid("rotation", "matrix is not orthonormal"));
        }
        if (rotation.determinant() - T::one()).abs() > tol {
            return Err(invalid("rotation", "determinant is not +1"));
        }
        if !center.iter().all(|v| v.is_finite()) {
            return Err(invalid("center", "non-finite entry"));
        }
        Ok(Self { rotation, center })
    }

    pub fn from_rotation(rotation: Rotation3<T>, center: Vector3<T>) -> Self {
        Self {
            rotation: rotation.into_inner(),
            center,
        }
    }

    /// Camera at `center` with its optical axis through `target`. The camera
    /// x axis is `up x z` so there is no roll about the optical axis.
    pub fn look_at(center: Vector3<T>, target: Vector3<T>, up: Vector3<T>) -> Result<Self> {
        let z = target - center;
        let dist = z.norm();
        if dist <= T::zero() {
            return Err(invalid("look_at", "target coincides with center"));
        }
        let z = z / dist;
        let x = up.cross(&z);
        let xn = x.norm();
        if xn <= T::lit(1e-12) {
            return Err(invalid("look_at", "up vector is parallel to the optical axis"));
        }
        let x = x / xn;
        let y = z.cross(&x);
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Ok(Self { rotation, center })
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    #[inline]
    pub fn center(&self) -> &Vector3<T> {
        &self.center
    }

    /// Camera-frame coordinates `R (X - c)`.
    #[inline]
    pub fn to_camera(&self, point: &Vector3<T>) -> Vector3<T> {
        self.rotation * (point - self.center)
    }

    pub fn with_center(&self, center: Vector3<T>) -> Self {
        Self {
            rotation: self.rotation,
            center,
        }
    }

    /// Copy with the rotation perturbed by the angle vector `phi`.
    pub fn perturbed(&self, phi: &Vector3<T>, dc: &Vector3<T>) -> Self {
        Self {
            rotation: perturb_rotation(&self.rotation, phi),
            center: self.center + dc,
        }
    }
}

fn check_psd3<T: Real>(m: &Matrix3<T>, what: &'static str) -> Result<()> {
    check_psd(m.as_slice(), 3, what, || {
        SymmetricEigen::new(*m).eigenvalues.min()
    })
}

fn check_psd2<T: Real>(m: &Matrix2<T>, what: &'static str) -> Result<()> {
    check_psd(m.as_slice(), 2, what, || {
        SymmetricEigen::new(*m).eigenvalues.min()
    })
}

fn check_psd<T: Real>(
    data: &[T],
    n: usize,
    what: &'static str,
    min_eig: impl FnOnce() -> T,
) -> Result<()> {
    if !data.iter().all(|v| v.is_finite()) {
        return Err(invalid(what, "non-finite entry"));
    }
    let scale = data.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let tol = T::lit(1e-12).max(T::default_epsilon() * T::lit(16.0)) * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            if (data[i * n + j] - data[j * n + i]).abs() > tol {
                return Err(invalid(what, "matrix is not symmetric"));
            }
        }
    }
    if min_eig() < -tol {
        return Err(invalid(what, "matrix is not positive semi-definite"));
    }
    Ok(())
}

/// Pose covariances: rotation angle-vector (rad^2) and center (world units^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseUncertainty<T: Real> {
    pub rot_cov: Matrix3<T>,
    pub center_cov: Matrix3<T>,
}

impl<T: Real> PoseUncertainty<T> {
    pub fn new(rot_cov: Matrix3<T>, center_cov: Matrix3<T>) -> Result<Self> {
        let u = Self {
            rot_cov,
            center_cov,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn zero() -> Self {
        Self {
            rot_cov: Matrix3::zeros(),
            center_cov: Matrix3::zeros(),
        }
    }

    /// `sigma_phi^2 I` and `sigma_c^2 I`.
    pub fn isotropic(sigma_phi: T, sigma_c: T) -> Self {
        Self {
            rot_cov: Matrix3::identity() * (sigma_phi * sigma_phi),
            center_cov: Matrix3::identity() * (sigma_c * sigma_c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_psd3(&self.rot_cov, "rotation covariance")?;
        check_psd3(&self.center_cov, "center covariance")
    }

    pub fn is_zero(&self) -> bool {
        self.rot_cov.iter().all(|v| *v == T::zero()) && self.center_cov.iter().all(|v| *v == T::zero())
    }
}

impl<T: Real> Default for PoseUncertainty<T> {
    fn default() -> Self {
        Self::zero()
    }
}

/// Independent per-entry variances of the calibration matrix (pixels^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicsVariance<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub skew: T,
}

impl<T: Real> IntrinsicsVariance<T> {
    /// `(row, col, variance)` for each free entry of K.
    pub fn entries(&self) -> [(usize, usize, T); 5] {
        [
            (0, 0, self.fx),
            (0, 1, self.skew),
            (0, 2, self.cx),
            (1, 1, self.fy),
            (1, 2, self.cy),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .entries()
            .iter()
            .all(|(_, _, v)| v.is_finite() && *v >= T::zero())
        {
            Ok(())
        } else {
            Err(invalid("intrinsics variance", "entries must be finite and >= 0"))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|(_, _, v)| *v == T::zero())
    }
}

impl<T: Real> Default for IntrinsicsVariance<T> {
    fn default() -> Self {
        let z = T::zero();
        Self {
            fx: z,
            fy: z,
            cx: z,
            cy: z,
            skew: z,
        }
    }
}

/// A pixel measurement with its 2x2 covariance (pixels^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T: Real> {
    pixel: Vector3<T>,
    pub cov2d: Matrix2<T>,
}

impl<T: Real> Observation<T> {
    pub fn new(px: T, py: T, cov2d: Matrix2<T>) -> Result<Self> {
        if !(px.is_finite() && py.is_finite()) {
            return Err(invalid("observation", "non-finite pixel"));
        }
        check_psd2(&cov2d, "pixel covariance")?;
        Ok(Self {
            pixel: Vector3::new(px, py, T::one()),
            cov2d,
        })
    }

    /// Measurement with isotropic noise `sigma^2 I`.
    pub fn isotropic(px: T, py: T, sigma: T) -> Self {
        Self {
            pixel: Vector3::new(px, py, T::one()),
            cov2d: Matrix2::identity() * (sigma * sigma),
        }
    }

    /// Pixel without an associated covariance.
    pub fn exact(px: T, py: T) -> Self {
        Self::isotropic(px, py, T::zero())
    }

    /// Homogeneous pixel `[px, py, 1]`.
    #[inline]
    pub fn pixel(&self) -> &Vector3<T> {
        &self.pixel
    }

    #[inline]
    pub fn xy(&self) -> Vector2<T> {
        self.pixel.xy()
    }

    pub fn with_cov(&self, cov2d: Matrix2<T>) -> Self {
        Self {
            pixel: self.pixel,
            cov2d,
        }
    }

    pub fn offset(&self, d: &Vector2<T>) -> Self {
        Self {
            pixel: Vector3::new(self.pixel.x + d.x, self.pixel.y + d.y, T::one()),
            cov2d: self.cov2d,
        }
    }
}

/// A calibrated camera together with what is known about its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View<T: Real> {
    pub intrinsics: CameraIntrinsics<T>,
    pub pose: CameraPose<T>,
    pub uncertainty: PoseUncertainty<T>,
    pub intrinsics_cov: Option<IntrinsicsVariance<T>>,
}

impl<T: Real> View<T> {
    pub fn new(intrinsics: CameraIntrinsics<T>, pose: CameraPose<T>) -> Self {
        Self {
            intrinsics,
            pose,
            uncertainty: PoseUncertainty::zero(),
            intrinsics_cov: None,
        }
    }

    pub fn with_uncertainty(mut self, uncertainty: PoseUncertainty<T>) -> Self {
        self.uncertainty = uncertainty;
        self
    }

    pub fn with_intrinsics_cov(mut self, cov: IntrinsicsVariance<T>) -> Self {
        self.intrinsics_cov = Some(cov);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        self.uncertainty.validate()?;
        if let Some(c) = &self.intrinsics_cov {
            c.validate()?;
        }
        Ok(())
    }

    /// Unnormalized line of sight `K^-1 x` in the camera frame.
    #[inline]
    pub fn back_project(&self, obs: &Observation<T>) -> Vector3<T> {
        self.intrinsics.inverse() * obs.pixel()
    }
}

/// Views of one 3D point: `(view index, measurement)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<T: Real> {
    pub point_id: usize,
    pub entries: Vec<(usize, Observation<T>)>,
}

impl<T: Real> Track<T> {
    pub fn new(point_id: usize, entries: Vec<(usize, Observation<T>)>) -> Self {
        Self { point_id, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks that view indices are in range and distinct.
    pub fn validate(&self, n_views: usize) -> Result<()> {
        if self.entries.is_empty() {
            return Err(invalid("track", "no observations"));
        }
        let mut seen = vec![false; n_views];
        for (v, _) in &self.entries {
            match seen.get_mut(*v) {
                None => {
                    return Err(invalid(
                        "track",
                        format!("view index {v} out of range ({n_views} views)"),
                    ))
                }
                Some(true) => return Err(invalid("track", format!("view {v} listed twice"))),
                Some(s) => *s = true,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene<T: Real> {
    pub views: Vec<View<T>>,
    /// Ground-truth points, indexed by `Track::point_id`, when known.
    pub points: Option<Vec<Vector3<T>>>,
    pub tracks: Vec<Track<T>>,
}

impl<T: Real> Scene<T> {
    pub fn validate(&self) -> Result<()> {
        for v in &self.views {
            v.validate()?;
        }
        for t in &self.tracks {
            t.validate(self.views.len())?;
        }
        Ok(())
    }
}

/// Pinhole projection of a world point; the returned observation has no
/// covariance attached.
pub fn project<T: Real>(point: &Vector3<T>, view: &View<T>) -> Result<Observation<T>> {
    let cam = view.pose.to_camera(point);
    if !(cam.z > T::zero()) {
        return Err(TriError::Cheirality {
            depth: cam.z.to_f64_lossy(),
        });
    }
    let p = view.intrinsics.matrix() * (cam / cam.z);
    Ok(Observation::exact(p.x, p.y))
}

/// Unit line of sight `K^-1 x / |K^-1 x|` in the camera frame.
pub fn los_direction<T: Real>(obs: &Observation<T>, view: &View<T>) -> Vector3<T> {
    view.back_project(obs).normalize()
}

/// Unit line of sight rotated into the world frame.
pub fn world_los<T: Real>(obs: &Observation<T>, view: &View<T>) -> Vector3<T> {
    view.pose.rotation().transpose() * los_direction(obs, view)
}

/// Matrix square root factor `L` with `L L^T = cov` for a PSD matrix.
fn psd_factor(cov: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*cov);
    let sq = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * Matrix3::from_diagonal(&sq)
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R, cov: &Matrix3<f64>) -> Vector3<f64> {
    let z = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    psd_factor(cov) * z
}

fn to_f64_mat<T: Real>(m: &Matrix3<T>) -> Matrix3<f64> {
    m.map(|v| v.to_f64_lossy())
}

/// Draws a perturbed copy of `view` from its pose uncertainty: the center
/// moves by `N(0, center_cov)` and the rotation becomes `exp(-[dphi x]) R`
/// with `dphi ~ N(0, rot_cov)`. Uncertainty and intrinsics are copied.
pub fn sample_noisy_view_with<T: Real, R: Rng + ?Sized>(view: &View<T>, rng: &mut R) -> View<T> {
    let u = &view.uncertainty;
    if u.is_zero() {
        return *view;
    }
    let dphi = gaussian3(rng, &to_f64_mat(&u.rot_cov)).map(T::lit);
    let dc = gaussian3(rng, &to_f64_mat(&u.center_cov)).map(T::lit);
    let mut out = *view;
    out.pose = view.pose.perturbed(&dphi, &dc);
    out
}

/// Seeded form of [`sample_noisy_view_with`]; equal seeds give identical views.
pub fn sample_noisy_view<T: Real>(view: &View<T>, rng_seed: u64) -> View<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_noisy_view_with(view, &mut rng)
}

/// Adds `N(0, cov2d)` noise to the pixel of `obs`.
pub fn sample_noisy_observation<T: Real, R: Rng + ?Sized>(
    obs: &Observation<T>,
    rng: &mut R,
) -> Observation<T> {
    let c = obs.cov2d.map(|v| v.to_f64_lossy());
    let eig = SymmetricEigen::new(c);
    let l = eig.eigenvectors * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let z = Vector2::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let d = (l * z).map(T::lit);
    obs.offset(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity_view() -> View<f64> {
        View::new(
            CameraIntrinsics::from_focal(1.0).unwrap(),
            CameraPose::new(Matrix3::identity(), Vector3::zeros()).unwrap(),
        )
    }

    /// Projection written directly from the homogeneous formula, without
    /// going through `project`.
    fn projection_oracle(x: &Vector3<f64>, view: &View<f64>) -> (f64, f64) {
        let k = view.intrinsics;
        let r = view.pose.rotation();
        let c = view.pose.center();
        let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
        let mut cam = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                cam[i] += r[(i, j)] * d[j];
            }
        }
        let (u, v) = (cam[0] / cam[2], cam[1] / cam[2]);
        (k.fx * u + k.skew * v + k.cx, k.fy * v + k.cy)
    }

    fn random_camera(seed: u64) -> View<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = Vector3::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-50.0..-10.0),
        );
        let aim = Vector3::new(2.0, 1.0, 0.0) + Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let pose = CameraPose::look_at(center, aim, Vector3::y()).unwrap();
        let k = CameraIntrinsics::new(
            800.0,
            rng.random_range(780.0..820.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-0.5..0.5),
        )
        .unwrap();
        View::new(k, pose)
    }

    #[test]
    fn projection_examples() {
        let v = identity_view();
        let p = project(&Vector3::new(0.0, 0.0, 1.0), &v).unwrap();
        assert_eq!(p.pixel(), &Vector3::new(0.0, 0.0, 1.0));
        let p = project(&Vector3::new(1.0, 1.0, 2.0), &v).unwrap();
        assert_eq!(p.pixel(), &Vector3::new(0.5, 0.5, 1.0));
    }

    #[test]
    fn projection_matches_oracle() {
        let x = Vector3::new(2.0, 1.0, 0.0);
        for seed in 0..20 {
            let v = random_camera(seed);
            let p = project(&x, &v).unwrap();
            let (u, w) = projection_oracle(&x, &v);
            assert_relative_eq!(p.pixel().x, u, max_relative = 1e-12, epsilon = 1e-9);
            assert_relative_eq!(p.pixel().y, w, max_relative = 1e-12, epsilon = 1e-9);
            assert_eq!(p.pixel().z, 1.0);
        }
    }

    #[test]
    fn projection_behind_camera_is_rejected() {
        let v = identity_view();
        let err = project(&Vector3::new(0.0, 0.0, -1.0), &v).unwrap_err();
        assert!(matches!(err, TriError::Cheirality { .. }));
        assert!(project(&Vector3::new(1.0, 0.0, 0.0), &v).is_err());
    }

    #[test]
    fn projection_is_invariant_along_the_ray() {
        let x = Vector3::new(2.0, 1.0, 0.0);
        for seed in 0..10 {
            let v = random_camera(seed);
            let c = v.pose.center();
            let far = c + (x - c) * 2.0;
            let a = project(&x, &v).unwrap();
            let b = project(&far, &v).unwrap();
            assert_relative_eq!(a.pixel(), b.pixel(), epsilon = 1e-12 * 1e3);
        }
    }

    #[test]
    fn intrinsics_inverse_is_exact() {
        for seed in 0..20 {
            let k = random_camera(seed).intrinsics;
            let id = k.matrix() * k.inverse();
            assert!((id - Matrix3::identity()).amax() < 1e-12);
            let m = k.matrix();
            assert_eq!(m[(1, 0)], 0.0);
            assert_eq!(m[(2, 0)], 0.0);
            assert_eq!(m[(2, 1)], 0.0);
            assert_eq!(m[(2, 2)], 1.0);
        }
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn los_examples() {
        let v = identity_view();
        let a = los_direction(&Observation::exact(0.0, 0.0), &v);
        assert_eq!(a, Vector3::new(0.0, 0.0, 1.0));

        let mut v = random_camera(3);
        v.intrinsics.cx = 321.5;
        v.intrinsics.cy = -17.25;
        let a = los_direction(&Observation::exact(321.5, -17.25), &v);
        assert_relative_eq!(a, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn los_matches_general_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20 {
            let v = random_camera(seed);
            let obs = Observation::exact(rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
            let kinv = v.intrinsics.matrix().try_inverse().unwrap();
            let oracle = (kinv * obs.pixel()).normalize();
            let a = los_direction(&obs, &v);
            assert_relative_eq!(a, oracle, epsilon = 1e-12);
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_and_los_round_trip() {
        let x = Vector3::new(2.0, 1.0, 0.0);
        for seed in 0..20 {
            let v = random_camera(seed);
            let a = los_direction(&project(&x, &v).unwrap(), &v);
            let d = v.pose.to_camera(&x).normalize();
            assert!(a.cross(&d).norm() < 1e-10);
            assert!(a.dot(&d) > 0.0);
        }
    }

    #[test]
    fn look_at_points_the_optical_axis() {
        let c = Vector3::new(0.0, -2.0, -6.0);
        let pose = CameraPose::look_at(c, Vector3::zeros(), Vector3::y()).unwrap();
        let cam = pose.to_camera(&Vector3::zeros());
        assert_relative_eq!(cam, Vector3::new(0.0, 0.0, 40f64.sqrt()), epsilon = 1e-12);
        assert!(CameraPose::new(*pose.rotation(), c).is_ok());
    }

    #[test]
    fn invalid_rotation_rejected() {
        let mut r = Matrix3::identity();
        r[(0, 0)] = 1.01;
        assert!(CameraPose::new(r, Vector3::zeros()).is_err());
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(CameraPose::new(reflect, Vector3::zeros()).is_err());
    }

    #[test]
    fn covariances_are_validated() {
        let mut bad = Matrix3::identity();
        bad[(0, 1)] = 0.5;
        assert!(PoseUncertainty::new(bad, Matrix3::zeros()).is_err());
        assert!(PoseUncertainty::<f64>::new(-Matrix3::identity(), Matrix3::zeros()).is_err());
        assert!(Observation::new(1.0, 2.0, Matrix2::new(1.0, 2.0, 2.0, 1.0)).is_err());
        assert!(Observation::new(1.0, 2.0, Matrix2::new(2.0, 1.0, 1.0, 2.0)).is_ok());
    }

    #[test]
    fn tracks_are_validated() {
        let o = Observation::exact(0.0, 0.0);
        assert!(Track::new(0, vec![(0, o), (1, o)]).validate(2).is_ok());
        assert!(Track::new(0, vec![(0, o), (0, o)]).validate(2).is_err());
        assert!(Track::new(0, vec![(0, o), (2, o)]).validate(2).is_err());
        assert!(Track::<f64>::new(0, vec![]).validate(2).is_err());
    }

    #[test]
    fn zero_uncertainty_sample_is_identity() {
        let v = random_camera(1);
        assert_eq!(sample_noisy_view(&v, 99), v);
    }

    #[test]
    fn sampling_is_deterministic() {
        let v = random_camera(1).with_uncertainty(PoseUncertainty::isotropic(0.01, 0.1));
        let a = sample_noisy_view(&v, 5);
        let b = sample_noisy_view(&v, 5);
        assert_eq!(a, b);
        assert_ne!(a, sample_noisy_view(&v, 6));
    }

    #[test]
    fn sampled_rotation_stays_orthonormal() {
        let v = random_camera(2).with_uncertainty(PoseUncertainty::isotropic(0.2, 0.0));
        for seed in 0..200 {
            let s = sample_noisy_view(&v, seed);
            let r = s.pose.rotation();
            assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-10);
            assert!((r.determinant() - 1.0).abs() < 1e-10);
            assert_eq!(s.pose.center(), v.pose.center());
        }
    }

    #[test]
    fn center_noise_second_moment() {
        // E|dc|^2 = trace(sigma^2 I) = 3 sigma^2.
        let sigma = 0.3;
        let v = random_camera(4).with_uncertainty(PoseUncertainty::isotropic(0.0, sigma));
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let s = sample_noisy_view_with(&v, &mut rng);
            acc += (s.pose.center() - v.pose.center()).norm_squared();
        }
        let mean = acc / n as f64;
        let expected = 3.0 * sigma * sigma;
        assert!((mean - expected).abs() / expected < 0.02, "{mean} vs {expected}");
    }

    #[test]
    fn single_precision_projection() {
        let v: View<f32> = View::new(
            CameraIntrinsics::from_focal(1.0).unwrap(),
            CameraPose::new(Matrix3::identity(), Vector3::zeros()).unwrap(),
        );
        let p = project(&Vector3::new(1.0f32, 1.0, 2.0), &v).unwrap();
        assert_eq!(p.pixel(), &Vector3::new(0.5f32, 0.5, 1.0));
    }
}
