//! Synthetic scenes for the two-view and n-view studies.
//!
//! A trial keeps three copies of the cameras: the true ones that produced the
//! measurements, the believed ones an estimator sees (true pose perturbed by
//! the pose uncertainty it carries) and, for the robustness variant, the
//! believed ones with misreported covariances.

use nalgebra::{Matrix2, Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};
use tri_core::{
    project, sample_noisy_observation, sample_noisy_view_with, CameraIntrinsics, CameraPose, Observation,
    PoseUncertainty, Track64, View64,
};

use crate::error::{BenchError, Result};

/// Two cameras orbiting a point at the origin; camera 2 sits at `[0, 2, -2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoViewConfig {
    pub y1: f64,
    pub z1: f64,
    pub focal: f64,
    pub sigma_px: f64,
    /// Degrees.
    pub sigma_phi: f64,
    pub sigma_c: f64,
    /// Common multiplier on `sigma_phi` and `sigma_c`.
    pub pose_scale: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for TwoViewConfig {
    fn default() -> Self {
        Self {
            y1: -2.0,
            z1: -6.0,
            focal: 400.0,
            sigma_px: 1.0,
            sigma_phi: 0.5,
            sigma_c: 0.03,
            pose_scale: 1.0,
            trials: 5000,
            seed: 0,
        }
    }
}

pub const SECOND_CAMERA: [f64; 3] = [0.0, 2.0, -2.0];

impl TwoViewConfig {
    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        check_sigmas(&[
            ("sigma_px", self.sigma_px),
            ("sigma_phi", self.sigma_phi),
            ("sigma_c", self.sigma_c),
            ("pose_scale", self.pose_scale),
        ])?;
        check_positive("focal", self.focal)?;
        let c1 = Vector3::new(0.0, self.y1, self.z1);
        if !c1.iter().all(|v| v.is_finite()) || c1.norm() == 0.0 {
            return Err(BenchError::Config("camera 1 must not coincide with the point".into()));
        }
        if c1.normalize().cross(&Vector3::from(SECOND_CAMERA).normalize()).norm() < 1e-9 {
            return Err(BenchError::Config("camera 1 has no parallax with camera 2".into()));
        }
        Ok(())
    }

    pub fn uncertainty(&self) -> PoseUncertainty<f64> {
        PoseUncertainty::isotropic(
            self.sigma_phi.to_radians() * self.pose_scale,
            self.sigma_c * self.pose_scale,
        )
    }

    /// The noiseless cameras, pointing at the origin.
    pub fn nominal_views(&self) -> Result<Vec<View64>> {
        let k = CameraIntrinsics::from_focal(self.focal)?;
        let u = self.uncertainty();
        [Vector3::new(0.0, self.y1, self.z1), Vector3::from(SECOND_CAMERA)]
            .iter()
            .map(|c| {
                let pose = CameraPose::look_at(*c, Vector3::zeros(), Vector3::y())?;
                Ok(View64::new(k, pose).with_uncertainty(u))
            })
            .collect()
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Trial> {
        let truth = self.nominal_views()?;
        Trial::observe(truth, Vector3::zeros(), self.sigma_px, rng)
    }
}

/// Many cameras scattered in a box, all roughly looking down `+z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NViewConfig {
    pub point: [f64; 3],
    pub m: usize,
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
    /// Multiplier applied to the z bounds of the box.
    pub depth_scale: f64,
    /// Maximum pointing deviation from `+z`, degrees.
    pub jitter: f64,
    pub focal: f64,
    pub sigma_px: f64,
    /// Degrees.
    pub sigma_phi: f64,
    pub sigma_c: f64,
    /// Each camera's `sigma_phi` and `sigma_c` are scaled independently by a
    /// factor drawn uniformly from this range.
    pub scale_range: [f64; 2],
    pub trials: usize,
    pub seed: u64,
}

impl Default for NViewConfig {
    fn default() -> Self {
        Self {
            point: [2.0, 1.0, 0.0],
            m: 50,
            box_min: [-10.0, -10.0, -50.0],
            box_max: [10.0, 10.0, -10.0],
            depth_scale: 1.0,
            jitter: 2.0,
            focal: 800.0,
            sigma_px: 1.0,
            sigma_phi: 0.05,
            sigma_c: 0.02,
            scale_range: [0.5, 2.0],
            trials: 5000,
            seed: 0,
        }
    }
}

impl NViewConfig {
    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.m < 2 {
            return Err(BenchError::Config(format!("m = {}; at least 2 views required", self.m)));
        }
        if !(0..3).all(|i| self.box_min[i] <= self.box_max[i]) {
            return Err(BenchError::Config("camera box is empty".into()));
        }
        check_sigmas(&[
            ("sigma_px", self.sigma_px),
            ("sigma_phi", self.sigma_phi),
            ("sigma_c", self.sigma_c),
            ("jitter", self.jitter),
        ])?;
        check_positive("focal", self.focal)?;
        check_positive("depth_scale", self.depth_scale)?;
        let [lo, hi] = self.scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(BenchError::Config("scale_range must satisfy 0 < lo <= hi".into()));
        }
        // Every camera must see the point in front of it for any jitter.
        let z_far = self.box_max[2] * self.depth_scale;
        if !(z_far < self.point[2]) {
            return Err(BenchError::Config("camera box must lie entirely at z below the point".into()));
        }
        Ok(())
    }

    /// Draws a fresh set of cameras with their individual uncertainties.
    pub fn sample_views<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<View64>> {
        let k = CameraIntrinsics::from_focal(self.focal)?;
        let [lo, hi] = self.scale_range;
        let mut views = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let c = Vector3::from_fn(|i, _| {
                let s = if i == 2 { self.depth_scale } else { 1.0 };
                rng.random_range(self.box_min[i] * s..=self.box_max[i] * s)
            });
            let axis: [f64; 3] = UnitSphere.sample(rng);
            let angle = rng.random_range(0.0..=self.jitter.to_radians());
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
            let s_phi = rng.random_range(lo..=hi);
            let s_c = rng.random_range(lo..=hi);
            let u = PoseUncertainty::isotropic(self.sigma_phi.to_radians() * s_phi, self.sigma_c * s_c);
            views.push(View64::new(k, CameraPose::from_rotation(rot, c)).with_uncertainty(u));
        }
        Ok(views)
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Trial> {
        let truth = self.sample_views(rng)?;
        Trial::observe(truth, Vector3::from(self.point), self.sigma_px, rng)
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(BenchError::Config("trials must be at least 1".into()));
    }
    Ok(())
}

fn check_sigmas(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v >= 0.0 && v.is_finite()) {
            return Err(BenchError::Config(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(BenchError::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Misreports each covariance block by an independent factor in `[1/2, 2]`.
pub fn corrupt_covariances<R: Rng + ?Sized>(u: &PoseUncertainty<f64>, rng: &mut R) -> PoseUncertainty<f64> {
    let a = rng.random_range(0.5..=2.0);
    let b = rng.random_range(0.5..=2.0);
    PoseUncertainty {
        rot_cov: u.rot_cov * a,
        center_cov: u.center_cov * b,
    }
}

/// One Monte-Carlo draw.
#[derive(Debug, Clone)]
pub struct Trial {
    pub point: Vector3<f64>,
    pub truth: Vec<View64>,
    pub believed: Vec<View64>,
    /// `believed` with covariances passed through [`corrupt_covariances`].
    pub corrupted: Vec<View64>,
    pub track: Track64,
}

impl Trial {
    /// Perturbs the poses, projects `point` through the true cameras and adds
    /// pixel noise. The draw order is fixed so that a given RNG state always
    /// yields the same trial.
    pub fn observe<R: Rng + ?Sized>(truth: Vec<View64>, point: Vector3<f64>, sigma_px: f64, rng: &mut R) -> Result<Self> {
        let believed: Vec<View64> = truth.iter().map(|v| sample_noisy_view_with(v, rng)).collect();
        let corrupted = believed
            .iter()
            .map(|v| v.with_uncertainty(corrupt_covariances(&v.uncertainty, rng)))
            .collect();
        // With no noise anywhere the estimators still need some declared
        // uncertainty; any weighting is exact on noiseless data.
        let noiseless = sigma_px == 0.0 && truth.iter().all(|v| v.uncertainty.is_zero());
        let declared = if noiseless { Matrix2::identity() } else { Matrix2::identity() * (sigma_px * sigma_px) };
        let mut entries = Vec::with_capacity(truth.len());
        for (j, v) in truth.iter().enumerate() {
            let clean = project(&point, v)?.with_cov(Matrix2::identity() * (sigma_px * sigma_px));
            let noisy: Observation<f64> = sample_noisy_observation(&clean, rng);
            entries.push((j, noisy.with_cov(declared)));
        }
        Ok(Self {
            point,
            truth,
            believed,
            corrupted,
            track: Track64::new(0, entries),
        })
    }
}
