//! Non-iterative, uncertainty-aware triangulation.
//!
//! The crate triangulates points from calibrated views with a family of
//! closed-form solvers built on the law-of-sines residual
//! `[K^-1 x]_x R (X - c)`:
//!
//! * [`triangulate_midpoint`], [`triangulate_dlt`]: classical baselines.
//! * [`triangulate_lost`]: weighted DLT that is reprojection-optimal under
//!   isotropic pixel noise.
//! * [`triangulate_lostu`]: weights from the full propagated residual
//!   covariance (pixel, pose and intrinsics uncertainty).
//! * [`triangulate_hs`]: the two-view polynomial baseline.
//!
//! [`estimate_camera_center`] solves the dual resection problem. Everything
//! is generic over [`Real`] (`f32`/`f64`); the `*64` aliases below cover the
//! common double-precision case.
//!
//! ```
//! use nalgebra::Vector3;
//! use tri_core::{project, triangulate_lost, CameraIntrinsics, CameraPose, Observation, Track, View64};
//!
//! let k = CameraIntrinsics::from_focal(400.0).unwrap();
//! let views: Vec<View64> = [Vector3::new(0.0, -2.0, -6.0), Vector3::new(0.0, 2.0, -2.0)]
//!     .iter()
//!     .map(|c| View64::new(k, CameraPose::look_at(*c, Vector3::zeros(), Vector3::y()).unwrap()))
//!     .collect();
//! let point = Vector3::new(0.0, 0.0, 0.0);
//! let entries = views
//!     .iter()
//!     .enumerate()
//!     .map(|(j, v)| {
//!         let p = project(&point, v).unwrap();
//!         (j, Observation::isotropic(p.pixel().x, p.pixel().y, 1.0))
//!     })
//!     .collect();
//! let track = Track::new(0, entries);
//! let est = triangulate_lost(&track, &views, &[1.0, 1.0]).unwrap();
//! assert!((est.position - point).norm() < 1e-9);
//! ```

// `!(a < b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod resection;
pub mod residual;
pub mod scalar;
pub mod triangulate;

pub use error::{Result, TriError};
pub use geometry::{
    los_direction, project, sample_noisy_observation, sample_noisy_view, sample_noisy_view_with, skew,
    world_los, CameraIntrinsics, CameraPose, IntrinsicsVariance, Observation, PoseUncertainty, Scene, Track,
    View,
};
pub use resection::{default_resection_options, estimate_camera_center, CenterEstimate, ResectionPoint};
pub use residual::{
    jac_center, jac_intrinsic_entry, jac_pixel, jac_point, jac_rotation, pseudo_inverse, residual,
    residual_covariance, CovarianceOptions, NoiseSources, PinvMode, ResidualCovariance, ScaleHint,
};
pub use scalar::Real;
pub use triangulate::{
    bootstrap_range, correct_correspondence, fundamental_matrix, lost_weights, point_covariance,
    sigma_from_observations, triangulate, triangulate_dlt, triangulate_dlt_unit_los, triangulate_hs,
    triangulate_lost, triangulate_lostu, triangulate_midpoint, triangulate_weighted, LostWeights, LostuOptions, Method,
    PointEstimate, TriangulateOptions,
};

pub type View64 = View<f64>;
pub type View32 = View<f32>;
pub type Track64 = Track<f64>;
pub type Track32 = Track<f32>;
pub type Observation64 = Observation<f64>;
pub type Scene64 = Scene<f64>;
pub type PointEstimate64 = PointEstimate<f64>;
pub type Intrinsics64 = CameraIntrinsics<f64>;
pub type Pose64 = CameraPose<f64>;
pub type PoseUncertainty64 = PoseUncertainty<f64>;
