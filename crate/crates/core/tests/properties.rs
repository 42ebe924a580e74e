use nalgebra::{Matrix2, Rotation3, Vector2, Vector3};
use proptest::prelude::*;
use tri_core::{
    project, residual, triangulate, triangulate_lost, triangulate_lostu, world_los, CameraIntrinsics, CameraPose,
    LostuOptions, Method, Observation, PoseUncertainty, Track64, TriangulateOptions, View64,
};

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn intrinsics() -> impl Strategy<Value = CameraIntrinsics<f64>> {
    (200.0..1500.0, 0.8..1.2, -100.0..100.0, -100.0..100.0, -1.0..1.0)
        .prop_map(|(f, aspect, cx, cy, s)| CameraIntrinsics::new(f, f * aspect, cx, cy, s).unwrap())
}

/// Cameras at distance 5..40 from `point`, aimed near it.
fn rig(n: usize) -> impl Strategy<Value = (Vector3<f64>, Vec<View64>)> {
    let cam = (intrinsics(), vec3(1.0), 5.0..40.0, vec3(0.3), vec3(1.0));
    (vec3(3.0), prop::collection::vec(cam, n)).prop_filter_map("degenerate camera", |(point, cams)| {
        let views = cams
            .into_iter()
            .map(|(k, dir, dist, aim, up)| {
                let d = dir.try_normalize(1e-3)?;
                let pose = CameraPose::look_at(point + d * dist, point + aim, up).ok()?;
                Some(View64::new(k, pose))
            })
            .collect::<Option<Vec<_>>>()?;
        Some((point, views))
    })
}

fn observe(point: &Vector3<f64>, views: &[View64], noise: &[(f64, f64)], sigma: f64) -> Track64 {
    let entries = views
        .iter()
        .zip(noise)
        .enumerate()
        .map(|(j, (v, (dx, dy)))| {
            let o = project(point, v).unwrap().offset(&Vector2::new(*dx, *dy));
            (j, o.with_cov(Matrix2::identity() * (sigma * sigma)))
        })
        .collect();
    Track64::new(0, entries)
}

proptest! {
    #[test]
    fn projection_and_line_of_sight_agree((point, views) in rig(1)) {
        let v = &views[0];
        let obs = project(&point, v).unwrap();
        let dir = (point - v.pose.center()).normalize();
        prop_assert!((world_los(&obs, v) - dir).norm() < 1e-9);
        prop_assert!(residual(&obs, v, &point).norm() < 1e-9 * (point - v.pose.center()).norm());
    }

    #[test]
    fn every_method_is_exact_on_noiseless_data((point, views) in rig(2)) {
        let track = observe(&point, &views, &[(0.0, 0.0); 2], 1.0);
        for m in Method::ALL {
            let est = triangulate(m, &track, &views, &TriangulateOptions::default());
            // Nearly parallel rays may legitimately be refused.
            if let Ok(est) = est {
                prop_assert!((est.position - point).norm() < 1e-6 * (1.0 + point.norm()), "{} {}", m, est.position);
            }
        }
    }

    #[test]
    fn estimates_move_with_the_world_frame(
        (point, views) in rig(4),
        noise in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
        shift in vec3(50.0),
        axis in vec3(1.0),
    ) {
        // Rigidly moving every camera moves the estimate the same way.
        let rot = Rotation3::new(axis);
        let moved: Vec<View64> = views
            .iter()
            .map(|v| {
                let r = Rotation3::from_matrix_unchecked(*v.pose.rotation()) * rot.inverse();
                View64::new(v.intrinsics, CameraPose::from_rotation(r, rot * v.pose.center() + shift))
                    .with_uncertainty(PoseUncertainty::isotropic(1e-3, 1e-2))
            })
            .collect();
        let held: Vec<View64> = views.iter().map(|v| v.with_uncertainty(PoseUncertainty::isotropic(1e-3, 1e-2))).collect();
        let track = observe(&point, &views, &noise, 1.0);
        for m in [Method::Midpoint, Method::Dlt, Method::Lost, Method::Lostu] {
            let opts = TriangulateOptions { with_covariance: false, ..Default::default() };
            let a = triangulate(m, &track, &held, &opts).unwrap().position;
            let b = triangulate(m, &track, &moved, &opts).unwrap().position;
            prop_assert!((rot * a + shift - b).norm() < 1e-7 * (1.0 + b.norm()), "{}", m);
        }
    }

    #[test]
    fn pixel_only_lostu_equals_lost(
        (point, views) in rig(5),
        noise in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 5),
    ) {
        let views: Vec<View64> = views
            .into_iter()
            .map(|v| {
                let k = CameraIntrinsics::new(v.intrinsics.fx, v.intrinsics.fx, v.intrinsics.cx, v.intrinsics.cy, 0.0).unwrap();
                View64::new(k, v.pose)
            })
            .collect();
        let track = observe(&point, &views, &noise, 0.7);
        let lost = triangulate_lost(&track, &views, &[0.7; 5]).unwrap().position;
        let lostu = triangulate_lostu(&track, &views, &LostuOptions::default()).unwrap().position;
        prop_assert!((lost - lostu).norm() < 1e-8 * (1.0 + lost.norm()));
    }

    #[test]
    fn observation_rejects_indefinite_covariance(a in 0.1..5.0f64, b in 0.1..5.0f64) {
        let off = (a * b).sqrt() * 1.5;
        prop_assert!(Observation::new(0.0, 0.0, Matrix2::new(a, off, off, b)).is_err());
        prop_assert!(Observation::new(0.0, 0.0, Matrix2::new(a, 0.0, 0.0, b)).is_ok());
    }
}
