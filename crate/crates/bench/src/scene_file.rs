//! JSON scene files.
//!
//! Rotations are stored as unit quaternions `[w, x, y, z]` mapping world to
//! camera coordinates. Unknown fields are rejected so that a file written
//! for a different convention fails loudly instead of parsing.

use std::path::Path;

use nalgebra::{Matrix2, Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use tri_core::{
    CameraIntrinsics, CameraPose, IntrinsicsVariance, Observation, PoseUncertainty, Scene64, Track64, View64,
};

use crate::error::{BenchError, Result};

pub const SCENE_VERSION: u32 = 1;

/// Allowed deviation of a stored quaternion from unit norm.
pub const QUATERNION_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    pub views: Vec<ViewRecord>,
    pub tracks: Vec<TrackRecord>,
    /// Ground-truth points indexed by `point_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
    pub rotation: [f64; 4],
    pub center: [f64; 3],
    pub rot_cov: [[f64; 3]; 3],
    pub center_cov: [[f64; 3]; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics_var: Option<IntrinsicsVarRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntrinsicsVarRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackRecord {
    pub point_id: usize,
    pub observations: Vec<ObservationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationRecord {
    pub view_id: usize,
    pub px: f64,
    pub py: f64,
    pub cov2d: [[f64; 2]; 2],
}

fn mat3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn scene_err(context: String) -> impl FnOnce(tri_core::TriError) -> BenchError {
    move |e| BenchError::Scene(format!("{context}: {e}"))
}

impl ViewRecord {
    fn to_view(&self, index: usize) -> Result<View64> {
        let ctx = || format!("view {index}");
        let k = CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, self.skew).map_err(scene_err(ctx()))?;
        let [w, x, y, z] = self.rotation;
        let q = Quaternion::new(w, x, y, z);
        if !((q.norm() - 1.0).abs() <= QUATERNION_NORM_TOL) {
            return Err(BenchError::Scene(format!(
                "{}: rotation quaternion norm {} is not 1",
                ctx(),
                q.norm()
            )));
        }
        let rot = UnitQuaternion::from_quaternion(q).to_rotation_matrix();
        let pose = CameraPose::from_rotation(rot, Vector3::from(self.center));
        let u = PoseUncertainty::new(mat3(&self.rot_cov), mat3(&self.center_cov)).map_err(scene_err(ctx()))?;
        let mut view = View64::new(k, pose).with_uncertainty(u);
        if let Some(v) = self.intrinsics_var {
            let var = IntrinsicsVariance {
                fx: v.fx,
                fy: v.fy,
                cx: v.cx,
                cy: v.cy,
                skew: v.skew,
            };
            var.validate().map_err(scene_err(ctx()))?;
            view = view.with_intrinsics_cov(var);
        }
        Ok(view)
    }

    fn from_view(v: &View64) -> Self {
        let k = &v.intrinsics;
        let rot = Rotation3::from_matrix_unchecked(*v.pose.rotation());
        let q = UnitQuaternion::from_rotation_matrix(&rot);
        // q and -q are the same rotation; store the one with w >= 0.
        let q = if q.w < 0.0 { -q.into_inner() } else { q.into_inner() };
        Self {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            skew: k.skew,
            rotation: [q.w, q.i, q.j, q.k],
            center: (*v.pose.center()).into(),
            rot_cov: rows3(&v.uncertainty.rot_cov),
            center_cov: rows3(&v.uncertainty.center_cov),
            intrinsics_var: v.intrinsics_cov.map(|c| IntrinsicsVarRecord {
                fx: c.fx,
                fy: c.fy,
                cx: c.cx,
                cy: c.cy,
                skew: c.skew,
            }),
        }
    }
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text)?;
        if file.version != SCENE_VERSION {
            return Err(BenchError::Scene(format!(
                "unsupported version {} (expected {SCENE_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validated in-memory scene.
    pub fn to_scene(&self) -> Result<Scene64> {
        let views = self
            .views
            .iter()
            .enumerate()
            .map(|(i, v)| v.to_view(i))
            .collect::<Result<Vec<_>>>()?;
        let tracks = self
            .tracks
            .iter()
            .map(|t| {
                let entries = t
                    .observations
                    .iter()
                    .map(|o| {
                        let cov = Matrix2::new(o.cov2d[0][0], o.cov2d[0][1], o.cov2d[1][0], o.cov2d[1][1]);
                        let obs = Observation::new(o.px, o.py, cov)
                            .map_err(scene_err(format!("track {}, view {}", t.point_id, o.view_id)))?;
                        Ok((o.view_id, obs))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let track = Track64::new(t.point_id, entries);
                track.validate(views.len()).map_err(scene_err(format!("track {}", t.point_id)))?;
                Ok(track)
            })
            .collect::<Result<Vec<_>>>()?;
        let points = self.points.as_ref().map(|p| p.iter().map(|x| Vector3::from(*x)).collect::<Vec<_>>());
        if let Some(p) = &points {
            if let Some(t) = tracks.iter().find(|t| t.point_id >= p.len()) {
                return Err(BenchError::Scene(format!(
                    "track {} has no ground-truth point ({} given)",
                    t.point_id,
                    p.len()
                )));
            }
        }
        Ok(Scene64 { views, points, tracks })
    }

    pub fn from_scene(scene: &Scene64) -> Self {
        Self {
            version: SCENE_VERSION,
            views: scene.views.iter().map(ViewRecord::from_view).collect(),
            tracks: scene
                .tracks
                .iter()
                .map(|t| TrackRecord {
                    point_id: t.point_id,
                    observations: t
                        .entries
                        .iter()
                        .map(|(j, o)| ObservationRecord {
                            view_id: *j,
                            px: o.xy().x,
                            py: o.xy().y,
                            cov2d: [[o.cov2d[(0, 0)], o.cov2d[(0, 1)]], [o.cov2d[(1, 0)], o.cov2d[(1, 1)]]],
                        })
                        .collect(),
                })
                .collect(),
            points: scene.points.as_ref().map(|p| p.iter().map(|x| (*x).into()).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> &'static str {
        r#"{
          "version": 1,
          "views": [
            {"fx": 400, "fy": 400, "cx": 0, "cy": 0, "skew": 0,
             "rotation": [1, 0, 0, 0], "center": [0, 0, -5],
             "rot_cov": [[1e-6,0,0],[0,1e-6,0],[0,0,1e-6]],
             "center_cov": [[1e-4,0,0],[0,1e-4,0],[0,0,1e-4]]},
            {"fx": 400, "fy": 400, "cx": 0, "cy": 0, "skew": 0,
             "rotation": [0.9659258262890683, 0, 0.25881904510252074, 0], "center": [2.5, 0, -4.330127018922193],
             "rot_cov": [[0,0,0],[0,0,0],[0,0,0]],
             "center_cov": [[0,0,0],[0,0,0],[0,0,0]],
             "intrinsics_var": {"fx": 4.0}}
          ],
          "tracks": [
            {"point_id": 0, "observations": [
              {"view_id": 0, "px": 0, "py": 0, "cov2d": [[1,0],[0,1]]},
              {"view_id": 1, "px": 0, "py": 0, "cov2d": [[1,0],[0,1]]}]}
          ],
          "points": [[0, 0, 0]]
        }"#
    }

    #[test]
    fn parses_a_scene() {
        let scene = SceneFile::parse(sample()).unwrap().to_scene().unwrap();
        assert_eq!(scene.views.len(), 2);
        assert_eq!(scene.tracks[0].len(), 2);
        assert_eq!(scene.views[1].intrinsics_cov.unwrap().fx, 4.0);
        let p = tri_core::project(&Vector3::zeros(), &scene.views[1]).unwrap();
        assert!(p.xy().norm() < 1e-9);
    }

    #[test]
    fn round_trip_preserves_every_field() {
        let file = SceneFile::parse(sample()).unwrap();
        let back = SceneFile::from_scene(&file.to_scene().unwrap());
        for (a, b) in file.views.iter().zip(&back.views) {
            for (x, y) in a.rotation.iter().zip(&b.rotation) {
                assert!((x - y).abs() < 1e-15);
            }
            let strip = |v: &ViewRecord| ViewRecord { rotation: [0.0; 4], ..v.clone() };
            assert_eq!(strip(a), strip(b));
        }
        assert_eq!(file.tracks, back.tracks);
        assert_eq!(file.points, back.points);
        // Serializing twice is stable once the quaternion is canonical.
        let again = SceneFile::from_scene(&back.to_scene().unwrap());
        assert_eq!(back, again);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let extra = sample().replacen("\"version\": 1,", "\"version\": 1, \"units\": \"m\",", 1);
        assert!(matches!(SceneFile::parse(&extra), Err(BenchError::Json(_))));
        let v2 = sample().replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(SceneFile::parse(&v2), Err(BenchError::Scene(_))));
        let bad_q = sample().replacen("[1, 0, 0, 0]", "[1, 0.1, 0, 0]", 1);
        assert!(SceneFile::parse(&bad_q).unwrap().to_scene().is_err());
        let bad_cov = sample().replacen("[[1,0],[0,1]]", "[[1,2],[2,1]]", 1);
        assert!(SceneFile::parse(&bad_cov).unwrap().to_scene().is_err());
        let bad_view = sample().replacen("\"view_id\": 1", "\"view_id\": 5", 1);
        assert!(SceneFile::parse(&bad_view).unwrap().to_scene().is_err());
        assert!(SceneFile::parse("{").is_err());
    }
}
