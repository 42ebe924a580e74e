use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Vector3};
use tri_bench::cli::{run_bench, triangulate_scene, write_points_csv, BenchArgs, StudyKind};
use tri_bench::report::write_bench_csv;
use tri_bench::SceneFile;
use tri_core::{project, CameraIntrinsics, CameraPose, Method, PoseUncertainty, Scene64, Track64, View64};

fn tri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tri"))
        .args(args)
        .env_remove("TRI_BENCH_THREADS")
        .output()
        .expect("failed to launch tri")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two or three cameras around `point`, with noiseless measurements.
fn scene(n_views: usize, pose: PoseUncertainty<f64>) -> Scene64 {
    let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 0.0).unwrap();
    let centers = [Vector3::new(0.0, -2.0, -6.0), Vector3::new(0.0, 2.0, -2.0), Vector3::new(3.0, 0.0, -5.0)];
    let points = vec![Vector3::new(0.1, -0.2, 0.3), Vector3::new(-0.5, 0.4, 0.0)];
    let views: Vec<View64> = centers[..n_views]
        .iter()
        .map(|c| View64::new(k, CameraPose::look_at(*c, Vector3::zeros(), Vector3::y()).unwrap()).with_uncertainty(pose))
        .collect();
    let tracks = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let entries = views
                .iter()
                .enumerate()
                .map(|(j, v)| (j, project(x, v).unwrap().with_cov(Matrix2::identity() * 0.25)))
                .collect();
            Track64::new(i, entries)
        })
        .collect();
    Scene64 {
        views,
        points: Some(points),
        tracks,
    }
}

fn write_scene(dir: &Path, name: &str, scene: &Scene64) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, SceneFile::from_scene(scene).to_json().unwrap()).unwrap();
    path
}

fn read_points(path: &Path) -> Vec<(usize, Vector3<f64>)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let v = |i: usize| f[i].parse::<f64>().unwrap();
            (f[0].parse().unwrap(), Vector3::new(v(1), v(2), v(3)))
        })
        .collect()
}

#[test]
fn noiseless_scene_recovers_ground_truth_with_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let s = scene(2, PoseUncertainty::isotropic(1e-3, 1e-2));
    let path = write_scene(dir.path(), "scene.json", &s);
    for m in Method::ALL {
        let out = dir.path().join(format!("{m}.csv"));
        let o = tri(&["triangulate", "--scene", path_str(&path), "--method", m.name(), "--out", path_str(&out)]);
        assert!(o.status.success(), "{m}: {}", String::from_utf8_lossy(&o.stderr));
        let pts = read_points(&out);
        assert_eq!(pts.len(), 2);
        for (id, x) in pts {
            let truth = s.points.as_ref().unwrap()[id];
            assert!((x - truth).norm() < 1e-8, "{m}: {x} vs {truth}");
        }
    }
}

#[test]
fn lostu_without_pose_noise_matches_lost() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = scene(3, PoseUncertainty::zero());
    // Perturb the pixels so the comparison is not trivially at the truth.
    for (i, t) in s.tracks.iter_mut().enumerate() {
        for (j, (_, o)) in t.entries.iter_mut().enumerate() {
            *o = o.offset(&nalgebra::Vector2::new(0.3 * (i + j) as f64 - 0.4, 0.2 - 0.1 * j as f64));
        }
    }
    let path = write_scene(dir.path(), "scene.json", &s);
    let (a, b) = (dir.path().join("lost.csv"), dir.path().join("lostu.csv"));
    assert!(tri(&["triangulate", "--scene", path_str(&path), "--method", "lost", "--out", path_str(&a)]).status.success());
    assert!(tri(&["triangulate", "--scene", path_str(&path), "--method", "lostu", "--out", path_str(&b)]).status.success());
    for ((i, x), (j, y)) in read_points(&a).into_iter().zip(read_points(&b)) {
        assert_eq!(i, j);
        assert!((x - y).norm() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn malformed_scene_exits_with_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"views\": [").unwrap();
    let o = tri(&["triangulate", "--scene", path_str(&bad), "--method", "lost"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let unknown = dir.path().join("unknown.json");
    let text = SceneFile::from_scene(&scene(2, PoseUncertainty::zero())).to_json().unwrap();
    std::fs::write(&unknown, text.replacen("\"version\": 1", "\"version\": 1, \"frame\": \"ned\"", 1)).unwrap();
    assert_eq!(tri(&["triangulate", "--scene", path_str(&unknown), "--method", "lost"]).status.code(), Some(2));

    let good = write_scene(dir.path(), "good.json", &scene(2, PoseUncertainty::zero()));
    assert_eq!(tri(&["triangulate", "--scene", path_str(&good), "--method", "niter2"]).status.code(), Some(2));
}

#[test]
fn degenerate_tracks_are_reported_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    // Three views: every track fails for the two-view-only method.
    let path = write_scene(dir.path(), "three.json", &scene(3, PoseUncertainty::zero()));
    let out = dir.path().join("hs.csv");
    let o = tri(&["triangulate", "--scene", path_str(&path), "--method", "hs", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("track 0") && err.contains("track 1"), "{err}");
    assert!(read_points(&out).is_empty());

    // One good track, one with a single observation: exit 0, one row.
    let mut s = scene(2, PoseUncertainty::zero());
    s.tracks[1].entries.truncate(1);
    let path = write_scene(dir.path(), "partial.json", &s);
    let o = tri(&["triangulate", "--scene", path_str(&path), "--method", "dlt", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("track 1"));
    assert_eq!(read_points(&out).len(), 1);
}

#[test]
fn binary_output_equals_library_output() {
    let dir = tempfile::tempdir().unwrap();
    let s = scene(3, PoseUncertainty::isotropic(2e-3, 1e-2));
    let path = write_scene(dir.path(), "scene.json", &s);
    let out = dir.path().join("out.csv");
    let o = tri(&["triangulate", "--scene", path_str(&path), "--method", "lostu", "--diag-approx", "--out", path_str(&out)]);
    assert!(o.status.success());
    let parsed = SceneFile::load(&path).unwrap().to_scene().unwrap();
    let mut expected = Vec::new();
    write_points_csv(&mut expected, &triangulate_scene(&parsed, Method::Lostu, true).points).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), expected);

    let bench = dir.path().join("bench.csv");
    let o = tri(&["bench", "n-view", "--sweep", "m", "--grid", "3,6", "--trials", "20", "--seed", "4", "--out", path_str(&bench)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let args = BenchArgs {
        sweep: Some("m".into()),
        grid: Some("3,6".into()),
        trials: Some(20),
        seed: Some(4),
        ..Default::default()
    };
    let mut expected = Vec::new();
    write_bench_csv(&mut expected, &run_bench(StudyKind::NView, &args).unwrap()).unwrap();
    assert_eq!(std::fs::read(&bench).unwrap(), expected);
}

#[test]
fn bench_rejects_unknown_sweep_and_bad_config() {
    let o = tri(&["bench", "two-view", "--sweep", "focal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("focal"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"sigma_px\": 1.0, \"fov\": 60}").unwrap();
    assert_eq!(tri(&["bench", "two-view", "--config", path_str(&cfg)]).status.code(), Some(2));
    std::fs::write(&cfg, "{\"trials\": 0}").unwrap();
    assert_eq!(tri(&["bench", "n-view", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn bench_is_reproducible_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, j) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("r.json"));
    let args = |out: &Path| {
        vec![
            "bench".to_owned(),
            "two-view".into(),
            "--sweep".into(),
            "sigma_px".into(),
            "--seed".into(),
            "7".into(),
            "--trials".into(),
            "200".into(),
            "--out".into(),
            path_str(out).into(),
        ]
    };
    let run = |v: Vec<String>| tri(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run(args(&a)).status.success());
    let mut with_json = args(&b);
    with_json.extend(["--json".into(), path_str(&j).into()]);
    assert!(run(with_json).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 6);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 7);
    assert_eq!(json[0]["config"]["seed"], 7);
    assert_eq!(json[0]["baseline"], "hs");
}

#[test]
fn smoke_runs_are_fast() {
    for study in ["two-view", "n-view"] {
        let start = Instant::now();
        let o = tri(&["bench", study, "--trials", "10"]);
        assert!(o.status.success());
        assert!(start.elapsed() < Duration::from_secs(5), "{study}: {:?}", start.elapsed());
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("method,sweep_param"));
    }
}
