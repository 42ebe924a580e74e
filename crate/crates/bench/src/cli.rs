//! The `tri` command-line tool. Everything here is a thin layer over library
//! calls so it can be driven from tests without spawning a process.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tri_core::{triangulate, Method, PointEstimate64, Scene64, TriError, TriangulateOptions};

use crate::error::{BenchError, Result};
use crate::report::{num, write_bench_csv, write_bench_json};
use crate::scene_file::SceneFile;
use crate::scenario::{NViewConfig, TwoViewConfig};
use crate::study::{run_n_view_study, run_two_view_study, BenchReport, StudyOptions, Sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ALL_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tri", version, about = "Uncertainty-aware triangulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Triangulate every track of a scene file.
    Triangulate {
        #[arg(long)]
        scene: PathBuf,
        /// midpoint, dlt, lost, lostu or hs.
        #[arg(long)]
        method: String,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Approximate residual covariances by their diagonal.
        #[arg(long)]
        diag_approx: bool,
    },
    /// Run a Monte-Carlo study.
    Bench {
        #[arg(value_enum)]
        study: StudyKind,
        /// JSON configuration; missing fields take the nominal values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Parameter to sweep, e.g. sigma_px.
        #[arg(long)]
        sweep: Option<String>,
        /// Comma-separated sweep values (defaults to the built-in grid).
        #[arg(long, requires = "sweep")]
        grid: Option<String>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the trial count in the configuration.
        #[arg(long)]
        trials: Option<usize>,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full reports, configuration included, as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Measure mean runtimes.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    TwoView,
    NView,
}

/// Result of triangulating a scene: estimates in track order and the tracks
/// that failed.
#[derive(Debug, Clone, Default)]
pub struct SceneSolution {
    pub points: Vec<(usize, PointEstimate64)>,
    pub failures: Vec<(usize, TriError)>,
}

pub fn triangulate_scene(scene: &Scene64, method: Method, diag_approx: bool) -> SceneSolution {
    let mut opts = TriangulateOptions::default();
    opts.lostu.covariance.diagonal_approx = diag_approx;
    let mut sol = SceneSolution::default();
    for t in &scene.tracks {
        match triangulate(method, t, &scene.views, &opts) {
            Ok(est) => sol.points.push((t.point_id, est)),
            Err(e) => sol.failures.push((t.point_id, e)),
        }
    }
    sol
}

pub const POINTS_HEADER: &str = "point_id,x,y,z,cov_xx,cov_xy,cov_xz,cov_yy,cov_yz,cov_zz,residual_cost,method";

pub fn write_points_csv<W: Write>(mut w: W, points: &[(usize, PointEstimate64)]) -> io::Result<()> {
    writeln!(w, "{POINTS_HEADER}")?;
    for (id, e) in points {
        let p = &e.position;
        let cov = match &e.covariance {
            Some(c) => [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)].map(|ij| num(c[ij])).join(","),
            None => ",,,,,".to_owned(),
        };
        let [x, y, z] = [p.x, p.y, p.z].map(num);
        writeln!(w, "{id},{x},{y},{z},{cov},{},{}", num(e.residual_cost), e.method)?;
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| BenchError::Config(format!("bad grid value '{}'", s.trim())))
        })
        .collect()
}

fn load_config<C: Default + serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<C> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(C::default()),
    }
}

/// Parameters of a `bench` invocation, as accepted by [`run_bench`].
#[derive(Debug, Clone, Default)]
pub struct BenchArgs {
    pub config: Option<PathBuf>,
    pub sweep: Option<String>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub timing: bool,
}

pub fn run_bench(kind: StudyKind, args: &BenchArgs) -> Result<Vec<BenchReport>> {
    let opts = StudyOptions { timing: args.timing };
    let grid = args.grid.as_deref().map(parse_grid).transpose()?;
    match kind {
        StudyKind::TwoView => {
            let mut cfg: TwoViewConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.trials = args.trials.unwrap_or(cfg.trials);
            let sweep = match &args.sweep {
                Some(name) => {
                    let param = name.parse()?;
                    let grid = grid.clone().unwrap_or_else(|| crate::study::TwoViewSweep::default_grid(param));
                    Some(Sweep { param, grid })
                }
                None => None,
            };
            run_two_view_study(&cfg, sweep.as_ref(), &opts)
        }
        StudyKind::NView => {
            let mut cfg: NViewConfig = load_config(args.config.as_deref())?;
            cfg.seed = args.seed.unwrap_or(cfg.seed);
            cfg.trials = args.trials.unwrap_or(cfg.trials);
            let sweep = match &args.sweep {
                Some(name) => {
                    let param = name.parse()?;
                    let grid = grid.clone().unwrap_or_else(|| crate::study::NViewSweep::default_grid(param));
                    Some(Sweep { param, grid })
                }
                None => None,
            };
            run_n_view_study(&cfg, sweep.as_ref(), &opts)
        }
    }
}

fn exit_code_for(e: &BenchError) -> i32 {
    match e {
        BenchError::Io(_) => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

/// Executes a parsed command line and returns the process exit code.
/// Diagnostics go to `err`.
pub fn run<E: Write>(cli: Cli, err: &mut E) -> i32 {
    match cli.command {
        Command::Triangulate {
            scene,
            method,
            out,
            diag_approx,
        } => {
            let method: Method = match method.parse() {
                Ok(m) => m,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_INPUT;
                }
            };
            let scene = match SceneFile::load(&scene).and_then(|f| f.to_scene()) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: {}: {e}", scene.display());
                    return EXIT_INPUT;
                }
            };
            let sol = triangulate_scene(&scene, method, diag_approx);
            for (id, e) in &sol.failures {
                let _ = writeln!(err, "track {id}: {e}");
            }
            let written = open_output(out.as_deref()).and_then(|mut w| {
                write_points_csv(&mut w, &sol.points)?;
                w.flush()
            });
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
            if sol.points.is_empty() && !sol.failures.is_empty() {
                EXIT_ALL_DEGENERATE
            } else {
                EXIT_OK
            }
        }
        Command::Bench {
            study,
            config,
            sweep,
            grid,
            seed,
            trials,
            out,
            json,
            timing,
        } => {
            let args = BenchArgs {
                config,
                sweep,
                grid,
                seed,
                trials,
                timing,
            };
            let reports = match run_bench(study, &args) {
                Ok(r) => r,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return exit_code_for(&e);
                }
            };
            let written = (|| -> Result<()> {
                let mut w = open_output(out.as_deref())?;
                write_bench_csv(&mut w, &reports)?;
                w.flush()?;
                if let Some(p) = &json {
                    let mut j = BufWriter::new(File::create(p)?);
                    write_bench_json(&mut j, &reports)?;
                    j.flush()?;
                }
                Ok(())
            })();
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_FAILURE
                }
            }
        }
    }
}
