//! Monte-Carlo studies comparing triangulation methods.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use tri_core::{
    sigma_from_observations, triangulate_dlt, triangulate_hs, triangulate_lost, triangulate_lostu,
    triangulate_midpoint, CovarianceOptions, LostuOptions, TriError,
};

use crate::error::{BenchError, Result};
use crate::oracle::{refine_mahalanobis, refine_reprojection};
use crate::scenario::{NViewConfig, Trial, TwoViewConfig};

/// Estimators compared by the studies. Besides the core solvers this
/// includes LOSTU fed misreported covariances, LOSTU with a diagonal
/// residual covariance, and DLT-seeded refinements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub enum Estimator {
    Midpoint,
    Dlt,
    Lost,
    Lostu,
    LostuCorrupted,
    LostuDiag,
    Hs,
    /// LOSTU with residual covariances evaluated at the DLT solution.
    DltLostu,
    /// Levenberg-Marquardt on the reprojection error, seeded at DLT.
    DltReproj,
    /// Gauss-Newton on the Mahalanobis cost, seeded at DLT.
    DltMahalanobis,
}

impl Estimator {
    pub const TWO_VIEW: [Estimator; 6] = [
        Estimator::Midpoint,
        Estimator::Dlt,
        Estimator::Lost,
        Estimator::Lostu,
        Estimator::LostuCorrupted,
        Estimator::Hs,
    ];

    pub const N_VIEW: [Estimator; 8] = [
        Estimator::Midpoint,
        Estimator::Dlt,
        Estimator::Lost,
        Estimator::Lostu,
        Estimator::LostuDiag,
        Estimator::DltLostu,
        Estimator::DltMahalanobis,
        Estimator::DltReproj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Midpoint => "midpoint",
            Estimator::Dlt => "dlt",
            Estimator::Lost => "lost",
            Estimator::Lostu => "lostu",
            Estimator::LostuCorrupted => "lostu-corrupted",
            Estimator::LostuDiag => "lostu-diag",
            Estimator::Hs => "hs",
            Estimator::DltLostu => "dlt+lostu",
            Estimator::DltReproj => "dlt+lm-reproj",
            Estimator::DltMahalanobis => "dlt+lm-mahalanobis",
        }
    }

    /// Point estimate on one trial, using the believed cameras.
    pub fn estimate(self, trial: &Trial) -> Result<Vector3<f64>, TriError> {
        let (track, views) = (&trial.track, trial.believed.as_slice());
        let lostu = LostuOptions::default();
        let dlt = || triangulate_dlt(track, views).map(|e| e.position);
        Ok(match self {
            Estimator::Midpoint => triangulate_midpoint(track, views)?.position,
            Estimator::Dlt => dlt()?,
            Estimator::Lost => triangulate_lost(track, views, &sigma_from_observations(track))?.position,
            Estimator::Lostu => triangulate_lostu(track, views, &lostu)?.position,
            Estimator::LostuCorrupted => triangulate_lostu(track, &trial.corrupted, &lostu)?.position,
            Estimator::LostuDiag => {
                let opts = LostuOptions {
                    covariance: CovarianceOptions {
                        diagonal_approx: true,
                        ..lostu.covariance
                    },
                    ..lostu
                };
                triangulate_lostu(track, views, &opts)?.position
            }
            Estimator::Hs => triangulate_hs(track, views)?.position,
            Estimator::DltLostu => {
                let opts = LostuOptions {
                    prior: Some(dlt()?),
                    ..lostu
                };
                triangulate_lostu(track, views, &opts)?.position
            }
            Estimator::DltReproj => refine_reprojection(track, views, &dlt()?)?,
            Estimator::DltMahalanobis => refine_mahalanobis(track, views, &dlt()?, &lostu.covariance)?,
        })
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Estimator> for String {
    fn from(e: Estimator) -> String {
        e.name().to_owned()
    }
}

const ALL_ESTIMATORS: [Estimator; 10] = [
    Estimator::Midpoint,
    Estimator::Dlt,
    Estimator::Lost,
    Estimator::Lostu,
    Estimator::LostuCorrupted,
    Estimator::LostuDiag,
    Estimator::Hs,
    Estimator::DltLostu,
    Estimator::DltReproj,
    Estimator::DltMahalanobis,
];

impl FromStr for Estimator {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_ESTIMATORS
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown estimator '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoViewSweep {
    SigmaPx,
    PoseScale,
    Z1,
    Y1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NViewSweep {
    SigmaPx,
    SigmaPhi,
    SigmaC,
    DepthScale,
    M,
}

impl TwoViewSweep {
    pub const ALL: [TwoViewSweep; 4] = [Self::SigmaPx, Self::PoseScale, Self::Z1, Self::Y1];

    pub fn name(self) -> &'static str {
        match self {
            Self::SigmaPx => "sigma_px",
            Self::PoseScale => "pose_scale",
            Self::Z1 => "z1",
            Self::Y1 => "y1",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Self::SigmaPx => vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            Self::PoseScale => vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
            Self::Z1 => vec![-2.0, -4.0, -6.0, -8.0, -10.0, -15.0, -20.0],
            Self::Y1 => vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 5.0],
        }
    }

    pub fn apply(self, cfg: &mut TwoViewConfig, value: f64) {
        match self {
            Self::SigmaPx => cfg.sigma_px = value,
            Self::PoseScale => cfg.pose_scale = value,
            Self::Z1 => cfg.z1 = value,
            Self::Y1 => cfg.y1 = value,
        }
    }
}

impl NViewSweep {
    pub const ALL: [NViewSweep; 5] = [Self::SigmaPx, Self::SigmaPhi, Self::SigmaC, Self::DepthScale, Self::M];

    pub fn name(self) -> &'static str {
        match self {
            Self::SigmaPx => "sigma_px",
            Self::SigmaPhi => "sigma_phi",
            Self::SigmaC => "sigma_c",
            Self::DepthScale => "depth_scale",
            Self::M => "m",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Self::SigmaPx => vec![0.25, 0.5, 1.0, 2.0, 4.0],
            Self::SigmaPhi => vec![0.0, 0.025, 0.05, 0.1, 0.2],
            Self::SigmaC => vec![0.0, 0.01, 0.02, 0.05, 0.1],
            Self::DepthScale => vec![0.25, 0.5, 1.0, 2.0, 4.0],
            Self::M => vec![5.0, 10.0, 20.0, 50.0, 100.0, 200.0],
        }
    }

    pub fn apply(self, cfg: &mut NViewConfig, value: f64) -> Result<()> {
        match self {
            Self::SigmaPx => cfg.sigma_px = value,
            Self::SigmaPhi => cfg.sigma_phi = value,
            Self::SigmaC => cfg.sigma_c = value,
            Self::DepthScale => cfg.depth_scale = value,
            Self::M => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(BenchError::Config(format!("m must be a whole number, got {value}")));
                }
                cfg.m = value as usize;
            }
        }
        Ok(())
    }
}

fn parse_sweep<S: Copy>(name: &str, all: &[S], key: impl Fn(S) -> &'static str) -> Result<S> {
    all.iter().copied().find(|s| key(*s) == name).ok_or_else(|| BenchError::UnknownSweep {
        name: name.to_owned(),
        expected: all.iter().map(|s| key(*s)).collect::<Vec<_>>().join(", "),
    })
}

impl FromStr for TwoViewSweep {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        parse_sweep(s, &Self::ALL, Self::name)
    }
}

impl FromStr for NViewSweep {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        parse_sweep(s, &Self::ALL, Self::name)
    }
}

/// A sweep axis and the values to visit; `None` runs the configuration as is.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<S> {
    pub param: S,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StudyOptions {
    /// Measure mean runtimes (machine dependent, so off by default to keep
    /// reports reproducible byte for byte).
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: Estimator,
    pub rmse: f64,
    pub deterioration_pct: f64,
    pub mean_runtime_us: Option<f64>,
    pub trials_ok: usize,
    pub trials_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub study: &'static str,
    pub sweep_param: Option<&'static str>,
    pub sweep_value: Option<f64>,
    pub baseline: Estimator,
    pub seed: u64,
    pub trials: usize,
    pub config: serde_json::Value,
    pub methods: Vec<MethodResult>,
}

/// Squared position errors, one row per trial and one column per estimator;
/// `None` marks a failed estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub estimators: Vec<Estimator>,
    pub sq_errors: Vec<Vec<Option<f64>>>,
}

impl TrialErrors {
    pub fn column(&self, e: Estimator) -> Option<Vec<Option<f64>>> {
        let k = self.estimators.iter().position(|x| *x == e)?;
        Some(self.sq_errors.iter().map(|row| row[k]).collect())
    }

    pub fn rmse(&self, e: Estimator) -> Option<f64> {
        let col = self.column(e)?;
        let ok: Vec<f64> = col.into_iter().flatten().collect();
        Some(rmse_of(&ok))
    }
}

fn rmse_of(sq: &[f64]) -> f64 {
    if sq.is_empty() {
        return f64::NAN;
    }
    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
}

/// `100 (rmse - baseline) / baseline`, defined as zero when the baseline
/// error vanishes.
pub fn deterioration_pct(rmse: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (rmse - baseline) / baseline
    }
}

/// Deterministic RNG for trial `index`: the seed picks the key and the trial
/// index the stream, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `f` on a thread pool capped by `TRI_BENCH_THREADS` when set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("TRI_BENCH_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap.filter(|n| *n > 0) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Generates `trials` trials with `generate` and evaluates every estimator on
/// each, in parallel.
pub fn run_trials<G>(generate: G, trials: usize, seed: u64, estimators: &[Estimator]) -> Result<TrialErrors>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Trial> + Sync,
{
    let rows = with_thread_cap(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let trial = generate(&mut trial_rng(seed, i))?;
                Ok(estimators
                    .iter()
                    .map(|e| e.estimate(&trial).ok().map(|x| (x - trial.point).norm_squared()))
                    .collect())
            })
            .collect::<Result<Vec<Vec<Option<f64>>>>>()
    })?;
    Ok(TrialErrors {
        estimators: estimators.to_vec(),
        sq_errors: rows,
    })
}

/// Number of timed calls per estimator in [`measure_runtime`].
pub const TIMED_CALLS: usize = 10_000;
const WARMUP_CALLS: usize = 1_000;

/// Mean wall-clock time of one estimate in microseconds, cycling through
/// `workload` for at least [`TIMED_CALLS`] calls after a warm-up.
pub fn measure_runtime(estimator: Estimator, workload: &[Trial]) -> f64 {
    assert!(!workload.is_empty(), "empty runtime workload");
    let calls = TIMED_CALLS.max(workload.len());
    for t in workload.iter().cycle().take(WARMUP_CALLS) {
        let _ = black_box(estimator.estimate(black_box(t)));
    }
    let start = Instant::now();
    for t in workload.iter().cycle().take(calls) {
        let _ = black_box(estimator.estimate(black_box(t)));
    }
    start.elapsed().as_secs_f64() * 1e6 / calls as f64
}

const RUNTIME_WORKLOAD: usize = 100;

fn runtime_workload<G>(generate: &G, seed: u64) -> Result<Vec<Trial>>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Trial>,
{
    (0..RUNTIME_WORKLOAD).map(|i| generate(&mut trial_rng(seed, i))).collect()
}

fn summarize(errors: &TrialErrors, baseline: Estimator, runtimes: Option<&[f64]>) -> Vec<MethodResult> {
    let base = errors.rmse(baseline).unwrap_or(f64::NAN);
    errors
        .estimators
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let ok: Vec<f64> = errors.sq_errors.iter().filter_map(|row| row[k]).collect();
            let rmse = rmse_of(&ok);
            MethodResult {
                method: *e,
                rmse,
                deterioration_pct: deterioration_pct(rmse, base),
                mean_runtime_us: runtimes.map(|r| r[k]),
                trials_ok: ok.len(),
                trials_excluded: errors.sq_errors.len() - ok.len(),
            }
        })
        .collect()
}

struct Point<'a> {
    study: &'static str,
    sweep: Option<(&'static str, f64)>,
    baseline: Estimator,
    estimators: &'a [Estimator],
    trials: usize,
    seed: u64,
    config: serde_json::Value,
}

fn run_point<G>(p: Point<'_>, generate: G, opts: &StudyOptions) -> Result<BenchReport>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Trial> + Sync,
{
    let errors = run_trials(&generate, p.trials, p.seed, p.estimators)?;
    let runtimes = if opts.timing {
        let work = runtime_workload(&generate, p.seed)?;
        Some(p.estimators.iter().map(|e| measure_runtime(*e, &work)).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(BenchReport {
        study: p.study,
        sweep_param: p.sweep.map(|s| s.0),
        sweep_value: p.sweep.map(|s| s.1),
        baseline: p.baseline,
        seed: p.seed,
        trials: p.trials,
        config: p.config,
        methods: summarize(&errors, p.baseline, runtimes.as_deref()),
    })
}

/// Two cameras orbiting the origin, compared against Hartley-Sturm. One
/// report per grid value (a single one without a sweep).
pub fn run_two_view_study(
    config: &TwoViewConfig,
    sweep: Option<&Sweep<TwoViewSweep>>,
    opts: &StudyOptions,
) -> Result<Vec<BenchReport>> {
    let points: Vec<(Option<(&'static str, f64)>, TwoViewConfig)> = match sweep {
        None => vec![(None, config.clone())],
        Some(s) => s
            .grid
            .iter()
            .map(|v| {
                let mut c = config.clone();
                s.param.apply(&mut c, *v);
                (Some((s.param.name(), *v)), c)
            })
            .collect(),
    };
    points
        .into_iter()
        .map(|(sweep, cfg)| {
            cfg.validate()?;
            let point = Point {
                study: "two-view",
                sweep,
                baseline: Estimator::Hs,
                estimators: &Estimator::TWO_VIEW,
                trials: cfg.trials,
                seed: cfg.seed,
                config: serde_json::to_value(&cfg)?,
            };
            run_point(point, |rng: &mut ChaCha8Rng| cfg.generate(rng), opts)
        })
        .collect()
}

/// Many scattered cameras, compared against reprojection-error refinement.
pub fn run_n_view_study(
    config: &NViewConfig,
    sweep: Option<&Sweep<NViewSweep>>,
    opts: &StudyOptions,
) -> Result<Vec<BenchReport>> {
    let mut points: Vec<(Option<(&'static str, f64)>, NViewConfig)> = Vec::new();
    match sweep {
        None => points.push((None, config.clone())),
        Some(s) => {
            for v in &s.grid {
                let mut c = config.clone();
                s.param.apply(&mut c, *v)?;
                points.push((Some((s.param.name(), *v)), c));
            }
        }
    }
    points
        .into_iter()
        .map(|(sweep, cfg)| {
            cfg.validate()?;
            let point = Point {
                study: "n-view",
                sweep,
                baseline: Estimator::DltReproj,
                estimators: &Estimator::N_VIEW,
                trials: cfg.trials,
                seed: cfg.seed,
                config: serde_json::to_value(&cfg)?,
            };
            run_point(point, |rng: &mut ChaCha8Rng| cfg.generate(rng), opts)
        })
        .collect()
}

/// Paired samples of squared errors for two estimators, one group per
/// independent seed.
pub type PairedGroup<'a> = (&'a [Option<f64>], &'a [Option<f64>]);

/// Percentile bootstrap interval for the seed-averaged `RMSE_a - RMSE_b`.
/// Each replicate resamples every group's trials (keeping pairs together,
/// dropping trials where either estimator failed) and averages the per-group
/// differences.
pub fn paired_bootstrap_ci(groups: &[PairedGroup<'_>], resamples: usize, level: f64, seed: u64) -> Option<(f64, f64)> {
    let groups: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|(a, b)| a.iter().zip(*b).filter_map(|(x, y)| Some(((*x)?, (*y)?))).collect())
        .collect();
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diffs: Vec<f64> = (0..resamples)
        .map(|_| {
            let total: f64 = groups
                .iter()
                .map(|pairs| {
                    let n = pairs.len();
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for _ in 0..n {
                        let (x, y) = pairs[rng.random_range(0..n)];
                        sa += x;
                        sb += y;
                    }
                    (sa / n as f64).sqrt() - (sb / n as f64).sqrt()
                })
                .sum();
            total / groups.len() as f64
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let idx = |q: f64| ((q * (resamples - 1) as f64).round() as usize).min(resamples - 1);
    Some((diffs[idx(tail)], diffs[idx(1.0 - tail)]))
}

/// Ordinary least-squares line through `(x, y)`: slope, intercept and R^2.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterioration_of_baseline_is_zero() {
        assert_eq!(deterioration_pct(2.0, 2.0), 0.0);
        assert_eq!(deterioration_pct(3.0, 2.0), 50.0);
        assert_eq!(deterioration_pct(0.0, 0.0), 0.0);
    }

    #[test]
    fn noiseless_two_view_study_is_exact() {
        let cfg = TwoViewConfig {
            sigma_px: 0.0,
            sigma_phi: 0.0,
            sigma_c: 0.0,
            trials: 20,
            ..Default::default()
        };
        let reports = run_two_view_study(&cfg, None, &StudyOptions::default()).unwrap();
        for m in &reports[0].methods {
            assert!(m.rmse < 1e-9, "{} {}", m.method, m.rmse);
            assert_eq!(m.trials_ok, 20);
        }
        let hs = reports[0].methods.iter().find(|m| m.method == Estimator::Hs).unwrap();
        assert_eq!(hs.deterioration_pct, 0.0);
    }

    #[test]
    fn trials_are_independent_of_thread_count() {
        let cfg = TwoViewConfig {
            trials: 64,
            seed: 3,
            ..Default::default()
        };
        let gen = |rng: &mut ChaCha8Rng| cfg.generate(rng);
        let par = run_trials(gen, cfg.trials, cfg.seed, &Estimator::TWO_VIEW).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let seq = pool.install(|| run_trials(gen, cfg.trials, cfg.seed, &Estimator::TWO_VIEW).unwrap());
        assert_eq!(par, seq);
    }

    #[test]
    fn sweep_names_parse() {
        for s in TwoViewSweep::ALL {
            assert_eq!(s.name().parse::<TwoViewSweep>().unwrap(), s);
        }
        for s in NViewSweep::ALL {
            assert_eq!(s.name().parse::<NViewSweep>().unwrap(), s);
        }
        assert!(matches!("focal".parse::<TwoViewSweep>(), Err(BenchError::UnknownSweep { .. })));
        for e in ALL_ESTIMATORS {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
    }

    #[test]
    fn pixel_only_rmse_grows_linearly_with_noise() {
        let grid = [0.5, 1.0, 2.0, 3.0, 4.0];
        let base = TwoViewConfig {
            sigma_phi: 0.0,
            sigma_c: 0.0,
            trials: 500,
            seed: 12,
            ..Default::default()
        };
        let sweep = Sweep {
            param: TwoViewSweep::SigmaPx,
            grid: grid.to_vec(),
        };
        let reports = run_two_view_study(&base, Some(&sweep), &StudyOptions::default()).unwrap();
        for e in [Estimator::Dlt, Estimator::Lost, Estimator::Hs] {
            let y: Vec<f64> = reports
                .iter()
                .map(|r| r.methods.iter().find(|m| m.method == e).unwrap().rmse)
                .collect();
            let (slope, _, r2) = linear_fit(&grid, &y);
            assert!(slope > 0.0 && r2 > 0.95, "{e}: slope {slope} r2 {r2}");
        }
    }

    #[test]
    fn bootstrap_interval_brackets_the_observed_difference() {
        let a: Vec<Option<f64>> = (0..200).map(|i| Some(1.0 + (i % 7) as f64 * 0.1)).collect();
        let b: Vec<Option<f64>> = (0..200).map(|i| Some(1.5 + (i % 5) as f64 * 0.1)).collect();
        let (lo, hi) = paired_bootstrap_ci(&[(&a, &b)], 500, 0.95, 1).unwrap();
        assert!(lo <= hi && hi < 0.0);
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (s, i, r2) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
