//! Monte-Carlo studies of the `tri-core` triangulators, JSON scene files and
//! the `tri` command-line tool.
//!
//! The two studies mirror the classic synthetic setups: two cameras orbiting
//! a point (compared against Hartley-Sturm) and fifty cameras scattered in a
//! box (compared against reprojection-error refinement). Trials run in
//! parallel with one RNG stream per trial, so a fixed seed reproduces a
//! report exactly regardless of thread count.

// `!(a < b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod scene_file;
pub mod study;

pub use error::{BenchError, Result};
pub use scenario::{corrupt_covariances, NViewConfig, Trial, TwoViewConfig};
pub use scene_file::SceneFile;
pub use study::{
    measure_runtime, run_n_view_study, run_two_view_study, BenchReport, Estimator, MethodResult, NViewSweep,
    StudyOptions, Sweep, TwoViewSweep,
};
