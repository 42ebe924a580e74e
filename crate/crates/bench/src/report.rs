//! CSV and JSON output. Numbers use Rust's shortest round-trip formatting
//! (exponent notation for very large or small magnitudes) so that identical
//! results produce identical bytes.

use std::io::Write;

use crate::error::Result;
use crate::study::BenchReport;

pub const BENCH_HEADER: &str =
    "method,sweep_param,sweep_value,rmse,deterioration_pct,mean_runtime_us,trials_ok,trials_excluded,seed";

/// Shortest string that parses back to exactly `x`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per method and grid value.
pub fn write_bench_csv<W: Write>(mut w: W, reports: &[BenchReport]) -> Result<()> {
    writeln!(w, "{BENCH_HEADER}")?;
    for r in reports {
        for m in &r.methods {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                m.method,
                r.sweep_param.unwrap_or("none"),
                opt(r.sweep_value),
                num(m.rmse),
                num(m.deterioration_pct),
                opt(m.mean_runtime_us),
                m.trials_ok,
                m.trials_excluded,
                r.seed
            )?;
        }
    }
    Ok(())
}

pub fn write_bench_json<W: Write>(mut w: W, reports: &[BenchReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports)?;
    writeln!(w)?;
    Ok(())
}
