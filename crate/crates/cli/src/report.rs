//! Result rows and file artifacts.
//!
//! `results.csv` is RFC-4180 with a `# w2lab-schema v1` comment line and is
//! bit-for-bit reproducible for a fixed configuration and seed; wall times
//! go to a separate `timings.csv` so rerunning cannot perturb the results
//! file.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_LINE: &str = "# w2lab-schema v1";

/// One output row of an experiment.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub mc_mean: f64,
    pub ci_half: f64,
    pub sys_lo: f64,
    pub sys_hi: f64,
    /// Bound value when the experiment kind defines one.
    pub bound: Option<f64>,
    pub t_star: Option<f64>,
    pub seed: u64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str("experiment,n,mc_mean,ci_half_width,sys_lo,sys_hi,bound,t_star,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.mc_mean,
            r.ci_half,
            r.sys_lo,
            r.sys_hi,
            fmt_opt(r.bound),
            fmt_opt(r.t_star),
            r.seed
        );
    }
    out
}

pub fn timings_csv(timings: &[(String, usize, u128)]) -> String {
    let mut out = String::from("experiment,n,wall_ms\n");
    for (id, n, ms) in timings {
        let _ = writeln!(out, "{id},{n},{ms}");
    }
    out
}

/// A named x-y series for plot emission.
pub struct Series {
    pub name: String,
    pub header: String,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_artifacts(
    dir: &Path,
    echo: &str,
    rows: &[ResultRow],
    timings: &[(String, usize, u128)],
    plots: &[Series],
) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("results.csv"), results_csv(rows))?;
    std::fs::write(dir.join("config.echo"), echo)?;
    std::fs::write(dir.join("timings.csv"), timings_csv(timings))?;
    if !plots.is_empty() {
        let plot_dir = dir.join("plotdata");
        std::fs::create_dir_all(&plot_dir)?;
        for s in plots {
            std::fs::write(plot_dir.join(format!("{}.csv", s.name)), s.csv())?;
        }
    }
    Ok(())
}

/// Unweighted least-squares slope and intercept.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}
