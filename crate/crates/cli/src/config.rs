//! Flat key-value experiment configuration.
//!
//! One experiment per file; `key = value` lines, `#` comments, arrays as
//! comma lists. Unknown keys are rejected so typos cannot silently fall
//! back to defaults. The resolved configuration echoes back in a canonical
//! key order, and running the echo reproduces the run.

use anyhow::{anyhow, bail, Context, Result};
use std::path::{Path, PathBuf};
use w2lab_core::space::SpaceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    BoundCheck,
    RateFit,
    WalkDecay,
    LpsQuantization,
    LowerBoundDemo,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::BoundCheck => "bound-check",
            ExperimentKind::RateFit => "rate-fit",
            ExperimentKind::WalkDecay => "walk-decay",
            ExperimentKind::LpsQuantization => "lps-quantization",
            ExperimentKind::LowerBoundDemo => "lower-bound-demo",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "bound-check" => ExperimentKind::BoundCheck,
            "rate-fit" => ExperimentKind::RateFit,
            "walk-decay" => ExperimentKind::WalkDecay,
            "lps-quantization" => ExperimentKind::LpsQuantization,
            "lower-bound-demo" => ExperimentKind::LowerBoundDemo,
            _ => bail!("unknown experiment kind '{s}'"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessChoice {
    IidUniform,
    Teleport,
    WalkLps,
    TwoIsland,
}

impl ProcessChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcessChoice::IidUniform => "iid-uniform",
            ProcessChoice::Teleport => "teleport",
            ProcessChoice::WalkLps => "walk-lps",
            ProcessChoice::TwoIsland => "two-island",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "iid-uniform" => ProcessChoice::IidUniform,
            "teleport" => ProcessChoice::Teleport,
            "walk-lps" => ProcessChoice::WalkLps,
            "two-island" => ProcessChoice::TwoIsland,
            _ => bail!("unknown process '{s}'"),
        })
    }
}

pub fn space_name(space: SpaceModel) -> String {
    match space {
        SpaceModel::Circle => "circle".into(),
        SpaceModel::FlatTorus(d) => format!("torus{d}"),
        SpaceModel::SU2 => "su2".into(),
        SpaceModel::SO3 => "so3".into(),
    }
}

fn parse_space(s: &str) -> Result<SpaceModel> {
    Ok(match s {
        "circle" => SpaceModel::Circle,
        "su2" => SpaceModel::SU2,
        "so3" => SpaceModel::SO3,
        _ => {
            let d: u32 = s
                .strip_prefix("torus")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| anyhow!("unknown space '{s}'"))?;
            if d == 0 {
                bail!("torus dimension must be positive");
            }
            SpaceModel::FlatTorus(d)
        }
    })
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub space: SpaceModel,
    pub process: ProcessChoice,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// Semidiscrete grid resolution per axis (torus targets).
    pub grid_m: usize,
    /// Haar reference size (group-space targets).
    pub reference_size: usize,
    /// Representation cutoff for group Fourier diagnostics.
    pub n_max: usize,
    /// Nonuniform gap constant for walk-decay.
    pub gap_b: f64,
    /// Teleport refresh probability.
    pub theta: f64,
    /// Generator prime for walk-lps / lps-quantization.
    pub lps_p: u64,
    pub out: PathBuf,
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn parse_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
        let mut kind = None;
        let mut space = None;
        let mut process = None;
        let mut n_grid: Option<Vec<usize>> = None;
        let mut replicates = 50usize;
        let mut seed = 42u64;
        let mut grid_m = 64usize;
        let mut reference_size = 2048usize;
        let mut n_max = 15usize;
        let mut gap_b = 1.0f64;
        let mut theta = 0.2f64;
        let mut lps_p = 5u64;
        let mut out = PathBuf::from("w2lab-out");
        let mut threads = 1usize;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value'", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "kind" => kind = Some(ExperimentKind::parse(value)?),
                "space" => space = Some(parse_space(value)?),
                "process" => process = Some(ProcessChoice::parse(value)?),
                "n_grid" => {
                    let grid: Vec<usize> = value
                        .split(',')
                        .map(|v| v.trim().parse().map_err(|e| anyhow!("n_grid entry '{v}': {e}")))
                        .collect::<Result<_>>()?;
                    n_grid = Some(grid);
                }
                "replicates" => replicates = value.parse()?,
                "seed" => seed = value.parse()?,
                "grid_m" => grid_m = value.parse()?,
                "reference_size" => reference_size = value.parse()?,
                "n_max" => n_max = value.parse()?,
                "gap_b" => gap_b = value.parse()?,
                "theta" => theta = value.parse()?,
                "lps_p" => lps_p = value.parse()?,
                "out" => out = PathBuf::from(value),
                "threads" => threads = value.parse()?,
                _ => bail!("unknown key '{key}'"),
            }
        }

        let config = ExperimentConfig {
            kind: kind.ok_or_else(|| anyhow!("missing key 'kind'"))?,
            space: space.ok_or_else(|| anyhow!("missing key 'space'"))?,
            process: process.unwrap_or(ProcessChoice::IidUniform),
            n_grid: n_grid.ok_or_else(|| anyhow!("missing key 'n_grid'"))?,
            replicates,
            seed,
            grid_m,
            reference_size,
            n_max,
            gap_b,
            theta,
            lps_p,
            out,
            threads,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            bail!("n_grid must not be empty");
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            bail!("n_grid must be strictly increasing");
        }
        if self.replicates < 2 {
            bail!("need at least 2 replicates");
        }
        if !(0.0..=1.0).contains(&self.theta) || self.theta == 0.0 {
            bail!("theta must lie in (0, 1]");
        }
        if self.gap_b <= 0.0 {
            bail!("gap_b must be positive");
        }
        match self.kind {
            ExperimentKind::WalkDecay | ExperimentKind::LpsQuantization => {
                if !self.space.is_group_sphere() {
                    bail!("{} requires su2 or so3", self.kind.as_str());
                }
            }
            ExperimentKind::LowerBoundDemo => {
                if !self.space.is_torus() {
                    bail!("lower-bound-demo requires a torus space");
                }
            }
            _ => {}
        }
        if self.process == ProcessChoice::WalkLps && !self.space.is_group_sphere() {
            bail!("walk-lps runs on su2 or so3");
        }
        if self.process == ProcessChoice::TwoIsland && !self.space.is_torus() {
            bail!("two-island runs on a torus");
        }
        Ok(())
    }

    /// Canonical echo; parsing it back yields an identical configuration.
    pub fn echo(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        format!(
            "# w2lab resolved experiment configuration\n\
             kind = {}\n\
             space = {}\n\
             process = {}\n\
             n_grid = {}\n\
             replicates = {}\n\
             seed = {}\n\
             grid_m = {}\n\
             reference_size = {}\n\
             n_max = {}\n\
             gap_b = {}\n\
             theta = {}\n\
             lps_p = {}\n\
             out = {}\n\
             threads = {}\n",
            self.kind.as_str(),
            space_name(self.space),
            self.process.as_str(),
            grid.join(","),
            self.replicates,
            self.seed,
            self.grid_m,
            self.reference_size,
            self.n_max,
            self.gap_b,
            self.theta,
            self.lps_p,
            self.out.display(),
            self.threads,
        )
    }
}

/// Solver arc budget: the `W2LAB_BUDGET` environment variable, if set, caps
/// the number of implicit arcs per solve.
pub fn arc_budget() -> usize {
    std::env::var("W2LAB_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(w2lab_core::transport::DEFAULT_ARC_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# demo
kind = rate-fit
space = torus2
n_grid = 256, 512,1024
seed = 7
";

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse_str(SAMPLE).unwrap();
        assert_eq!(c.kind, ExperimentKind::RateFit);
        assert_eq!(c.space, SpaceModel::FlatTorus(2));
        assert_eq!(c.n_grid, vec![256, 512, 1024]);
        assert_eq!(c.seed, 7);
        assert_eq!(c.replicates, 50);
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::parse_str(SAMPLE).unwrap();
        let back = ExperimentConfig::parse_str(&c.echo()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.echo(), back.echo());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::parse_str("kind = rate-fit\nspace = torus2\nn_grid = 2\nbogus = 1\n").is_err());
    }

    #[test]
    fn non_increasing_grid_rejected() {
        assert!(
            ExperimentConfig::parse_str("kind = rate-fit\nspace = torus2\nn_grid = 4,4\n").is_err()
        );
    }

    #[test]
    fn kind_space_compatibility() {
        assert!(
            ExperimentConfig::parse_str("kind = walk-decay\nspace = torus2\nn_grid = 27,64\n")
                .is_err()
        );
    }
}
