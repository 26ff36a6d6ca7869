//! Symbolic probability measure specifications.
//!
//! Three kinds are supported: the uniform (volume) measure, densities of the
//! form `1 + trigonometric polynomial` on tori (chosen so that Fourier
//! coefficients and second moments of eigenfunctions are exact finite
//! expressions), and finite atomic measures. The mixture kind declares a
//! lower mass constant `c` with `density >= c` everywhere, verified on a
//! grid at construction time.

use crate::error::{Error, Result};
use crate::space::{Point, SpaceModel};

/// One `a cos(2 pi k.x) + b sin(2 pi k.x)` term of a density.
///
/// Frequencies must be nonzero and canonical: the first nonzero component is
/// positive, so a frequency and its negative cannot both appear.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub freq: Vec<i64>,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

impl TrigTerm {
    pub fn new(freq: Vec<i64>, cos_amp: f64, sin_amp: f64) -> Self {
        TrigTerm { freq, cos_amp, sin_amp }
    }

    fn is_canonical(&self) -> bool {
        match self.freq.iter().find(|&&v| v != 0) {
            Some(&v) => v > 0,
            None => false,
        }
    }
}

/// The measure variants.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Uniform,
    /// Density `1 + sum of terms`, bounded below by `lower_mass`.
    Mixture { lower_mass: f64, terms: Vec<TrigTerm> },
    /// Finite atomic measure with positive weights summing to 1.
    Atomic(Vec<(Point, f64)>),
}

/// A probability measure on one of the supported spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub space: SpaceModel,
    pub kind: MeasureKind,
}

impl MeasureSpec {
    pub fn uniform(space: SpaceModel) -> MeasureSpec {
        MeasureSpec { space, kind: MeasureKind::Uniform }
    }

    /// Mixture density on a torus; validates canonicity, the declared lower
    /// mass constant (on a grid, 1e-9 slack) and unit total mass.
    pub fn mixture(space: SpaceModel, lower_mass: f64, terms: Vec<TrigTerm>) -> Result<MeasureSpec> {
        if !space.is_torus() {
            return Err(Error::InvalidMeasure(
                "mixture densities are defined on torus spaces only".into(),
            ));
        }
        if !(0.0..=1.0).contains(&lower_mass) {
            return Err(Error::InvalidMeasure(format!(
                "lower mass constant {lower_mass} outside [0,1]"
            )));
        }
        let d = space.dim() as usize;
        for term in &terms {
            if term.freq.len() != d {
                return Err(Error::InvalidMeasure(format!(
                    "frequency {:?} has wrong dimension (expected {d})",
                    term.freq
                )));
            }
            if !term.is_canonical() {
                return Err(Error::InvalidMeasure(format!(
                    "frequency {:?} is zero or not canonical (first nonzero component must be positive)",
                    term.freq
                )));
            }
        }
        let spec = MeasureSpec { space, kind: MeasureKind::Mixture { lower_mass, terms } };
        spec.verify_lower_mass()?;
        Ok(spec)
    }

    /// Atomic measure; validates point membership and weight normalization.
    pub fn atomic(space: SpaceModel, atoms: Vec<(Point, f64)>) -> Result<MeasureSpec> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        }
        let mut total = 0.0;
        for (p, w) in &atoms {
            space.validate(p)?;
            if *w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("nonpositive weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(MeasureSpec { space, kind: MeasureKind::Atomic(atoms) })
    }

    /// Density value at torus coordinates (mixture and uniform kinds).
    pub fn density(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MeasureKind::Uniform => 1.0,
            MeasureKind::Mixture { terms, .. } => {
                let mut v = 1.0;
                for term in terms {
                    let phase: f64 = 2.0
                        * std::f64::consts::PI
                        * term
                            .freq
                            .iter()
                            .zip(x.iter())
                            .map(|(&k, &xi)| k as f64 * xi)
                            .sum::<f64>();
                    v += term.cos_amp * phase.cos() + term.sin_amp * phase.sin();
                }
                v
            }
            MeasureKind::Atomic(_) => f64::NAN,
        }
    }

    /// Upper bound on the density (rejection envelope for samplers).
    pub fn density_sup_bound(&self) -> f64 {
        match &self.kind {
            MeasureKind::Uniform => 1.0,
            MeasureKind::Mixture { terms, .. } => {
                1.0 + terms.iter().map(|t| t.cos_amp.abs() + t.sin_amp.abs()).sum::<f64>()
            }
            MeasureKind::Atomic(_) => f64::INFINITY,
        }
    }

    /// Largest `c` such that the measure dominates `c * Vol`, as declared and
    /// verified: 1 for uniform, the verified declared constant for mixtures,
    /// 0 for atomic measures.
    pub fn lower_mass_constant(&self) -> Result<f64> {
        match &self.kind {
            MeasureKind::Uniform => Ok(1.0),
            MeasureKind::Mixture { lower_mass, .. } => {
                self.verify_lower_mass()?;
                Ok(*lower_mass)
            }
            MeasureKind::Atomic(_) => Ok(0.0),
        }
    }

    fn verify_lower_mass(&self) -> Result<()> {
        let MeasureKind::Mixture { lower_mass, terms } = &self.kind else {
            return Ok(());
        };
        let d = self.space.dim() as usize;
        let max_freq = terms
            .iter()
            .flat_map(|t| t.freq.iter().map(|k| k.unsigned_abs()))
            .max()
            .unwrap_or(0) as usize;
        let per_axis = (16 * (max_freq + 1)).clamp(32, 512);
        let grid_total = (per_axis as f64).powi(d as i32);
        if grid_total > 64f64.powi(3) {
            return Err(Error::InvalidMeasure(
                "lower mass grid verification too large for this dimension".into(),
            ));
        }
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0f64; d];
        loop {
            for (xi, &i) in x.iter_mut().zip(idx.iter()) {
                *xi = i as f64 / per_axis as f64;
            }
            let v = self.density(&x);
            if v < lower_mass - 1e-9 {
                return Err(Error::LowerMassViolated { declared: *lower_mass, found: v, at: x[0] });
            }
            // odometer increment
            let mut j = 0;
            loop {
                idx[j] += 1;
                if idx[j] < per_axis {
                    break;
                }
                idx[j] = 0;
                j += 1;
                if j == d {
                    return Ok(());
                }
            }
        }
    }

    pub fn atoms(&self) -> Option<&[(Point, f64)]> {
        match &self.kind {
            MeasureKind::Atomic(a) => Some(a),
            _ => None,
        }
    }
}
