//! Exact 1-D circular optimal transport.
//!
//! On R/Z the squared distance decomposes through quantile couplings on the
//! universal cover: with distribution functions extended by
//! `F(x+1) = F(x)+1`, the squared distance is the minimum over the shift
//! parameter `s` of
//!
//! `C(s) = int_0^1 (F_mu^{-1}(u) - F_nu^{-1}(u + s))^2 du`.
//!
//! Against the uniform measure `F_nu^{-1}(u) = u` and `C` is a global
//! quadratic in `s`, minimized in closed form: the squared distance is the
//! variance of `F_mu^{-1}(u) - u`. Against a mixture density the shift
//! objective is convex; it is minimized by a bracketing scan plus
//! golden-section refinement to `|delta s| <= 1e-12`, with the inner
//! quantile integrals evaluated in closed form piecewise.

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureSpec, TrigTerm};
use crate::quad::{adaptive_simpson, compensated_sum};
use crate::space::{Point, SpaceModel};
use std::f64::consts::PI;

/// Sorted atom list with cumulative weights.
struct SortedAtoms {
    positions: Vec<f64>,
    cum: Vec<f64>, // cum[j] = total weight of atoms 0..=j, cum[last] = 1
}

fn sort_atoms(atoms: &[(Point, f64)]) -> Result<SortedAtoms> {
    let mut pairs: Vec<(f64, f64)> = atoms
        .iter()
        .map(|(p, w)| {
            let x = p
                .torus_coords()
                .and_then(|c| c.first().copied())
                .ok_or_else(|| Error::NotCircle("atom is not a circle point".into()))?;
            Ok((x, *w))
        })
        .collect::<Result<_>>()?;
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut cum = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    for &(_, w) in &pairs {
        acc += w;
        cum.push(acc);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    Ok(SortedAtoms { positions: pairs.iter().map(|p| p.0).collect(), cum })
}

/// Exact squared distance between an atomic measure and the uniform measure:
/// the variance of `F^{-1}(u) - u` in closed form.
pub fn w2sq_atoms_vs_uniform(atoms: &[(Point, f64)]) -> Result<f64> {
    let sorted = sort_atoms(atoms)?;
    let mut mean_terms = Vec::with_capacity(sorted.positions.len());
    let mut sq_terms = Vec::with_capacity(sorted.positions.len());
    let mut lo = 0.0;
    for (&x, &hi) in sorted.positions.iter().zip(sorted.cum.iter()) {
        // integral of (x - u) over (lo, hi) and of (x - u)^2
        mean_terms.push(x * (hi - lo) - 0.5 * (hi * hi - lo * lo));
        sq_terms.push(((x - lo).powi(3) - (x - hi).powi(3)) / 3.0);
        lo = hi;
    }
    let mean = compensated_sum(&mean_terms);
    let sq = compensated_sum(&sq_terms);
    Ok((sq - mean * mean).max(0.0))
}

/// Exact squared distance between equal-weight circle points and uniform.
pub fn w2sq_points_vs_uniform(points: &[Point]) -> Result<f64> {
    let w = 1.0 / points.len() as f64;
    let atoms: Vec<(Point, f64)> = points.iter().map(|p| (p.clone(), w)).collect();
    w2sq_atoms_vs_uniform(&atoms)
}

/// Closed-form antiderivative helpers for `(x - v)^2 * {1, cos(w v), sin(w v)}`.
fn primitive_poly(x: f64, v: f64) -> f64 {
    -(x - v).powi(3) / 3.0
}

fn primitive_cos(x: f64, v: f64, w: f64) -> f64 {
    let (s, c) = (w * v).sin_cos();
    (x - v).powi(2) * s / w - 2.0 * (x - v) * c / (w * w) - 2.0 * s / (w * w * w)
}

fn primitive_sin(x: f64, v: f64, w: f64) -> f64 {
    let (s, c) = (w * v).sin_cos();
    -(x - v).powi(2) * c / w - 2.0 * (x - v) * s / (w * w) + 2.0 * c / (w * w * w)
}

/// `int_{v0}^{v1} (x - v)^2 f(v) dv` for a mixture density, in closed form.
fn cost_integral(x: f64, v0: f64, v1: f64, terms: &[TrigTerm]) -> f64 {
    let mut acc = primitive_poly(x, v1) - primitive_poly(x, v0);
    for t in terms {
        let w = 2.0 * PI * t.freq[0] as f64;
        if t.cos_amp != 0.0 {
            acc += t.cos_amp * (primitive_cos(x, v1, w) - primitive_cos(x, v0, w));
        }
        if t.sin_amp != 0.0 {
            acc += t.sin_amp * (primitive_sin(x, v1, w) - primitive_sin(x, v0, w));
        }
    }
    acc
}

/// CDF of a mixture density on the cover (`F(x+1) = F(x) + 1`).
fn mixture_cdf(x: f64, terms: &[TrigTerm]) -> f64 {
    let mut acc = x;
    for t in terms {
        let k = t.freq[0] as f64;
        let w = 2.0 * PI * k;
        acc += t.cos_amp * (w * x).sin() / w + t.sin_amp * (1.0 - (w * x).cos()) / w;
    }
    acc
}

/// Quantile on the cover by safeguarded Newton iteration.
fn mixture_quantile(u: f64, terms: &[TrigTerm], density_floor: f64) -> f64 {
    // bracket from |F(x) - x| <= sum over terms of (|a| + 2|b|)/(2 pi k)
    // (the 1 - cos antiderivative of the sine part has range 2|b|/(2 pi k))
    let slack: f64 = terms
        .iter()
        .map(|t| (t.cos_amp.abs() + 2.0 * t.sin_amp.abs()) / (2.0 * PI * t.freq[0] as f64))
        .sum();
    let mut lo = u - slack - 1e-12;
    let mut hi = u + slack + 1e-12;
    let mut x = u;
    for _ in 0..200 {
        let fx = mixture_cdf(x, terms) - u;
        if fx.abs() < 1e-15 {
            return x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut dens = 1.0;
        for t in terms {
            let w = 2.0 * PI * t.freq[0] as f64;
            dens += t.cos_amp * (w * x).cos() + t.sin_amp * (w * x).sin();
        }
        let newton = x - fx / dens.max(density_floor.max(1e-6));
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 {
            return 0.5 * (lo + hi);
        }
    }
    x
}

/// Shift objective for atoms vs a mixture density.
fn shift_cost(s: f64, atoms: &SortedAtoms, terms: &[TrigTerm], floor: f64) -> f64 {
    let mut acc = Vec::with_capacity(atoms.positions.len());
    let mut v_lo = mixture_quantile(s, terms, floor);
    let mut lo_cum = 0.0;
    for (&x, &hi_cum) in atoms.positions.iter().zip(atoms.cum.iter()) {
        let v_hi = mixture_quantile(hi_cum + s, terms, floor);
        acc.push(cost_integral(x, v_lo, v_hi, terms));
        v_lo = v_hi;
        lo_cum = hi_cum;
    }
    let _ = lo_cum;
    compensated_sum(&acc)
}

/// Exact squared distance between an atomic measure and a uniform-or-mixture
/// target on the circle.
///
/// Uniform targets use the closed-form variance; mixture targets minimize
/// the convex shift objective by a bracketing scan plus golden-section to
/// `1e-12` in the shift variable.
pub fn w2sq_circle(atoms: &[(Point, f64)], target: &MeasureSpec) -> Result<f64> {
    if target.space != SpaceModel::Circle {
        return Err(Error::NotCircle(format!("{:?}", target.space)));
    }
    match &target.kind {
        MeasureKind::Uniform => w2sq_atoms_vs_uniform(atoms),
        MeasureKind::Mixture { terms, lower_mass } => {
            let sorted = sort_atoms(atoms)?;
            let obj = |s: f64| shift_cost(s, &sorted, terms, *lower_mass);
            // bracket the convex objective on [-1, 1]
            let grid: Vec<f64> = (0..=32).map(|i| -1.0 + i as f64 / 16.0).collect();
            let mut best = (obj(grid[0]), grid[0]);
            for &s in &grid[1..] {
                let v = obj(s);
                if v < best.0 {
                    best = (v, s);
                }
            }
            let mut a = (best.1 - 1.0 / 16.0).max(-1.0);
            let mut b = (best.1 + 1.0 / 16.0).min(1.0);
            // golden-section refinement
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - phi * (b - a);
            let mut x2 = a + phi * (b - a);
            let mut f1 = obj(x1);
            let mut f2 = obj(x2);
            while b - a > 1e-12 {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    f1 = obj(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    f2 = obj(x2);
                }
            }
            Ok(f1.min(f2).max(0.0))
        }
        MeasureKind::Atomic(_) => Err(Error::UnsupportedMeasure(
            "circle exact solver targets uniform or mixture densities".into(),
        )),
    }
}

/// Exact squared distance between a mixture density and the uniform measure
/// by quantile integration: the variance of `F^{-1}(u) - u`, evaluated as
/// `int (x - F(x))^2 f(x) dx - (int (x - F(x)) f(x) dx)^2` by adaptive
/// quadrature.
pub fn w2sq_density_vs_uniform(measure: &MeasureSpec) -> Result<f64> {
    if measure.space != SpaceModel::Circle {
        return Err(Error::NotCircle(format!("{:?}", measure.space)));
    }
    let MeasureKind::Mixture { terms, .. } = &measure.kind else {
        return Err(Error::UnsupportedMeasure("quantile integration needs a mixture density".into()));
    };
    let g = |x: f64| x - mixture_cdf(x, terms);
    let f = |x: f64| measure.density(&[x]);
    let mean = adaptive_simpson(|x| g(x) * f(x), 0.0, 1.0, 1e-12)?;
    let sq = adaptive_simpson(|x| g(x) * g(x) * f(x), 0.0, 1.0, 1e-12)?;
    Ok((sq - mean * mean).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_vs_itself_is_zero_through_atoms() {
        // a fine equal-weight discretization of uniform has tiny distance
        let points: Vec<Point> = (0..1000).map(|i| Point::circle((i as f64 + 0.5) / 1000.0)).collect();
        let v = w2sq_points_vs_uniform(&points).unwrap();
        assert!(v < 1e-7, "v = {v}");
    }

    #[test]
    fn point_mass_vs_uniform_is_one_twelfth() {
        let v = w2sq_atoms_vs_uniform(&[(Point::circle(0.0), 1.0)]).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
        // invariance under rotation of the atom
        let v = w2sq_atoms_vs_uniform(&[(Point::circle(0.73), 1.0)]).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_pair_vs_uniform_is_one_48th() {
        let atoms = vec![(Point::circle(0.0), 0.5), (Point::circle(0.5), 0.5)];
        let v = w2sq_atoms_vs_uniform(&atoms).unwrap();
        assert!((v - 1.0 / 48.0).abs() < 1e-15, "v = {v}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        let terms = vec![TrigTerm::new(vec![1], 0.5, 0.0), TrigTerm::new(vec![2], 0.0, 0.2)];
        for i in 0..50 {
            let u = -1.3 + 3.1 * i as f64 / 49.0;
            let x = mixture_quantile(u, &terms, 0.2);
            assert!((mixture_cdf(x, &terms) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn cost_integral_matches_quadrature() {
        let terms = vec![TrigTerm::new(vec![1], 0.5, 0.0), TrigTerm::new(vec![3], 0.1, -0.2)];
        let density = |v: f64| {
            1.0 + 0.5 * (2.0 * PI * v).cos() + 0.1 * (6.0 * PI * v).cos()
                - 0.2 * (6.0 * PI * v).sin()
        };
        let (x, v0, v1) = (0.3, -0.4, 0.9);
        let direct =
            adaptive_simpson(|v| (x - v) * (x - v) * density(v), v0, v1, 1e-12).unwrap();
        let closed = cost_integral(x, v0, v1, &terms);
        assert!((direct - closed).abs() < 1e-10, "{direct} vs {closed}");
    }

    #[test]
    fn mixture_target_reduces_to_uniform_when_flat() {
        // zero-amplitude mixture behaves exactly like uniform
        let target = MeasureSpec::mixture(
            SpaceModel::Circle,
            1.0,
            vec![TrigTerm::new(vec![1], 0.0, 0.0)],
        )
        .unwrap();
        let atoms = vec![(Point::circle(0.2), 0.5), (Point::circle(0.7), 0.5)];
        let via_shift = w2sq_circle(&atoms, &target).unwrap();
        let closed = w2sq_atoms_vs_uniform(&atoms).unwrap();
        assert!((via_shift - closed).abs() < 1e-10, "{via_shift} vs {closed}");
    }

    #[test]
    fn density_vs_uniform_closed_form() {
        // density 1 + 0.5 cos(2 pi x): variance formula gives 1/(32 pi^2)
        let m = MeasureSpec::mixture(
            SpaceModel::Circle,
            0.5,
            vec![TrigTerm::new(vec![1], 0.5, 0.0)],
        )
        .unwrap();
        let v = w2sq_density_vs_uniform(&m).unwrap();
        let expect = 1.0 / (32.0 * PI * PI);
        assert!((v - expect).abs() < 1e-11, "{v} vs {expect}");
    }

    #[test]
    fn atoms_vs_mixture_cross_checks_against_discretization() {
        use crate::transport::w2sq_discrete;
        let target = MeasureSpec::mixture(
            SpaceModel::Circle,
            0.5,
            vec![TrigTerm::new(vec![1], 0.5, 0.0)],
        )
        .unwrap();
        let atoms = vec![
            (Point::circle(0.1), 0.3),
            (Point::circle(0.45), 0.45),
            (Point::circle(0.8), 0.25),
        ];
        let exact = w2sq_circle(&atoms, &target).unwrap();
        // discretize the target density on 2000 cells by cell mass
        let m = 2000;
        let mut cells = Vec::with_capacity(m);
        let mut masses = Vec::with_capacity(m);
        for i in 0..m {
            let a = i as f64 / m as f64;
            let b = (i + 1) as f64 / m as f64;
            let mass = mixture_cdf(b, match &target.kind {
                MeasureKind::Mixture { terms, .. } => terms,
                _ => unreachable!(),
            }) - mixture_cdf(
                a,
                match &target.kind {
                    MeasureKind::Mixture { terms, .. } => terms,
                    _ => unreachable!(),
                },
            );
            cells.push(Point::circle(0.5 * (a + b)));
            masses.push(mass);
        }
        let total: f64 = masses.iter().sum();
        let nu: Vec<(Point, f64)> =
            cells.into_iter().zip(masses.into_iter().map(|w| w / total)).collect();
        let approx = w2sq_discrete(&atoms, &nu, SpaceModel::Circle, 10_000_000).unwrap();
        // discretization moves mass at most half a cell: W2 shift <= 1/(2m)
        let band = 1.0 / (2.0 * m as f64);
        let lo = (exact.sqrt() - band).max(0.0).powi(2);
        let hi = (exact.sqrt() + band).powi(2);
        assert!(approx >= lo - 1e-12 && approx <= hi + 1e-12, "{approx} not in [{lo}, {hi}]");
    }
}
