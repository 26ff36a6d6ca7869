//! Fourier coefficients of measures, spectral radius of the convolution
//! operator, and convolution powers.
//!
//! Torus coefficients use the character convention
//! `mu_hat(k) = integral of exp(-2 pi i k.x) d mu`, enumerated over
//! `0 < |k|^2 <= k_max^2`. Group coefficients are the matrix integrals
//! `nu_hat(pi_n) = integral of pi_n(g)* d nu` over the irreducible unitary
//! representations up to dimension `n_max` (odd dimensions only on SO(3),
//! which is handled through its double cover).
//!
//! The spectral radius `q` of the Markov operator restricted to mean-zero
//! functions is a supremum over infinitely many frequencies; reports carry
//! the cutoff and declare exactness only for measures with finite frequency
//! support inside the cutoff. For the documented generator sets of
//! [`crate::lps`] the closed-form value is available separately.

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureSpec};
use crate::space::{Point, SpaceModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Truncated Fourier data of a measure.
#[derive(Debug, Clone)]
pub struct FourierPacket {
    pub space: SpaceModel,
    pub data: PacketData,
    /// True when every nonzero frequency of the measure lies inside the
    /// cutoff (closed-form mixtures and the uniform measure).
    pub finite_support: bool,
}

#[derive(Debug, Clone)]
pub enum PacketData {
    Torus {
        /// Cutoff: frequencies with `0 < |k|^2 <= max_norm_sq` are covered.
        max_norm_sq: i64,
        /// Nonzero coefficients, sorted by `(|k|^2, lexicographic)`.
        coeffs: Vec<(Vec<i64>, Complex64)>,
    },
    Group {
        n_max: usize,
        /// `(n, nu_hat(pi_n))` in ascending `n`.
        blocks: Vec<(usize, DMatrix<Complex64>)>,
    },
}

/// Spectral radius report, always cutoff-qualified.
#[derive(Debug, Clone)]
pub struct SpectralRadiusReport {
    /// Max singular value over the enumerated frequencies.
    pub q_at_cutoff: f64,
    pub attaining: Attaining,
    pub cutoff: String,
    /// True only when the measure has finite frequency support inside the
    /// cutoff, so the reported value is the exact supremum.
    pub is_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attaining {
    TorusFrequency(Vec<i64>),
    GroupBlock(usize),
    Nothing,
}

/// Lattice frequencies `0 < |k|^2 <= k_max^2` in `(norm, lex)` order.
fn lattice_frequencies(d: usize, k_max: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-k_max; d];
    loop {
        let norm_sq: i64 = cur.iter().map(|&v| v * v).sum();
        if norm_sq > 0 && norm_sq <= k_max * k_max {
            out.push(cur.clone());
        }
        let mut j = 0;
        loop {
            cur[j] += 1;
            if cur[j] <= k_max {
                break;
            }
            cur[j] = -k_max;
            j += 1;
            if j == d {
                out.sort_by_key(|k| {
                    (k.iter().map(|&v| v * v).sum::<i64>(), k.clone())
                });
                return out;
            }
        }
    }
}

/// Fourier coefficients of a measure on a torus up to frequency norm `k_max`.
///
/// Atomic measures use exponential sums, mixtures their closed form, the
/// uniform measure is identically zero away from frequency 0.
pub fn fourier_torus(measure: &MeasureSpec, k_max: i64) -> Result<FourierPacket> {
    if !measure.space.is_torus() {
        return Err(Error::UnsupportedMeasure("torus Fourier data needs a torus space".into()));
    }
    let d = measure.space.dim() as usize;
    let (coeffs, finite) = match &measure.kind {
        MeasureKind::Uniform => (Vec::new(), true),
        MeasureKind::Mixture { terms, .. } => {
            let mut coeffs: Vec<(Vec<i64>, Complex64)> = Vec::new();
            let mut all_inside = true;
            for term in terms {
                let norm_sq: i64 = term.freq.iter().map(|&v| v * v).sum();
                if norm_sq > k_max * k_max {
                    all_inside = false;
                    continue;
                }
                // int e^{-2 pi i k.x} (a cos(2 pi k.x) + b sin(2 pi k.x)) dx
                //   = (a - i b)/2 at +k and (a + i b)/2 at -k
                let plus = Complex64::new(term.cos_amp / 2.0, -term.sin_amp / 2.0);
                let minus = plus.conj();
                coeffs.push((term.freq.clone(), plus));
                coeffs.push((term.freq.iter().map(|&v| -v).collect(), minus));
            }
            coeffs.sort_by_key(|(k, _)| (k.iter().map(|&v| v * v).sum::<i64>(), k.clone()));
            (coeffs, all_inside)
        }
        MeasureKind::Atomic(atoms) => {
            let points: Vec<&Point> = atoms.iter().map(|(p, _)| p).collect();
            let weights: Vec<f64> = atoms.iter().map(|(_, w)| *w).collect();
            (exponential_sums(d, k_max, &points, &weights), false)
        }
    };
    Ok(FourierPacket {
        space: measure.space,
        data: PacketData::Torus { max_norm_sq: k_max * k_max, coeffs },
        finite_support: finite,
    })
}

/// Fourier coefficients of an equal-weight empirical measure on a torus.
pub fn fourier_torus_points(space: SpaceModel, points: &[Point], k_max: i64) -> Result<FourierPacket> {
    if !space.is_torus() {
        return Err(Error::UnsupportedMeasure("torus Fourier data needs a torus space".into()));
    }
    let d = space.dim() as usize;
    let w = 1.0 / points.len() as f64;
    let refs: Vec<&Point> = points.iter().collect();
    let weights = vec![w; points.len()];
    Ok(FourierPacket {
        space,
        data: PacketData::Torus {
            max_norm_sq: k_max * k_max,
            coeffs: exponential_sums(d, k_max, &refs, &weights),
        },
        finite_support: false,
    })
}

fn exponential_sums(
    d: usize,
    k_max: i64,
    points: &[&Point],
    weights: &[f64],
) -> Vec<(Vec<i64>, Complex64)> {
    let freqs = lattice_frequencies(d, k_max);
    let mut coeffs = Vec::with_capacity(freqs.len());
    for k in freqs {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &w) in points.iter().zip(weights.iter()) {
            let x = p.torus_coords().expect("torus point");
            let phase: f64 =
                -2.0 * PI * k.iter().zip(x.iter()).map(|(&ki, &xi)| ki as f64 * xi).sum::<f64>();
            acc += Complex64::from_polar(w, phase);
        }
        coeffs.push((k, acc));
    }
    coeffs
}

/// Matrix Fourier coefficients of an atomic measure on SU(2) or SO(3) up to
/// representation dimension `n_max`. On SO(3) only odd dimensions carry
/// mass (the symmetric lift through the double cover kills even ones).
pub fn fourier_group(measure: &MeasureSpec, n_max: usize) -> Result<FourierPacket> {
    if !measure.space.is_group_sphere() {
        return Err(Error::UnsupportedMeasure("group Fourier data needs SU2 or SO3".into()));
    }
    let atoms = measure
        .atoms()
        .ok_or_else(|| Error::UnsupportedMeasure("group Fourier data needs an atomic measure".into()))?;
    Ok(FourierPacket {
        space: measure.space,
        data: PacketData::Group {
            n_max,
            blocks: group_blocks(measure.space, atoms, n_max),
        },
        finite_support: false,
    })
}

/// As [`fourier_group`] for an equal-weight list of points.
pub fn fourier_group_points(
    space: SpaceModel,
    points: &[Point],
    n_max: usize,
) -> Result<FourierPacket> {
    if !space.is_group_sphere() {
        return Err(Error::UnsupportedMeasure("group Fourier data needs SU2 or SO3".into()));
    }
    let w = 1.0 / points.len() as f64;
    let atoms: Vec<(Point, f64)> = points.iter().map(|p| (p.clone(), w)).collect();
    Ok(FourierPacket {
        space,
        data: PacketData::Group { n_max, blocks: group_blocks(space, &atoms, n_max) },
        finite_support: false,
    })
}

fn group_blocks(
    space: SpaceModel,
    atoms: &[(Point, f64)],
    n_max: usize,
) -> Vec<(usize, DMatrix<Complex64>)> {
    let (start, step) = if space == SpaceModel::SO3 { (3usize, 2usize) } else { (2, 1) };
    let mut blocks: Vec<(usize, DMatrix<Complex64>)> = Vec::new();
    let mut n = start;
    while n <= n_max {
        blocks.push((n, DMatrix::from_element(n, n, Complex64::new(0.0, 0.0))));
        n += step;
    }
    for (p, w) in atoms {
        let g = p.quaternion().expect("group point");
        let ladder = crate::wigner::wigner_ladder(g, n_max);
        for (n, acc) in blocks.iter_mut() {
            *acc += ladder[*n - 1].adjoint() * Complex64::new(*w, 0.0);
        }
    }
    blocks
}

/// Largest singular value over the enumerated frequencies, with ties broken
/// toward the smaller index.
pub fn spectral_radius(packet: &FourierPacket) -> SpectralRadiusReport {
    match &packet.data {
        PacketData::Torus { max_norm_sq, coeffs } => {
            let mut best = 0.0f64;
            let mut attaining = Attaining::Nothing;
            for (k, c) in coeffs {
                let v = c.norm();
                if v > best + 1e-15 {
                    best = v;
                    attaining = Attaining::TorusFrequency(k.clone());
                }
            }
            SpectralRadiusReport {
                q_at_cutoff: best.min(1.0),
                attaining,
                cutoff: format!("|k|^2 <= {max_norm_sq}"),
                is_exact: packet.finite_support,
            }
        }
        PacketData::Group { n_max, blocks } => {
            let mut best = 0.0f64;
            let mut attaining = Attaining::Nothing;
            for (n, m) in blocks {
                let v = largest_singular_value(m);
                if v > best + 1e-15 {
                    best = v;
                    attaining = Attaining::GroupBlock(*n);
                }
            }
            SpectralRadiusReport {
                q_at_cutoff: best.min(1.0),
                attaining,
                cutoff: format!("n <= {n_max}"),
                is_exact: packet.finite_support,
            }
        }
    }
}

/// Largest singular value of a complex matrix.
pub fn largest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().max()
}

/// All singular values of a block, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sv = m.clone().singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Fourier data of the `n`-fold convolution power: entrywise matrix power on
/// groups, scalar power on tori.
pub fn convolution_power(packet: &FourierPacket, n: u32) -> FourierPacket {
    assert!(n >= 1, "convolution power needs n >= 1");
    let data = match &packet.data {
        PacketData::Torus { max_norm_sq, coeffs } => PacketData::Torus {
            max_norm_sq: *max_norm_sq,
            coeffs: coeffs.iter().map(|(k, c)| (k.clone(), c.powu(n))).collect(),
        },
        PacketData::Group { n_max, blocks } => PacketData::Group {
            n_max: *n_max,
            blocks: blocks.iter().map(|(d, m)| (*d, matrix_power(m, n))).collect(),
        },
    };
    FourierPacket { space: packet.space, data, finite_support: packet.finite_support }
}

fn matrix_power(m: &DMatrix<Complex64>, mut n: u32) -> DMatrix<Complex64> {
    let mut base = m.clone();
    let mut acc = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    while n > 0 {
        if n & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    acc
}

/// Hermitian residual `||M - M*||` of a block; symmetric measures must give
/// Hermitian coefficients.
pub fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::TrigTerm;
    use crate::process::haar_quaternion;
    use crate::quaternion::Quaternion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn coeff_at<'a>(packet: &'a FourierPacket, k: &[i64]) -> Option<&'a Complex64> {
        match &packet.data {
            PacketData::Torus { coeffs, .. } => {
                coeffs.iter().find(|(kk, _)| kk.as_slice() == k).map(|(_, c)| c)
            }
            _ => None,
        }
    }

    #[test]
    fn uniform_has_no_nonzero_coefficients() {
        let m = MeasureSpec::uniform(SpaceModel::Circle);
        let p = fourier_torus(&m, 5).unwrap();
        let PacketData::Torus { coeffs, .. } = &p.data else { unreachable!() };
        assert!(coeffs.is_empty());
        let r = spectral_radius(&p);
        assert_eq!(r.q_at_cutoff, 0.0);
        assert!(r.is_exact);
    }

    #[test]
    fn point_mass_at_origin_has_unit_coefficients() {
        let m = MeasureSpec::atomic(SpaceModel::Circle, vec![(Point::circle(0.0), 1.0)]).unwrap();
        let p = fourier_torus(&m, 4).unwrap();
        let PacketData::Torus { coeffs, .. } = &p.data else { unreachable!() };
        assert_eq!(coeffs.len(), 8);
        for (_, c) in coeffs {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn half_cosine_density_coefficients() {
        let m =
            MeasureSpec::mixture(SpaceModel::Circle, 0.5, vec![TrigTerm::new(vec![1], 0.5, 0.0)])
                .unwrap();
        let p = fourier_torus(&m, 3).unwrap();
        assert!((coeff_at(&p, &[1]).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((coeff_at(&p, &[-1]).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let r = spectral_radius(&p);
        assert!((r.q_at_cutoff - 0.25).abs() < 1e-15);
        assert!(r.is_exact);
        assert_eq!(r.attaining, Attaining::TorusFrequency(vec![-1]));
    }

    #[test]
    fn conjugate_symmetry_for_real_measures() {
        let m = MeasureSpec::atomic(
            SpaceModel::FlatTorus(2),
            vec![
                (Point::torus(&[0.13, 0.7]), 0.25),
                (Point::torus(&[0.5, 0.23]), 0.375),
                (Point::torus(&[0.9, 0.01]), 0.375),
            ],
        )
        .unwrap();
        let p = fourier_torus(&m, 3).unwrap();
        let PacketData::Torus { coeffs, .. } = &p.data else { unreachable!() };
        for (k, c) in coeffs {
            let neg: Vec<i64> = k.iter().map(|&v| -v).collect();
            let cc = coeff_at(&p, &neg).unwrap();
            assert!((c.conj() - cc).norm() < 1e-12);
        }
    }

    #[test]
    fn plancherel_partial_sums_nondecreasing_in_cutoff() {
        let m = MeasureSpec::atomic(
            SpaceModel::Circle,
            vec![(Point::circle(0.11), 0.5), (Point::circle(0.63), 0.5)],
        )
        .unwrap();
        let mut prev = 0.0;
        for k_max in 1..=12i64 {
            let p = fourier_torus(&m, k_max).unwrap();
            let PacketData::Torus { coeffs, .. } = &p.data else { unreachable!() };
            let sum: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
            assert!(sum >= prev - 1e-12);
            prev = sum;
        }
        // direct check at k_max = 12 against the defining exponential sums
        let p = fourier_torus(&m, 12).unwrap();
        let PacketData::Torus { coeffs, .. } = &p.data else { unreachable!() };
        for (k, c) in coeffs {
            let direct = 0.5 * Complex64::from_polar(1.0, -2.0 * PI * k[0] as f64 * 0.11)
                + 0.5 * Complex64::from_polar(1.0, -2.0 * PI * k[0] as f64 * 0.63);
            assert!((c - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_mass_gives_identity_blocks() {
        let m = MeasureSpec::atomic(
            SpaceModel::SU2,
            vec![(Point::Rotation(Quaternion::ONE), 1.0)],
        )
        .unwrap();
        let p = fourier_group(&m, 6).unwrap();
        let PacketData::Group { blocks, .. } = &p.data else { unreachable!() };
        for (n, b) in blocks {
            assert!((b - DMatrix::<Complex64>::identity(*n, *n)).norm() < 1e-12);
        }
        let r = spectral_radius(&p);
        assert!((r.q_at_cutoff - 1.0).abs() < 1e-12);
        assert_eq!(r.attaining, Attaining::GroupBlock(2));
    }

    #[test]
    fn haar_sample_coefficients_are_clt_small() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 10_000;
        let points: Vec<Point> =
            (0..n).map(|_| Point::Rotation(haar_quaternion(&mut rng))).collect();
        let p = fourier_group_points(SpaceModel::SU2, &points, 2).unwrap();
        let PacketData::Group { blocks, .. } = &p.data else { unreachable!() };
        let v = largest_singular_value(&blocks[0].1);
        assert!(v <= 5e-2, "||nu_hat(pi_2)|| = {v}");
    }

    #[test]
    fn symmetric_measures_have_hermitian_blocks() {
        let g = Quaternion::new(0.3, 0.2, 0.7, 0.61).normalized();
        let m = MeasureSpec::atomic(
            SpaceModel::SU2,
            vec![(Point::Rotation(g), 0.5), (Point::Rotation(g.inverse()), 0.5)],
        )
        .unwrap();
        let p = fourier_group(&m, 8).unwrap();
        let PacketData::Group { blocks, .. } = &p.data else { unreachable!() };
        for (_, b) in blocks {
            assert!(hermitian_residual(b) < 1e-12);
        }
    }

    #[test]
    fn so3_packet_has_only_odd_blocks() {
        let g = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        let m = MeasureSpec::atomic(SpaceModel::SO3, vec![(Point::Rotation(g), 1.0)]).unwrap();
        let p = fourier_group(&m, 7).unwrap();
        let PacketData::Group { blocks, .. } = &p.data else { unreachable!() };
        let dims: Vec<usize> = blocks.iter().map(|(n, _)| *n).collect();
        assert_eq!(dims, vec![3, 5, 7]);
    }

    #[test]
    fn convolution_power_is_homomorphic_for_point_masses() {
        let g = Quaternion::new(0.6, 0.0, 0.8, 0.0);
        let m = MeasureSpec::atomic(SpaceModel::SU2, vec![(Point::rotation(g), 1.0)]).unwrap();
        let p = fourier_group(&m, 5).unwrap();
        let p3 = convolution_power(&p, 3);
        let g3 = g.mul(&g).mul(&g);
        let m3 = MeasureSpec::atomic(SpaceModel::SU2, vec![(Point::rotation(g3), 1.0)]).unwrap();
        let q3 = fourier_group(&m3, 5).unwrap();
        let (PacketData::Group { blocks: a, .. }, PacketData::Group { blocks: b, .. }) =
            (&p3.data, &q3.data)
        else {
            unreachable!()
        };
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn scalar_convolution_power_cubes_circle_coefficient() {
        let m =
            MeasureSpec::mixture(SpaceModel::Circle, 0.5, vec![TrigTerm::new(vec![1], 0.5, 0.0)])
                .unwrap();
        let p = convolution_power(&fourier_torus(&m, 2).unwrap(), 3);
        assert!((coeff_at(&p, &[1]).unwrap().re - 0.015625).abs() < 1e-15);
        let r = spectral_radius(&p);
        assert!((r.q_at_cutoff - 0.015625).abs() < 1e-15);
    }

    #[test]
    fn convolution_power_one_is_identity() {
        let m = MeasureSpec::atomic(
            SpaceModel::Circle,
            vec![(Point::circle(0.2), 0.5), (Point::circle(0.8), 0.5)],
        )
        .unwrap();
        let p = fourier_torus(&m, 3).unwrap();
        let p1 = convolution_power(&p, 1);
        let (PacketData::Torus { coeffs: a, .. }, PacketData::Torus { coeffs: b, .. }) =
            (&p.data, &p1.data)
        else {
            unreachable!()
        };
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn mixture_sampler_empirical_coefficients_converge() {
        use crate::process::{ProcessKind, ProcessSpec};
        let m =
            MeasureSpec::mixture(SpaceModel::Circle, 0.5, vec![TrigTerm::new(vec![1], 0.5, 0.0)])
                .unwrap();
        let n = 100_000usize;
        let tr = ProcessSpec::new(ProcessKind::Iid(m.clone()), n, 77).sample().unwrap();
        let emp = fourier_torus_points(SpaceModel::Circle, &tr.points, 3).unwrap();
        let exact = fourier_torus(&m, 3).unwrap();
        let tol = 3.0 / (n as f64).sqrt();
        let PacketData::Torus { coeffs, .. } = &emp.data else { unreachable!() };
        for (k, c) in coeffs {
            let reference = coeff_at(&exact, k).copied().unwrap_or(Complex64::new(0.0, 0.0));
            assert!((c - reference).norm() <= tol, "k={k:?}: {c} vs {reference}");
        }
    }
}
