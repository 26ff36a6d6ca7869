//! Lubotzky-Phillips-Sarnak generator sets.
//!
//! For a prime `p = 1 mod 4` the `p+1` integer quaternions of norm `p` with
//! positive odd first coordinate, rescaled by `1/sqrt(p)`, form a symmetric
//! equal-weight set on SU(2) (or SO(3) after identifying signs) whose Markov
//! operator attains the smallest possible spectral radius `2 sqrt(p)/(p+1)`
//! among symmetric sets of that size.

use crate::error::{Error, Result};
use crate::measure::MeasureSpec;
use crate::quaternion::Quaternion;
use crate::space::{Point, SpaceModel};

/// The equal-weight LPS generator measure on `SU2` or `SO3`.
///
/// Atom order is deterministic: lexicographic in the integer coordinates
/// `(a, b, c, d)`, which makes the output reproducible bit for bit.
pub fn lps_generators(p: u64, target: SpaceModel) -> Result<MeasureSpec> {
    if !target.is_group_sphere() {
        return Err(Error::UnsupportedMeasure("LPS generators live on SU2 or SO3".into()));
    }
    if p % 4 != 1 || !is_prime(p) {
        return Err(Error::BadLpsPrime(p));
    }
    let mut ints = integer_norm_p_quaternions(p);
    ints.sort();
    let scale = 1.0 / (p as f64).sqrt();
    let weight = 1.0 / ints.len() as f64;
    let atoms: Vec<(Point, f64)> = ints
        .into_iter()
        .map(|(a, b, c, d)| {
            let q = Quaternion::new(
                a as f64 * scale,
                b as f64 * scale,
                c as f64 * scale,
                d as f64 * scale,
            );
            let q = if target == SpaceModel::SO3 { q.canonical_mod_sign() } else { q };
            (Point::Rotation(q.normalized()), weight)
        })
        .collect();
    MeasureSpec::atomic(target, atoms)
}

/// All integer solutions of `a^2+b^2+c^2+d^2 = p` with `a` odd positive.
fn integer_norm_p_quaternions(p: u64) -> Vec<(i64, i64, i64, i64)> {
    let pi = p as i64;
    let bound = (p as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    let mut a = 1i64;
    while a * a <= pi {
        for b in -bound..=bound {
            let ab = a * a + b * b;
            if ab > pi {
                continue;
            }
            for c in -bound..=bound {
                let abc = ab + c * c;
                if abc > pi {
                    continue;
                }
                let rem = pi - abc;
                let d = (rem as f64).sqrt().round() as i64;
                if d * d == rem {
                    if d == 0 {
                        out.push((a, b, c, 0));
                    } else {
                        out.push((a, b, c, d));
                        out.push((a, b, c, -d));
                    }
                }
            }
        }
        a += 2;
    }
    out
}

/// The documented exact spectral radius `2 sqrt(p) / (p+1)` of the LPS set
/// of size `p+1` (smallest possible among symmetric sets of that size).
pub fn lps_spectral_radius(p: u64) -> f64 {
    2.0 * (p as f64).sqrt() / (p as f64 + 1.0)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}
