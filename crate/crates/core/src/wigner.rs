//! Irreducible unitary representations of SU(2).
//!
//! The dimension-`n` representation acts on homogeneous polynomials of
//! degree `n-1` in two variables. The quaternion `a + bi + cj + dk` maps to
//! the SU(2) matrix `[[alpha, beta], [-conj(beta), conj(alpha)]]` with
//! `alpha = a + bi`, `beta = c + di`, acting on a row vector `(x, y)` from
//! the right. With the binomially normalized monomial basis
//! `e_j = sqrt(C(n-1, j)) x^{n-1-j} y^j` the matrices are exactly unitary,
//! and the basis-free construction avoids Euler angle branch cuts.

use crate::quaternion::Quaternion;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dimension-`n` irreducible representation matrix of `g`, `n >= 1`.
///
/// `n = 1` is the trivial representation, `n = 2` the defining matrix of the
/// quaternion itself.
pub fn wigner_matrix(g: &Quaternion, n: usize) -> DMatrix<Complex64> {
    wigner_ladder(g, n).pop().expect("n >= 1")
}

/// All representation matrices of dimensions `1..=n_max` (index `n-1`).
///
/// Built by the spin-1/2 coupling ladder: the dimension-`n+1` block of
/// `D(n) (x) D(2)` is extracted with the closed-form coupling weights
/// `sqrt((n-i)/n)` and `sqrt(i/n)`. A single-sum monomial formula suffers
/// catastrophic cancellation for n around 40; the ladder keeps every
/// coefficient at most 1, so errors only accumulate linearly in n.
pub fn wigner_ladder(g: &Quaternion, n_max: usize) -> Vec<DMatrix<Complex64>> {
    assert!(n_max >= 1, "representation dimension must be at least 1");
    let alpha = Complex64::new(g.a, g.b);
    let beta = Complex64::new(g.c, g.d);
    let u = [[alpha, beta], [-beta.conj(), alpha.conj()]];

    let mut out = Vec::with_capacity(n_max);
    out.push(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
    for n in 1..n_max {
        let prev = &out[n - 1];
        let nf = n as f64;
        // coupling weights onto the top block
        let a: Vec<f64> = (0..=n).map(|i| ((nf - i as f64) / nf).sqrt()).collect();
        let b: Vec<f64> = (0..=n).map(|i| (i as f64 / nf).sqrt()).collect();
        let mut next = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
        for i in 0..=n {
            for k in 0..=n {
                let mut acc = Complex64::new(0.0, 0.0);
                if i < n && k < n {
                    acc += prev[(i, k)] * u[0][0] * (a[i] * a[k]);
                }
                if i < n && k > 0 {
                    acc += prev[(i, k - 1)] * u[0][1] * (a[i] * b[k]);
                }
                if i > 0 && k < n {
                    acc += prev[(i - 1, k)] * u[1][0] * (b[i] * a[k]);
                }
                if i > 0 && k > 0 {
                    acc += prev[(i - 1, k - 1)] * u[1][1] * (b[i] * b[k]);
                }
                next[(i, k)] = acc;
            }
        }
        out.push(next);
    }
    out
}

/// Character of the dimension-`n` representation from the rotation half
/// angle `psi = arccos(a)` of the quaternion: `sin(n psi)/sin(psi)`.
pub fn character(g: &Quaternion, n: usize) -> f64 {
    let psi = g.a.clamp(-1.0, 1.0).acos();
    let nf = n as f64;
    if psi < 1e-8 {
        nf
    } else if std::f64::consts::PI - psi < 1e-8 {
        // limit (-1)^{n+1} n at the antipode
        if n % 2 == 0 {
            -nf
        } else {
            nf
        }
    } else {
        (nf * psi).sin() / psi.sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::haar_quaternion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn op_norm_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn n1_is_trivial() {
        let g = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        let d = wigner_matrix(&g, 1);
        assert_eq!(d.nrows(), 1);
        assert!((d[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn n2_is_defining_matrix() {
        let g = Quaternion::new(0.1, 0.7, -0.3, 0.635).normalized();
        let d = wigner_matrix(&g, 2);
        assert!((d[(0, 0)] - Complex64::new(g.a, g.b)).norm() < 1e-14);
        assert!((d[(0, 1)] - Complex64::new(g.c, g.d)).norm() < 1e-14);
        assert!((d[(1, 0)] - Complex64::new(-g.c, g.d)).norm() < 1e-14);
        assert!((d[(1, 1)] - Complex64::new(g.a, -g.b)).norm() < 1e-14);
    }

    #[test]
    fn unitary_up_to_n40() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..100 {
            let g = haar_quaternion(&mut rng);
            for n in [2usize, 5, 17, 40] {
                let d = wigner_matrix(&g, n);
                let eye = DMatrix::<Complex64>::identity(n, n);
                let res = op_norm_diff(&(d.adjoint() * &d), &eye);
                assert!(res < 1e-10, "n={n}: unitarity residual {res}");
            }
        }
    }

    #[test]
    fn homomorphism_up_to_n20() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..100 {
            let g = haar_quaternion(&mut rng);
            let h = haar_quaternion(&mut rng);
            for n in [2usize, 7, 20] {
                let dgh = wigner_matrix(&g.mul(&h), n);
                let prod = wigner_matrix(&g, n) * wigner_matrix(&h, n);
                let res = op_norm_diff(&dgh, &prod);
                assert!(res < 1e-9, "n={n}: homomorphism residual {res}");
            }
        }
    }

    #[test]
    fn trace_matches_character_formula() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = haar_quaternion(&mut rng);
            for n in 1..=10usize {
                let d = wigner_matrix(&g, n);
                let tr: Complex64 = (0..n).map(|i| d[(i, i)]).sum();
                assert!(tr.im.abs() < 1e-10);
                assert!(
                    (tr.re - character(&g, n)).abs() < 1e-9,
                    "n={n}: trace {} vs character {}",
                    tr.re,
                    character(&g, n)
                );
            }
        }
    }

    #[test]
    fn inverse_maps_to_adjoint() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..20 {
            let g = haar_quaternion(&mut rng);
            for n in [3usize, 8] {
                let d_inv = wigner_matrix(&g.inverse(), n);
                let adj = wigner_matrix(&g, n).adjoint();
                assert!(op_norm_diff(&d_inv, &adj) < 1e-10);
            }
        }
    }

    #[test]
    fn minus_g_flips_sign_on_even_dimensions() {
        let g = Quaternion::new(0.3, 0.4, 0.5, (1.0f64 - 0.5).sqrt()).normalized();
        for n in 2..=7usize {
            let a = wigner_matrix(&g, n);
            let b = wigner_matrix(&g.neg(), n);
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            assert!(op_norm_diff(&a, &(b * Complex64::new(sign, 0.0))) < 1e-12);
        }
    }
}
