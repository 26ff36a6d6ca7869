//! Property tests for the structural invariants of the library.

use proptest::prelude::*;
use w2lab_core::fourier::{fourier_torus_points, spectral_radius, PacketData};
use w2lab_core::space::{Point, SpaceModel};
use w2lab_core::transport::circle::w2sq_atoms_vs_uniform;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Rotating every atom by the same shift cannot change the distance to
    /// the uniform measure.
    #[test]
    fn circle_distance_to_uniform_is_rotation_invariant(
        xs in prop::collection::vec(0.0f64..1.0, 1..12),
        shift in 0.0f64..1.0,
    ) {
        let w = 1.0 / xs.len() as f64;
        let base: Vec<(Point, f64)> = xs.iter().map(|&x| (Point::circle(x), w)).collect();
        let rotated: Vec<(Point, f64)> =
            xs.iter().map(|&x| (Point::circle(x + shift), w)).collect();
        let a = w2sq_atoms_vs_uniform(&base).unwrap();
        let b = w2sq_atoms_vs_uniform(&rotated).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    /// Empirical coefficients of probability measures stay in the unit disk
    /// and are conjugate-symmetric.
    #[test]
    fn empirical_torus_coefficients_bounded_and_symmetric(
        xs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20),
    ) {
        let points: Vec<Point> = xs.iter().map(|&(a, b)| Point::torus(&[a, b])).collect();
        let packet = fourier_torus_points(SpaceModel::FlatTorus(2), &points, 3).unwrap();
        let PacketData::Torus { coeffs, .. } = &packet.data else { unreachable!() };
        for (k, c) in coeffs {
            prop_assert!(c.norm() <= 1.0 + 1e-12);
            let neg: Vec<i64> = k.iter().map(|&v| -v).collect();
            let conj = coeffs.iter().find(|(kk, _)| *kk == neg).unwrap().1;
            prop_assert!((c.conj() - conj).norm() < 1e-12);
        }
        let rep = spectral_radius(&packet);
        prop_assert!(rep.q_at_cutoff <= 1.0);
        prop_assert!(!rep.is_exact);
    }

    /// The spectral radius report is monotone nondecreasing in the cutoff.
    #[test]
    fn spectral_radius_monotone_in_cutoff(
        xs in prop::collection::vec(0.0f64..1.0, 2..10),
    ) {
        let points: Vec<Point> = xs.iter().map(|&x| Point::circle(x)).collect();
        let mut prev = 0.0;
        for k_max in 1..=8i64 {
            let packet = fourier_torus_points(SpaceModel::Circle, &points, k_max).unwrap();
            let q = spectral_radius(&packet).q_at_cutoff;
            prop_assert!(q >= prev - 1e-14);
            prev = q;
        }
    }

    /// Distances are bounded by the diameter on every space.
    #[test]
    fn torus_distance_at_most_diameter(
        a in (0.0f64..1.0, 0.0f64..1.0),
        b in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let s = SpaceModel::FlatTorus(2);
        let d = s.distance(&Point::torus(&[a.0, a.1]), &Point::torus(&[b.0, b.1]));
        prop_assert!(d <= s.diameter() + 1e-15);
    }
}
