use std::f64::consts::PI;

use erestab::central_config::{collinear_three_primaries, restricted_position, MassSystem};
use erestab::linearization::{compute_d, spectral_params, StabilityParams};
use erestab::maslov_index::{morse_index_with, Omega};
use erestab::monodromy::{integrate_fundamental, j4};
use erestab::polygon_config::hn;
use nalgebra::Vector2;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hn_is_periodic_and_even(n in 2usize..12, x in 0.05f64..0.9, u in -3.0f64..3.0) {
        let base = hn(n, x, u).unwrap();
        let shifted = hn(n, x, u + 2.0 * PI / n as f64).unwrap();
        let mirrored = hn(n, x, -u).unwrap();
        prop_assert!((base - shifted).abs() < 1e-12 * base.abs().max(1.0));
        prop_assert!((base - mirrored).abs() < 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn alpha_beta_roundtrip(alpha in -1.0f64..3.0, beta in 0.0f64..3.0, e in 0.0f64..0.9) {
        let p = StabilityParams::from_alpha_beta(alpha, beta, e).unwrap();
        let q = StabilityParams::from_eigenvalues(p.lambda4, p.lambda3, e).unwrap();
        prop_assert!((q.alpha - alpha).abs() < 1e-12);
        prop_assert!((q.beta - beta).abs() < 1e-12);
        prop_assert!(q.lambda3 >= q.lambda4);
    }

    #[test]
    fn hls_family_obeys_trace_law(b in 0.0f64..=9.0, e in 0.0f64..0.9) {
        let p = StabilityParams::from_hls(b, e).unwrap();
        prop_assert!((p.lambda3 + p.lambda4 - 3.0).abs() < 1e-12);
        prop_assert!((p.alpha - 0.5).abs() < 1e-12);
        prop_assert!((9.0 - 4.0 * p.beta * p.beta - b).abs() < 1e-10);
    }

    #[test]
    fn collinear_triples_are_normalized(m1 in 0.01f64..1.0, m2 in 0.01f64..1.0, m3 in 0.01f64..1.0) {
        let sys = MassSystem::collinear(&[m1, m2, m3]).unwrap();
        let cfg = collinear_three_primaries(&sys).unwrap();
        let com: Vector2<f64> = cfg.masses.iter().zip(&cfg.primary_positions).map(|(m, a)| *m * a).sum();
        prop_assert!(com.norm() < 1e-12);
        prop_assert!(cfg.inertia_residual < 1e-12);
        prop_assert!(cfg.cc_residual < 1e-10);
        prop_assert!(cfg.primary_positions.iter().all(|a| a.y == 0.0));
    }

    #[test]
    fn restricted_point_gives_hls_spectrum(m1 in 0.02f64..1.0, m2 in 0.02f64..1.0, m3 in 0.02f64..1.0) {
        let sys = MassSystem::collinear(&[m1, m2, m3]).unwrap();
        let cfg = restricted_position(&collinear_three_primaries(&sys).unwrap(), Vector2::new(0.0, 1.0)).unwrap();
        let p = spectral_params(&compute_d(&cfg).unwrap(), 0.0).unwrap();
        prop_assert!((p.lambda3 + p.lambda4 - 3.0).abs() < 1e-9);
        prop_assert!(p.lambda4 > -1e-9);
        let b = p.beta_hls.unwrap();
        prop_assert!((-1e-8..=9.0 + 1e-8).contains(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monodromy_is_symplectic_with_unit_determinant(b in 0.0f64..=9.0, e in 0.0f64..0.6) {
        let m = integrate_fundamental(&StabilityParams::from_hls(b, e).unwrap(), 1e-12).unwrap();
        let g = m.gamma_end;
        let r = (g.transpose() * j4() * g - j4()).amax();
        prop_assert!(r < 1e-8 * g.norm_squared().max(1.0));
        prop_assert!((g.determinant() - 1.0).abs() < 1e-7 * g.norm_squared().powi(2).max(1.0));
    }

    #[test]
    fn index_is_symmetric_under_conjugation(b in 0.1f64..8.9, e in 0.0f64..0.5, rho in 0.01f64..0.49) {
        let p = StabilityParams::from_hls(b, e).unwrap();
        let levels = [64, 128, 256];
        let a = morse_index_with(&p, Omega::from_rho(rho), &levels).unwrap();
        let c = morse_index_with(&p, Omega::from_rho(1.0 - rho), &levels).unwrap();
        prop_assert_eq!((a.phi, a.nu), (c.phi, c.nu));
    }
}
