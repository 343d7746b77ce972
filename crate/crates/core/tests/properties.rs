use kawahara_core::observability::{observability_gramian, observed_energy};
use kawahara_core::profile::{smooth_step, TimeProfile};
use kawahara_core::spectral::{evolve, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(l: f64, coeffs: Vec<(f64, f64)>) -> SpectralField {
    let order = (coeffs.len() - 1) / 2;
    SpectralField::new(l, order, coeffs.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (1usize..6).prop_flat_map(|n| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * n + 1))
}

proptest! {
    #[test]
    fn evolution_preserves_norm(c in coeffs(), l in 0.5f64..4.0, t in -3.0f64..3.0) {
        let u = field(l, c);
        let d = (evolve(&u, t).norm() - u.norm()).abs();
        prop_assert!(d <= 1e-13 * (1.0 + u.norm()));
    }

    #[test]
    fn evolution_is_reversible(c in coeffs(), t in -2.0f64..2.0) {
        let u = field(std::f64::consts::PI, c);
        let back = evolve(&evolve(&u, t), -t);
        prop_assert!(back.sub(&u).unwrap().norm() <= 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn observed_energy_within_gramian_spectrum(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9), l in 0.1f64..0.9) {
        let g = observability_gramian(4, 1.0, l, 1.0).unwrap();
        let u = field(1.0, c);
        let e = observed_energy(&g, &u).unwrap();
        let n2 = u.norm_sqr();
        prop_assert!(e >= g.eig_min() * n2 - 1e-12 && e <= g.eig_max() * n2 + 1e-12);
        prop_assert!(e <= n2 * (1.0 + 1e-12));
    }

    #[test]
    fn smooth_step_is_monotone(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(smooth_step(lo) <= smooth_step(hi));
        prop_assert!((0.0..=1.0).contains(&smooth_step(a)));
    }

    #[test]
    fn plateau_profiles_stay_in_unit_interval(t in -1.0f64..2.0) {
        let p = TimeProfile::Plateau { a: 0.1, b: 0.3, c: 0.6, d: 0.9 };
        let v = p.value(t);
        prop_assert!((0.0..=1.0).contains(&v));
        let m = TimeProfile::Mollified { base: Box::new(p), width: 0.05 };
        let w = m.value(t);
        prop_assert!((-1e-14..=1.0 + 1e-14).contains(&w));
    }
}
