use super::coefficients::{coefficient_jets, combine};
use super::space_time_rules;
use super::testfn::{check_admissible, SmoothField};
use super::weight::WeightProfile;
use crate::error::Result;
use crate::quadrature::Resolution;

/// Both sides of the integration-by-parts identity and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    /// `2∫∫ L1(u) L2(u)`.
    pub lhs: f64,
    /// Quadratic form in `u, …, u_xxxx` plus the `ω`-coupled terms.
    pub rhs: f64,
    /// `|lhs − rhs| / (|lhs| + |rhs| + ε_mach)`.
    pub residual: f64,
}

/// Evaluates both sides of
///
/// `2∫∫L1L2 = ∫∫(Mu² + Nu_x² + Ou_xx² + Ru_xxx² + Su_xxxx²)
///            − 2∫∫(E_xx u_xx + 2E_x u_xxx)ω − 2∫∫C1_x u_x ω`
///
/// with `L1 = Au + C1u_xx + Eu_xxxx`, `L2 = Bu_x + C2u_xx + Du_xxx + u_t − u_5x`
/// and `ω = L1 + L2`, by tensor Gauss–Legendre quadrature.
pub fn ibp_identity_check(
    u: &dyn SmoothField,
    w: &WeightProfile,
    s: f64,
    res: Resolution,
) -> Result<IdentityResidual> {
    check_admissible(u, w.half_length(), w.horizon())?;
    let (t_rule, x_rule) = space_time_rules(u, res);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&t, &wt) in t_rule.nodes.iter().zip(&t_rule.weights) {
        for (&x, &wx) in x_rule.nodes.iter().zip(&x_rule.weights) {
            let v = u.eval(t, x);
            if v.dx.iter().all(|&d| d == 0.0) && v.dt == 0.0 {
                continue;
            }
            let c = coefficient_jets(w, t, x, s)?;
            let m = combine(&c);
            let [u0, u1, u2, u3, u4, u5] = v.dx;
            let l1 = c.a.value() * u0 + c.c1.value() * u2 + c.e.value() * u4;
            let l2 = c.b.value() * u1 + c.c2.value() * u2 + c.d.value() * u3 + v.dt - u5;
            let omega = l1 + l2;
            let ex = c.e.dx();
            let q = m.m * u0 * u0 + m.n * u1 * u1 + m.o * u2 * u2 + m.r * u3 * u3 + m.s * u4 * u4
                - 2.0 * (ex.dx().value() * u2 + 2.0 * ex.value() * u3) * omega
                - 2.0 * c.c1.dx().value() * u1 * omega;
            let wgt = wt * wx;
            lhs += wgt * 2.0 * l1 * l2;
            rhs += wgt * q;
        }
    }
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + f64::EPSILON),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::testfn::{vanishing_factor, AdmissibleFunction, ZeroField};
    use crate::profile::TimeProfile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn zero_function() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let z = ZeroField { half_length: 1.0, horizon: 2.0 };
        let r = ibp_identity_check(&z, &w, 3.0, Resolution::Low).unwrap();
        assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_bump_identity() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let u = AdmissibleFunction::single_bump(1.0, 2.0).unwrap();
        let r = ibp_identity_check(&u, &w, 2.0, Resolution::Default).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn random_member_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let u = AdmissibleFunction::random(&mut rng, 1.0, 2.0, 2).unwrap();
        let r = ibp_identity_check(&u, &w, 5.0, Resolution::Default).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
    }

    #[test]
    fn cubic_vanishing_is_rejected() {
        // Only u, u_x, u_xx vanish at ±L; boundary fluxes of higher
        // derivatives would enter, so the check refuses it.
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let u = AdmissibleFunction::new(
            1.0,
            vec![(TimeProfile::PolyBump { lo: 0.4, hi: 1.6, power: 8 }, vanishing_factor(1.0, 3))],
        )
        .unwrap();
        assert!(ibp_identity_check(&u, &w, 2.0, Resolution::Default).is_err());
    }
}
