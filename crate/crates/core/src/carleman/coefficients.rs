use std::ops::{Add, Mul, Neg, Sub};

use super::jet::Jet;
use super::weight::WeightProfile;
use crate::error::Result;

/// Scalars the coefficient formulas can be assembled over.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + From<f64>
{
}

impl Scalar for f64 {}
impl Scalar for Jet {}

/// The six coefficient functions of the conjugated operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanCoefficients<T = f64> {
    pub a: T,
    pub b: T,
    pub c1: T,
    pub c2: T,
    pub d: T,
    pub e: T,
}

/// The quadratic-form coefficients multiplying `u², u_x², u_xx², u_xxx², u_xxxx²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedCoefficients {
    pub m: f64,
    pub n: f64,
    pub o: f64,
    pub r: f64,
    pub s: f64,
}

fn k<T: Scalar>(c: f64) -> T {
    T::from(c)
}

/// Assembles `A, B, C1, C2, D, E` from `φ_t` and `p[j] = ∂x^j φ`, `j ≤ 5`.
pub fn coefficients_from_partials<T: Scalar>(s: f64, phi_t: T, p: &[T; 6]) -> CarlemanCoefficients<T> {
    let (s1, s2, s3, s4, s5) = (k::<T>(s), k::<T>(s * s), k::<T>(s.powi(3)), k::<T>(s.powi(4)), k::<T>(s.powi(5)));
    let [_, p1, p2, p3, p4, p5] = *p;
    let a = s1 * (phi_t + p1 + p3 - p5)
        - s2 * (k::<T>(10.0) * p2 * p3 - k::<T>(3.0) * p1 * p2 + k::<T>(5.0) * p1 * p4)
        - s3 * (k::<T>(15.0) * p1 * p2 * p2 + k::<T>(10.0) * p1 * p1 * p3 - p1 * p1 * p1)
        - k::<T>(10.0) * s4 * p1 * p1 * p1 * p2
        - s5 * p1 * p1 * p1 * p1 * p1;
    let b = s1 * (k::<T>(3.0) * p2 - k::<T>(5.0) * p4)
        - s2 * (k::<T>(15.0) * p2 * p2 + k::<T>(20.0) * p1 * p3 - k::<T>(3.0) * p1 * p1)
        - k::<T>(30.0) * s3 * p1 * p1 * p2
        - k::<T>(5.0) * s4 * p1 * p1 * p1 * p1;
    let c1 = s1 * (k::<T>(3.0) * p1 - k::<T>(10.0) * p3) - k::<T>(10.0) * s3 * p1 * p1 * p1;
    let c2 = -k::<T>(30.0) * s2 * p1 * p2;
    let d = -k::<T>(10.0) * s1 * p2 - k::<T>(10.0) * s2 * p1 * p1;
    let e = -k::<T>(5.0) * s1 * p1;
    CarlemanCoefficients { a, b, c1, c2, d, e }
}

/// Coefficient jets at `(t, x)`.
pub fn coefficient_jets(w: &WeightProfile, t: f64, x: f64, s: f64) -> Result<CarlemanCoefficients<Jet>> {
    let phi = w.jet(t, x)?;
    let p = [phi, phi.dx(), phi.dxn(2), phi.dxn(3), phi.dxn(4), phi.dxn(5)];
    Ok(coefficients_from_partials(s, phi.dt(), &p))
}

/// `A, …, E` at one point.
pub fn coefficients(w: &WeightProfile, t: f64, x: f64, s: f64) -> Result<CarlemanCoefficients> {
    let p = w.eval(t, x, 5, 1)?;
    let px = [p.get(0, 0), p.get(0, 1), p.get(0, 2), p.get(0, 3), p.get(0, 4), p.get(0, 5)];
    Ok(coefficients_from_partials(s, p.get(1, 0), &px))
}

fn dx(j: Jet, n: usize) -> Jet {
    j.dxn(n)
}

/// `M, N, O, R, S` from coefficient jets, all product derivatives expanded
/// exactly by Leibniz' rule.
pub fn combine(c: &CarlemanCoefficients<Jet>) -> CombinedCoefficients {
    let CarlemanCoefficients { a, b, c1, c2, d, e } = *c;
    let cc = c1 + c2;
    let ex = e.dx();
    let exx = ex.dx();
    let c1x = c1.dx();
    let n = |v: f64| Jet::constant(v);

    let m = -dx(a * b, 1) - a.dt() + dx(a, 5) + dx(a * c2, 2) - dx(a * d, 3) - dx(a * c1x, 1)
        + dx(exx * a, 2)
        - n(2.0) * dx(ex * a, 3);
    let nn = n(3.0) * dx(a * d, 1) - n(2.0) * a * c2 - dx(c1 * b, 1) + n(2.0) * b * c1x + c1.dt()
        - dx(cc * c1x, 1)
        + dx(d * c1x, 2)
        - n(5.0) * dx(a, 3)
        - dx(e * c1x, 3)
        - dx(c1, 5)
        - dx(e * b, 3)
        - n(2.0) * exx * a
        - dx(b * exx, 1)
        + n(6.0) * dx(ex * a, 1)
        + n(2.0) * dx(ex * b, 2);
    let o = n(5.0) * dx(a, 1) - dx(c1 * d, 1) - n(2.0) * d * c1x + n(3.0) * dx(e * b, 1)
        + n(2.0) * c1 * c2
        - n(4.0) * ex * b
        + n(5.0) * dx(c1, 3)
        + n(3.0) * dx(e * c1x, 1)
        + n(2.0) * exx * cc
        + dx(e * c2, 2)
        - dx(exx * d, 1)
        + dx(exx * e, 2)
        + dx(e, 5)
        - e.dt()
        - n(2.0) * dx(cc * ex, 1);
    let r = -n(5.0) * c1x - dx(e * d, 1) + n(4.0) * ex * d - n(2.0) * e * c2 - n(2.0) * exx * e
        - n(5.0) * dx(e, 3)
        - n(2.0) * dx(e * ex, 1);
    let s = n(5.0) * ex;
    CombinedCoefficients {
        m: m.value(),
        n: nn.value(),
        o: o.value(),
        r: r.value(),
        s: s.value(),
    }
}

/// `M, N, O, R, S` at one point.
pub fn combined_coefficients(w: &WeightProfile, t: f64, x: f64, s: f64) -> Result<CombinedCoefficients> {
    Ok(combine(&coefficient_jets(w, t, x, s)?))
}

/// `N`, `R`, `S` as printed in the source block of the identity (which
/// differ from the exact reduction), together with the exact `M` and `O`.
/// Reported for comparison only.
pub fn displayed_combined_coefficients(
    w: &WeightProfile,
    t: f64,
    x: f64,
    s: f64,
) -> Result<CombinedCoefficients> {
    let c = coefficient_jets(w, t, x, s)?;
    let exact = combine(&c);
    let CarlemanCoefficients { a: _, b, c1, c2, d, e } = c;
    let ex = e.dx();
    let c1x = c1.dx();
    let n = |v: f64| Jet::constant(v);
    // Exact N minus one copy of B·C1x.
    let nn = exact.n - (b * c1x).value();
    let r = -n(5.0) * c1x - dx(e * d, 1) + n(4.0) * ex * d - n(2.0) * e * c2 - n(2.0) * dx(e, 3) * e
        - n(7.0) * dx(e, 3)
        - n(2.0) * dx(e * ex, 1);
    Ok(CombinedCoefficients {
        n: nn,
        r: r.value(),
        s: 3.0 * ex.value(),
        ..exact
    })
}

/// Leading large-`s` terms `−45s⁹φx⁸φxx, +100s⁷φx⁶φxx, −250s⁵φx⁴φxx,
/// −100s³φx²φxx, −25sφxx` of the exact reduction.
pub fn leading_terms(w: &WeightProfile, t: f64, x: f64, s: f64) -> Result<CombinedCoefficients> {
    let p = w.eval(t, x, 2, 0)?;
    let (p1, p2) = (p.get(0, 1), p.get(0, 2));
    Ok(CombinedCoefficients {
        m: -45.0 * s.powi(9) * p1.powi(8) * p2,
        n: 100.0 * s.powi(7) * p1.powi(6) * p2,
        o: -250.0 * s.powi(5) * p1.powi(4) * p2,
        r: -100.0 * s.powi(3) * p1 * p1 * p2,
        s: -25.0 * s * p2,
    })
}

/// The leading terms as stated in the positivity claims: `−45s⁹φx⁸φxx`,
/// `−50s⁷φx⁶φxx`, `−250s⁵φx⁴φxx`, `−100s³φx²φxx`, `−5sφxx`.
pub fn claimed_leading_terms(w: &WeightProfile, t: f64, x: f64, s: f64) -> Result<CombinedCoefficients> {
    let mut l = leading_terms(w, t, x, s)?;
    let p2 = w.eval(t, x, 2, 0)?.get(0, 2);
    l.n = -50.0 * s.powi(7) * w.eval(t, x, 1, 0)?.get(0, 1).powi(6) * p2;
    l.s = -5.0 * s * p2;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn examples_from_partials() {
        let mut p = [0.0; 6];
        p[1] = 0.75;
        let c = coefficients_from_partials(1.0, 0.0, &p);
        assert_eq!(c.e, -3.75);
        let mut p = [0.0; 6];
        p[1] = 1.0;
        p[2] = -1.0;
        let c = coefficients_from_partials(1.0, 0.0, &p);
        assert_eq!(c.c2, 30.0);
    }

    #[test]
    fn coefficients_vanish_as_s_goes_to_zero() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let c = coefficients(&w, 0.6, 0.1, 1e-12).unwrap();
        for v in [c.a, c.b, c.c1, c.c2, c.d, c.e] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn closed_forms_of_d_and_e() {
        let w = WeightProfile::default_for(1.3, 2.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let t = rng.random_range(0.05..1.95);
            let x = rng.random_range(-1.3..1.3);
            let s = rng.random_range(0.1..50.0);
            let c = coefficients(&w, t, x, s).unwrap();
            let p = w.eval(t, x, 2, 0).unwrap();
            let (p1, p2) = (p.get(0, 1), p.get(0, 2));
            assert!((c.e + 5.0 * s * p1).abs() <= 1e-15 * (s * p1).abs().max(1.0) * 8.0);
            let dscale = (10.0 * s * p2).abs() + (10.0 * s * s * p1 * p1).abs();
            assert!((c.d + 10.0 * s * p2 + 10.0 * s * s * p1 * p1).abs() <= 4.0 * f64::EPSILON * dscale);
        }
    }

    #[test]
    fn jet_and_scalar_assemblies_agree() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let a = coefficients(&w, 0.8, -0.4, 3.0).unwrap();
        let j = coefficient_jets(&w, 0.8, -0.4, 3.0).unwrap();
        for (x, y) in [(a.a, j.a), (a.b, j.b), (a.c1, j.c1), (a.c2, j.c2), (a.d, j.d), (a.e, j.e)] {
            assert!((x - y.value()).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }

    #[test]
    fn s_is_five_e_x() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let c = coefficient_jets(&w, 0.9, 0.2, 7.0).unwrap();
        let m = combined_coefficients(&w, 0.9, 0.2, 7.0).unwrap();
        assert!((m.s - 5.0 * c.e.dx().value()).abs() < 1e-12);
    }
}
