//! Unit phases `exp(i * lambda * t)` with the product `lambda * t` reduced
//! modulo 2π in extended precision.
//!
//! Frequencies of the fifth-order group reach 1e9 and beyond, so the naive
//! `(lambda * t).sin_cos()` loses ~1e-7 rad to the rounding of the product.
//! Here the product is formed exactly as a double-double and reduced against
//! a triple-double 2π, leaving only the rounding of the reduced argument.

use num_complex::Complex64;

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_MID: f64 = 2.4492935982947064e-16;
const TWO_PI_LO: f64 = -5.989539619436679e-33;

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `lambda * t` reduced to (roughly) `[-π, π]`.
pub fn reduced_phase(lambda: f64, t: f64) -> f64 {
    let (hi, lo) = two_prod(lambda, t);
    if !hi.is_finite() {
        return hi;
    }
    if hi.abs() < TWO_PI_HI {
        return hi + lo;
    }
    let k = (hi / TWO_PI_HI).round();
    let (ph, pl) = two_prod(k, TWO_PI_HI);
    // hi and ph agree to within a factor of two, so the difference is exact.
    let r = hi - ph;
    r - pl + lo - k * TWO_PI_MID - k * TWO_PI_LO
}

/// `exp(i * lambda * t)`.
pub fn unit_phase(lambda: f64, t: f64) -> Complex64 {
    let (s, c) = reduced_phase(lambda, t).sin_cos();
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_arguments_are_plain_products() {
        assert_eq!(reduced_phase(1.5, 2.0), 3.0);
        let z = unit_phase(0.0, 123.0);
        assert_eq!(z, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn matches_high_precision_reference() {
        // references computed with 300-bit arithmetic
        let r = reduced_phase((1u64 << 30) as f64, 0.5);
        assert!((r - 2.8089228021316304).abs() < 1e-15, "{r}");
        let r = reduced_phase(1073741760.0, 1.7);
        assert!((r + 1.2319717284346199).abs() < 1e-15, "{r}");
    }

    #[test]
    fn additivity_in_time() {
        let lambda = 1.0737e9 + 0.123;
        for &(s, t) in &[(0.25, 0.5), (1.0, 0.75), (0.125, 1.625)] {
            let a = unit_phase(lambda, s) * unit_phase(lambda, t);
            let b = unit_phase(lambda, s + t);
            assert!((a - b).norm() < 1e-14, "{}", (a - b).norm());
        }
    }
}
