use super::jet::{Jet, JT, JX};
use crate::error::{Error, Result};
use crate::poly::Polynomial;

const CHECK_POINTS: usize = 2001;

/// Spatial profile `ψ` and the space-time weight `φ(t,x) = ψ(x)/(t(T−t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    half_length: f64,
    horizon: f64,
    psi: Polynomial,
}

/// `φ` and its partials: `table[a][b] = ∂t^a ∂x^b φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPartials {
    pub table: Vec<Vec<f64>>,
}

impl WeightPartials {
    pub fn get(&self, dt: usize, dx: usize) -> f64 {
        self.table[dt][dx]
    }
}

impl WeightProfile {
    /// `ψ(x) = 1 + (x+L) − (x+L)²/(8L)`.
    pub fn default_for(half_length: f64, horizon: f64) -> Result<Self> {
        let l = half_length;
        let psi = Polynomial::new(vec![1.0 + 7.0 * l / 8.0, 0.75, -1.0 / (8.0 * l)]);
        Self::new(half_length, horizon, psi)
    }

    /// Validates `ψ > 0`, `ψ′ > 0`, `ψ″ < 0` on a dense grid of `[−L, L]`.
    pub fn new(half_length: f64, horizon: f64, psi: Polynomial) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        let d1 = psi.derivative();
        let d2 = d1.derivative();
        for k in 0..CHECK_POINTS {
            let x = -half_length + 2.0 * half_length * k as f64 / (CHECK_POINTS - 1) as f64;
            if psi.eval(x) <= 0.0 {
                return Err(Error::Precondition(format!("ψ must be positive, fails at x = {x}")));
            }
            if d1.eval(x) <= 0.0 {
                return Err(Error::Precondition(format!("ψ′ must be positive, fails at x = {x}")));
            }
            if d2.eval(x) >= 0.0 {
                return Err(Error::Precondition(format!("ψ″ must be negative, fails at x = {x}")));
            }
        }
        Ok(Self {
            half_length,
            horizon,
            psi,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn psi(&self) -> &Polynomial {
        &self.psi
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t > 0.0 && t < self.horizon {
            Ok(())
        } else {
            Err(Error::SingularPoint {
                t,
                horizon: self.horizon,
            })
        }
    }

    /// `1/(t(T−t))` and its first two derivatives.
    fn time_factor(&self, t: f64) -> [f64; JT] {
        let g = t * (self.horizon - t);
        let g1 = self.horizon - 2.0 * t;
        [1.0 / g, -g1 / (g * g), 2.0 / (g * g) + 2.0 * g1 * g1 / (g * g * g)]
    }

    /// `φ` and `∂t^a ∂x^b φ` for `a ≤ max_dt ≤ 1`, `b ≤ max_dx ≤ 8`.
    pub fn eval(&self, t: f64, x: f64, max_dx: usize, max_dt: usize) -> Result<WeightPartials> {
        self.check_time(t)?;
        if max_dx > 8 || max_dt > 1 {
            return Err(Error::Domain(format!(
                "weight partials limited to ∂x⁸ and ∂t¹, requested ∂x^{max_dx} ∂t^{max_dt}"
            )));
        }
        let tau = self.time_factor(t);
        let psi = self.psi.eval_derivatives(x, max_dx);
        Ok(WeightPartials {
            table: (0..=max_dt)
                .map(|a| psi.iter().map(|p| tau[a] * p).collect())
                .collect(),
        })
    }

    /// Full jet of `φ` at `(t, x)`.
    pub fn jet(&self, t: f64, x: f64) -> Result<Jet> {
        self.check_time(t)?;
        let tau = self.time_factor(t);
        let psi = self.psi.eval_derivatives(x, JX - 1);
        Ok(Jet::separable(&tau, &psi))
    }

    /// `φ(t,x)` alone.
    pub fn phi(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.psi.eval(x) / (t * (self.horizon - t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_satisfies_sign_conditions() {
        for l in [0.5, 1.0, 3.0, 10.0] {
            let w = WeightProfile::default_for(l, 2.0).unwrap();
            let d1 = w.psi().derivative();
            assert!((d1.eval(-l) - 1.0).abs() < 1e-14);
            assert!((d1.eval(l) - 0.5).abs() < 1e-14);
            assert!((w.psi().eval(-l) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bad_profiles_are_rejected() {
        let flat = Polynomial::new(vec![1.0, 0.5]);
        assert!(WeightProfile::new(1.0, 1.0, flat).is_err());
        let convex = Polynomial::new(vec![1.0, 0.5, 0.1]);
        assert!(WeightProfile::new(1.0, 1.0, convex).is_err());
    }

    #[test]
    fn unit_time_factor_at_midpoint() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        // ψ(x) = 1 at x = −L.
        let p = w.eval(1.0, -1.0, 1, 0).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-15);
        let x = 0.3;
        let p = w.eval(1.0, x, 1, 0).unwrap();
        assert!((p.get(0, 1) - w.psi().derivative().eval(x)).abs() < 1e-15);
    }

    #[test]
    fn singular_times_and_order_limits() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        assert!(matches!(w.eval(0.0, 0.0, 0, 0), Err(Error::SingularPoint { .. })));
        assert!(matches!(w.eval(2.0, 0.0, 0, 0), Err(Error::SingularPoint { .. })));
        assert!(w.eval(1.0, 0.0, 9, 0).is_err());
        assert!(w.eval(1.0, 0.0, 8, 2).is_err());
    }

    #[test]
    fn partials_match_central_differences() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let (t, x) = (0.7, 0.2);
        let h = 1e-4;
        let p = w.eval(t, x, 2, 1).unwrap();
        let f = |t: f64, x: f64| w.phi(t, x).unwrap();
        let fx = (f(t, x + h) - f(t, x - h)) / (2.0 * h);
        let fxx = (f(t, x + h) - 2.0 * f(t, x) + f(t, x - h)) / (h * h);
        let ft = (f(t + h, x) - f(t - h, x)) / (2.0 * h);
        let fxt = (f(t + h, x + h) - f(t + h, x - h) - f(t - h, x + h) + f(t - h, x - h))
            / (4.0 * h * h);
        assert!((p.get(0, 1) - fx).abs() < 1e-7 * fx.abs());
        assert!((p.get(0, 2) - fxx).abs() < 1e-6 * fxx.abs());
        assert!((p.get(1, 0) - ft).abs() < 1e-7 * ft.abs());
        assert!((p.get(1, 1) - fxt).abs() < 1e-6 * fxt.abs());
        let j = w.jet(t, x).unwrap();
        let ftt = (f(t + h, x) - 2.0 * f(t, x) + f(t - h, x)) / (h * h);
        assert!((j.get(2, 0) - ftt).abs() < 1e-5 * ftt.abs());
    }
}
