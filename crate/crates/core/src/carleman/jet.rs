//! Truncated bivariate Taylor jets in `(t, x)` storing partial derivatives
//! `∂t^a ∂x^b f` for `a < JT`, `b < JX`.

use std::ops::{Add, Mul, Neg, Sub};

pub const JT: usize = 3;
pub const JX: usize = 11;

const BINOM: [[f64; JX]; JX] = binomials();

const fn binomials() -> [[f64; JX]; JX] {
    let mut c = [[0.0; JX]; JX];
    let mut n = 0;
    while n < JX {
        c[n][0] = 1.0;
        let mut k = 1;
        while k <= n {
            c[n][k] = c[n - 1][k - 1] + if k < n { c[n - 1][k] } else { 0.0 };
            k += 1;
        }
        n += 1;
    }
    c
}

/// Partial derivatives of a smooth function at one point. `vt`, `vx` are the
/// highest orders that are still exact after differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    d: [[f64; JX]; JT],
    vt: usize,
    vx: usize,
}

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut d = [[0.0; JX]; JT];
        d[0][0] = c;
        Self {
            d,
            vt: JT - 1,
            vx: JX - 1,
        }
    }

    /// Jet of a separable function `τ(t)ψ(x)` from their derivative lists.
    pub fn separable(tau: &[f64], psi: &[f64]) -> Self {
        let mut d = [[0.0; JX]; JT];
        for (a, ta) in tau.iter().take(JT).enumerate() {
            for (b, pb) in psi.iter().take(JX).enumerate() {
                d[a][b] = ta * pb;
            }
        }
        Self {
            d,
            vt: tau.len().min(JT) - 1,
            vx: psi.len().min(JX) - 1,
        }
    }

    pub fn from_partials(d: [[f64; JX]; JT]) -> Self {
        Self {
            d,
            vt: JT - 1,
            vx: JX - 1,
        }
    }

    pub fn value(&self) -> f64 {
        self.d[0][0]
    }

    /// `∂t^a ∂x^b`; panics when the order is no longer exact.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(
            a <= self.vt && b <= self.vx,
            "jet derivative ({a},{b}) beyond exact orders ({},{})",
            self.vt,
            self.vx
        );
        self.d[a][b]
    }

    pub fn dx(&self) -> Self {
        assert!(self.vx > 0, "x-derivative of an exhausted jet");
        let mut d = [[0.0; JX]; JT];
        for a in 0..JT {
            for b in 0..JX - 1 {
                d[a][b] = self.d[a][b + 1];
            }
        }
        Self {
            d,
            vt: self.vt,
            vx: self.vx - 1,
        }
    }

    pub fn dxn(&self, n: usize) -> Self {
        (0..n).fold(*self, |j, _| j.dx())
    }

    pub fn dt(&self) -> Self {
        assert!(self.vt > 0, "t-derivative of an exhausted jet");
        let mut d = [[0.0; JX]; JT];
        for a in 0..JT - 1 {
            d[a] = self.d[a + 1];
        }
        Self {
            d,
            vt: self.vt - 1,
            vx: self.vx,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        for row in out.d.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut out = self;
        for a in 0..JT {
            for b in 0..JX {
                out.d[a][b] += rhs.d[a][b];
            }
        }
        out.vt = self.vt.min(rhs.vt);
        out.vx = self.vx.min(rhs.vx);
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let vt = self.vt.min(rhs.vt);
        let vx = self.vx.min(rhs.vx);
        let mut d = [[0.0; JX]; JT];
        for a in 0..=vt {
            for b in 0..=vx {
                let mut acc = 0.0;
                for i in 0..=a {
                    let ci = BINOM[a][i];
                    for j in 0..=b {
                        acc += ci * BINOM[b][j] * self.d[i][j] * rhs.d[a - i][b - j];
                    }
                }
                d[a][b] = acc;
            }
        }
        Jet { d, vt, vx }
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl From<f64> for Jet {
    fn from(c: f64) -> Self {
        Jet::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_jet(alpha: f64, beta: f64) -> Jet {
        // e^{αt + βx} at the origin.
        let tau: Vec<f64> = (0..JT).map(|a| alpha.powi(a as i32)).collect();
        let psi: Vec<f64> = (0..JX).map(|b| beta.powi(b as i32)).collect();
        Jet::separable(&tau, &psi)
    }

    #[test]
    fn binomials_are_pascal() {
        assert_eq!(BINOM[10][3], 120.0);
        assert_eq!(BINOM[4][2], 6.0);
    }

    #[test]
    fn product_of_exponentials() {
        let p = exp_jet(0.5, 1.5) * exp_jet(-0.2, 0.25);
        let q = exp_jet(0.3, 1.75);
        for a in 0..JT {
            for b in 0..JX {
                assert!((p.get(a, b) - q.get(a, b)).abs() < 1e-12 * q.get(a, b).abs().max(1.0));
            }
        }
    }

    #[test]
    fn differentiation_tracks_exact_orders() {
        let j = exp_jet(2.0, 3.0).dx().dx().dt();
        assert_eq!(j.get(0, 0), 2.0 * 9.0);
        assert_eq!(j.get(1, 8), 4.0 * 3f64.powi(10));
        let r = std::panic::catch_unwind(|| j.get(0, 9));
        assert!(r.is_err());
    }
}
