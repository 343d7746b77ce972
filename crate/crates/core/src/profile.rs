//! Smooth scalar time profiles: steps, bumps, plateaus and their mollifications.

use std::sync::OnceLock;

use crate::quadrature::CompositeRule;

/// Mollifier nodes on [-1, 1] paired with normalised kernel weights.
fn reference_kernel() -> &'static [(f64, f64)] {
    static KERNEL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    KERNEL.get_or_init(|| {
        let kernel = TimeProfile::ExpBump { lo: -1.0, hi: 1.0 };
        let rule = CompositeRule::new(-1.0, 1.0, 8, 12);
        let norm = rule.integrate(|s| kernel.value(s));
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| (s, kernel.value(s) * w / norm))
            .collect()
    })
}

fn h(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

fn dh(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp() / (y * y)
    }
}

/// C^∞ step: 0 for y ≤ 0, 1 for y ≥ 1, built from exp(-1/y).
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = h(y);
        a / (a + h(1.0 - y))
    }
}

pub fn smooth_step_derivative(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        let a = h(y);
        let b = h(1.0 - y);
        (dh(y) * b + a * dh(1.0 - y)) / ((a + b) * (a + b))
    }
}

/// A scalar function of time with compact support or plateau structure.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeProfile {
    /// exp(-1/(1-y²)) on (lo, hi), y the affine map to (-1, 1).
    ExpBump { lo: f64, hi: f64 },
    /// (1-y²)^power on (lo, hi).
    PolyBump { lo: f64, hi: f64, power: u32 },
    /// 0 before `a`, smooth rise to 1 on [a, b], 1 on [b, c], smooth fall on [c, d].
    Plateau { a: f64, b: f64, c: f64, d: f64 },
    /// 1 up to `start`, smooth fall to 0 on [start, end], 0 afterwards.
    FallingStep { start: f64, end: f64 },
    /// Convolution of `base` with a normalised exp-bump kernel of half-width `width`.
    Mollified { base: Box<TimeProfile>, width: f64 },
    /// Pointwise product.
    Product(Box<TimeProfile>, Box<TimeProfile>),
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        self.value_and_derivative(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.value_and_derivative(t).1
    }

    pub fn value_and_derivative(&self, t: f64) -> (f64, f64) {
        match *self {
            TimeProfile::ExpBump { lo, hi } => {
                let half = 0.5 * (hi - lo);
                let y = (t - 0.5 * (lo + hi)) / half;
                if y.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - y * y;
                let v = (-1.0 / q).exp();
                (v, v * (-2.0 * y / (q * q)) / half)
            }
            TimeProfile::PolyBump { lo, hi, power } => {
                let half = 0.5 * (hi - lo);
                let y = (t - 0.5 * (lo + hi)) / half;
                if y.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - y * y;
                let p = power as i32;
                let v = q.powi(p);
                let d = if p == 0 {
                    0.0
                } else {
                    p as f64 * q.powi(p - 1) * (-2.0 * y) / half
                };
                (v, d)
            }
            TimeProfile::Plateau { a, b, c, d } => {
                let ru = (t - a) / (b - a);
                let rd = (t - c) / (d - c);
                let up = smooth_step(ru);
                let dn = 1.0 - smooth_step(rd);
                let dup = smooth_step_derivative(ru) / (b - a);
                let ddn = -smooth_step_derivative(rd) / (d - c);
                (up * dn, dup * dn + up * ddn)
            }
            TimeProfile::FallingStep { start, end } => {
                let y = (t - start) / (end - start);
                (
                    1.0 - smooth_step(y),
                    -smooth_step_derivative(y) / (end - start),
                )
            }
            TimeProfile::Mollified { ref base, width } => {
                let mut v = 0.0;
                let mut d = 0.0;
                for &(s, k) in reference_kernel() {
                    let (bv, bd) = base.value_and_derivative(t - width * s);
                    v += k * bv;
                    d += k * bd;
                }
                (v, d)
            }
            TimeProfile::Product(ref f, ref g) => {
                let (a, da) = f.value_and_derivative(t);
                let (b, db) = g.value_and_derivative(t);
                (a * b, da * b + a * db)
            }
        }
    }

    /// Closed interval outside of which the profile is identically zero,
    /// or `None` when the profile does not vanish at large times.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            TimeProfile::ExpBump { lo, hi } | TimeProfile::PolyBump { lo, hi, .. } => {
                Some((lo, hi))
            }
            TimeProfile::Plateau { a, d, .. } => Some((a, d)),
            TimeProfile::FallingStep { .. } => None,
            TimeProfile::Mollified { ref base, width } => {
                base.support().map(|(a, b)| (a - width, b + width))
            }
            TimeProfile::Product(ref f, ref g) => match (f.support(), g.support()) {
                (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d))),
                (Some(s), None) | (None, Some(s)) => Some(s),
                (None, None) => None,
            },
        }
    }

    /// Points where the profile is only piecewise smooth (panel breaks for quadrature).
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TimeProfile::ExpBump { lo, hi } | TimeProfile::PolyBump { lo, hi, .. } => {
                vec![lo, hi]
            }
            TimeProfile::Plateau { a, b, c, d } => vec![a, b, c, d],
            TimeProfile::FallingStep { start, end } => vec![start, end],
            TimeProfile::Mollified { ref base, width } => {
                let mut v = Vec::new();
                for p in base.breakpoints() {
                    v.push(p - width);
                    v.push(p + width);
                }
                v
            }
            TimeProfile::Product(ref f, ref g) => {
                let mut v = f.breakpoints();
                v.extend(g.breakpoints());
                v
            }
        }
    }

    /// ∫ profile over [a, b] with panels aligned to the breakpoints.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        panel_rule(a, b, &self.breakpoints(), 8, 16).integrate(|t| self.value(t))
    }
}

/// Composite Gauss–Legendre on [a, b] whose sub-intervals respect `breaks`.
pub fn panel_rule(a: f64, b: f64, breaks: &[f64], panels: usize, order: usize) -> CompositeRule {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in cuts.windows(2) {
        let r = CompositeRule::new(w[0], w[1], panels, order);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    CompositeRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &TimeProfile, ts: &[f64]) {
        for &t in ts {
            let h = 1e-6;
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let d = p.derivative(t);
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "t={t}: {fd} vs {d}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ts = [0.31, 0.45, 0.5, 0.62, 0.7, 0.77];
        fd_check(&TimeProfile::ExpBump { lo: 0.3, hi: 0.8 }, &ts);
        fd_check(&TimeProfile::PolyBump { lo: 0.3, hi: 0.8, power: 8 }, &ts);
        fd_check(&TimeProfile::Plateau { a: 0.3, b: 0.4, c: 0.6, d: 0.8 }, &ts);
        fd_check(&TimeProfile::FallingStep { start: 0.3, end: 0.7 }, &ts);
        fd_check(
            &TimeProfile::Mollified {
                base: Box::new(TimeProfile::Plateau { a: 0.3, b: 0.4, c: 0.6, d: 0.8 }),
                width: 0.02,
            },
            &ts,
        );
    }

    #[test]
    fn plateau_is_one_inside_zero_outside() {
        let p = TimeProfile::Plateau { a: 0.2, b: 0.3, c: 0.7, d: 0.8 };
        assert_eq!(p.value(0.1), 0.0);
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(0.9), 0.0);
        let s = TimeProfile::FallingStep { start: 0.25, end: 0.75 };
        assert_eq!(s.value(0.1), 1.0);
        assert_eq!(s.value(0.8), 0.0);
        assert!((s.value(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mollifier_reproduces_plateau_interior() {
        let base = TimeProfile::Plateau { a: 0.2, b: 0.3, c: 0.7, d: 0.8 };
        let m = TimeProfile::Mollified { base: Box::new(base), width: 0.01 };
        assert!((m.value(0.5) - 1.0).abs() < 1e-14);
        assert_eq!(m.support(), Some((0.19, 0.81)));
    }
}
