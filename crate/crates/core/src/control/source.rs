use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::bspline::BSplineBasis;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::profile::{panel_rule, TimeProfile};
use crate::quadrature::gauss_legendre;
use crate::spectral::{evolve, SpectralField};

/// A space-time source `f(t)` on the truncated periodic space, described
/// through its envelope `H(t) = S(−t) f(t)`.
pub trait SourceTerm {
    fn half_length(&self) -> f64;
    fn order(&self) -> usize;
    /// `H(t) = S(−t) f(t)`.
    fn envelope_at(&self, t: f64) -> SpectralField;
    /// `f(t)`.
    fn field_at(&self, t: f64) -> SpectralField {
        evolve(&self.envelope_at(t), t)
    }
    /// Closed interval outside of which `f` vanishes.
    fn support(&self) -> (f64, f64);
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support();
        vec![a, b]
    }
}

/// Scalar time factor of a separable source.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Profile(TimeProfile),
    ProfileDerivative(TimeProfile),
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Profile(p) => p.value(t),
            Envelope::ProfileDerivative(p) => p.derivative(t),
        }
    }

    fn profile(&self) -> &TimeProfile {
        match self {
            Envelope::Profile(p) | Envelope::ProfileDerivative(p) => p,
        }
    }
}

/// `f(t) = e(t) S(t) a`, i.e. envelope `e(t)·a`, restricted to `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSource {
    pub envelope: Envelope,
    pub amplitude: SpectralField,
    pub support: (f64, f64),
}

impl SeparableSource {
    pub fn new(envelope: Envelope, amplitude: SpectralField, support: (f64, f64)) -> Self {
        Self {
            envelope,
            amplitude,
            support,
        }
    }

    /// Bump-shaped source with the support of `profile`.
    pub fn bump(profile: TimeProfile, amplitude: SpectralField) -> Result<Self> {
        let support = profile
            .support()
            .ok_or_else(|| Error::Precondition("source profile must be compactly supported".into()))?;
        Ok(Self::new(Envelope::Profile(profile), amplitude, support))
    }
}

impl SourceTerm for SeparableSource {
    fn half_length(&self) -> f64 {
        self.amplitude.half_length()
    }
    fn order(&self) -> usize {
        self.amplitude.order()
    }
    fn envelope_at(&self, t: f64) -> SpectralField {
        let (lo, hi) = self.support;
        let e = if t < lo || t > hi { 0.0 } else { self.envelope.value(t) };
        self.amplitude.scaled(Complex64::new(e, 0.0))
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.envelope.profile().breakpoints();
        b.extend([self.support.0, self.support.1]);
        b
    }
}

/// `Σ_k c_k f_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSource {
    pub terms: Vec<(Complex64, SeparableSource)>,
}

impl SumSource {
    pub fn new(terms: Vec<(Complex64, SeparableSource)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Precondition("source sum needs at least one term".into()))?;
        if terms.iter().any(|(_, s)| !s.amplitude.same_space(&first.1.amplitude)) {
            return Err(Error::Precondition("source terms differ in (L, N)".into()));
        }
        Ok(Self { terms })
    }
}

impl SourceTerm for SumSource {
    fn half_length(&self) -> f64 {
        self.terms[0].1.half_length()
    }
    fn order(&self) -> usize {
        self.terms[0].1.order()
    }
    fn envelope_at(&self, t: f64) -> SpectralField {
        let mut acc = self.terms[0].1.envelope_at(t).scaled(self.terms[0].0);
        for (c, s) in &self.terms[1..] {
            acc = acc
                .combine(Complex64::new(1.0, 0.0), &s.envelope_at(t), *c)
                .expect("terms share a space");
        }
        acc
    }
    fn support(&self) -> (f64, f64) {
        self.terms
            .iter()
            .map(|(_, s)| s.support)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)))
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|(_, s)| s.breakpoints()).collect()
    }
}

/// `∫ H(t) dt` over the support, by composite Gauss–Legendre.
pub fn envelope_integral(f: &dyn SourceTerm, panels: usize) -> SpectralField {
    let (a, b) = f.support();
    let rule = panel_rule(a, b, &f.breakpoints(), panels, 12);
    let mut acc = SpectralField::zeros(f.half_length(), f.order()).expect("valid space");
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc
            .combine(Complex64::new(1.0, 0.0), &f.envelope_at(t), Complex64::new(w, 0.0))
            .expect("same space");
    }
    acc
}

const COMPAT_PANELS: usize = 64;

/// A random source supported in `[lo, hi]` whose envelope integrates to zero,
/// so that `Pv = f` has a solution vanishing outside the support.
pub fn random_compatible_source<R: Rng>(
    rng: &mut R,
    half_length: f64,
    order: usize,
    support: (f64, f64),
    terms: usize,
) -> Result<SumSource> {
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(Error::Domain(format!("empty source support [{lo}, {hi}]")));
    }
    let mut parts = Vec::with_capacity(terms + 1);
    for _ in 0..terms.max(1) {
        let a = lo + (hi - lo) * rng.random_range(0.0..0.3);
        let b = hi - (hi - lo) * rng.random_range(0.0..0.3);
        let mut amp = SpectralField::zeros(half_length, order)?;
        for c in amp.coeffs_mut() {
            let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            *c = Complex64::new(re, im);
        }
        parts.push((
            Complex64::new(1.0, 0.0),
            SeparableSource::bump(TimeProfile::ExpBump { lo: a, hi: b }, amp)?,
        ));
    }
    let raw = SumSource::new(parts.clone())?;
    let defect = envelope_integral(&raw, COMPAT_PANELS);
    let rho = TimeProfile::ExpBump { lo, hi };
    let mass = panel_rule(lo, hi, &rho.breakpoints(), COMPAT_PANELS, 12).integrate(|t| rho.value(t));
    parts.push((
        Complex64::new(-1.0 / mass, 0.0),
        SeparableSource::bump(rho, defect)?,
    ));
    SumSource::new(parts)
}

/// Discretization controls for [`solve_source_problem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Solve window; defaults to the support of the source.
    pub window: Option<(f64, f64)>,
    pub intervals: usize,
    pub degree: usize,
    /// Relative tolerance on `|∫H| / ∫|H|` below which the source counts as
    /// compatible with vanishing endpoint values.
    pub compatibility_tol: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            window: None,
            intervals: 256,
            degree: 7,
            compatibility_tol: 1e-10,
        }
    }
}

const GAUSS_PER_INTERVAL: usize = 10;

/// `v = Pu` for the minimiser `u` of `½∫∫|Pu|² + Re∫∫ f ū` over the spline
/// test space on the window.
#[derive(Debug, Clone)]
pub struct SourceSolution {
    pub basis: BSplineBasis,
    half_length: f64,
    order: usize,
    /// Spline coefficients of `y` (interaction picture of `u`), one row per
    /// basis function, one column per mode.
    coeffs: DMatrix<Complex64>,
    /// `‖∫H‖`.
    pub compatibility_defect: f64,
    pub compatible: bool,
    pub regularized: bool,
    /// Relative `L²` residual `‖Pv − f‖/‖f‖` on the window.
    pub residual: f64,
    /// `‖v‖` at the two window edges (where `v` is cut to zero).
    pub endpoint_norms: (f64, f64),
    /// `‖v‖_{L²}` and `‖f‖_{L²}` over space-time.
    pub v_norm: f64,
    pub f_norm: f64,
    /// A priori bound `2|window|/π` on `‖v‖/‖f‖` (Wirtinger with one fixed end).
    pub c_num: f64,
}

impl SourceSolution {
    pub fn window(&self) -> (f64, f64) {
        self.basis.interval()
    }

    fn inside(&self, t: f64) -> bool {
        let (a, b) = self.window();
        t >= a && t <= b
    }

    fn combine_row(&self, first: usize, w: &[f64]) -> SpectralField {
        let mut out = SpectralField::zeros(self.half_length, self.order).expect("valid space");
        let c = out.coeffs_mut();
        for (j, &wj) in w.iter().enumerate() {
            let row = first + j;
            for (m, cm) in c.iter_mut().enumerate() {
                *cm += self.coeffs[(row, m)] * wj;
            }
        }
        out
    }

    /// Interaction-picture `z(t) = S(−t)v(t)` and `z′(t)`.
    pub fn envelope(&self, t: f64) -> (SpectralField, SpectralField) {
        if !self.inside(t) {
            let z = SpectralField::zeros(self.half_length, self.order).expect("valid space");
            return (z.clone(), z);
        }
        let (first, d) = self.basis.eval(t, 2);
        (self.combine_row(first, &d[1]), self.combine_row(first, &d[2]))
    }

    /// `v(t)`.
    pub fn v_at(&self, t: f64) -> SpectralField {
        evolve(&self.envelope(t).0, t)
    }

    /// `(Pv)(t)`.
    pub fn pv_at(&self, t: f64) -> SpectralField {
        evolve(&self.envelope(t).1, t)
    }
}

/// Solves `Pv = f` variationally with `v` supported in the window.
///
/// In the interaction picture `u(t) = S(t)y(t)` the functional becomes
/// `Σ_n ½∫|y_n′|² + Re∫H_n conj(y_n)`, minimised over degree-`p` splines
/// with `y(α) = 0`. Then `v = S(t)y′` and `Pv = S(t)y″`.
pub fn solve_source_problem(f: &dyn SourceTerm, params: &SourceParams) -> Result<SourceSolution> {
    let (s_lo, s_hi) = f.support();
    let (alpha, beta) = params.window.unwrap_or((s_lo, s_hi));
    if !(beta > alpha) {
        return Err(Error::Domain(format!("empty solve window [{alpha}, {beta}]")));
    }
    if s_lo < alpha - 1e-12 || s_hi > beta + 1e-12 {
        return Err(Error::Precondition(format!(
            "source support [{s_lo}, {s_hi}] is not inside the solve window [{alpha}, {beta}]"
        )));
    }
    let basis = BSplineBasis::new(alpha, beta, params.intervals, params.degree);
    let nb = basis.len();
    let dim = nb - 1;
    let modes = 2 * f.order() + 1;
    let (gx, gw) = gauss_legendre(GAUSS_PER_INTERVAL);
    let mut stiff = DMatrix::<f64>::zeros(dim, dim);
    let mut load = DMatrix::<Complex64>::zeros(nb, modes);
    let mut h_int = vec![Complex64::new(0.0, 0.0); modes];
    let mut h_abs = 0.0;
    let mut f_norm2 = 0.0;
    for k in 0..basis.intervals() {
        let (a, b) = basis.knot_interval(k);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in gx.iter().zip(&gw) {
            let t = mid + half * x;
            let wt = w * half;
            let (first, d) = basis.eval(t, 1);
            for i in 0..d[1].len() {
                for j in 0..d[1].len() {
                    let (r, c) = (first + i, first + j);
                    if r > 0 && c > 0 {
                        stiff[(r - 1, c - 1)] += wt * d[1][i] * d[1][j];
                    }
                }
            }
            let h = f.envelope_at(t);
            f_norm2 += wt * h.norm_sqr();
            for (m, hm) in h.coeffs().iter().enumerate() {
                h_int[m] += hm * wt;
                h_abs += hm.norm() * wt;
                for (i, bi) in d[0].iter().enumerate() {
                    load[(first + i, m)] += hm * (wt * bi);
                }
            }
        }
    }
    let mut regularized = false;
    let chol = match cholesky(stiff.clone()) {
        Ok(c) => c,
        Err(_) => {
            regularized = true;
            let shift = 1e-12 * stiff.trace() / dim as f64;
            cholesky(stiff + DMatrix::identity(dim, dim) * shift)?
        }
    };
    let mut coeffs = DMatrix::<Complex64>::zeros(nb, modes);
    for m in 0..modes {
        let re = nalgebra::DVector::from_fn(dim, |i, _| -load[(i + 1, m)].re);
        let im = nalgebra::DVector::from_fn(dim, |i, _| -load[(i + 1, m)].im);
        let (xr, xi) = (chol.solve(&re), chol.solve(&im));
        for i in 0..dim {
            coeffs[(i + 1, m)] = Complex64::new(xr[i], xi[i]);
        }
    }
    let defect = h_int.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut sol = SourceSolution {
        basis,
        half_length: f.half_length(),
        order: f.order(),
        coeffs,
        compatibility_defect: defect,
        compatible: defect <= params.compatibility_tol * h_abs.max(f64::MIN_POSITIVE) || h_abs == 0.0,
        regularized,
        residual: 0.0,
        endpoint_norms: (0.0, 0.0),
        v_norm: 0.0,
        f_norm: f_norm2.sqrt(),
        c_num: 2.0 * (beta - alpha) / std::f64::consts::PI,
    };
    let mut res2 = 0.0;
    let mut v2 = 0.0;
    for k in 0..sol.basis.intervals() {
        let (a, b) = sol.basis.knot_interval(k);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in gx.iter().zip(&gw) {
            let t = mid + half * x;
            let (z, zp) = sol.envelope(t);
            res2 += w * half * zp.sub(&f.envelope_at(t))?.norm_sqr();
            v2 += w * half * z.norm_sqr();
        }
    }
    sol.residual = if sol.f_norm > 0.0 { res2.sqrt() / sol.f_norm } else { res2.sqrt() };
    sol.v_norm = v2.sqrt();
    sol.endpoint_norms = (sol.envelope(alpha).0.norm(), sol.envelope(beta).0.norm());
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params() -> SourceParams {
        SourceParams::default()
    }

    #[test]
    fn zero_source_gives_zero() {
        let z = SpectralField::zeros(1.0, 4).unwrap();
        let f = SeparableSource::bump(TimeProfile::ExpBump { lo: 0.2, hi: 0.8 }, z).unwrap();
        let s = solve_source_problem(&f, &params()).unwrap();
        assert_eq!(s.v_norm, 0.0);
        assert_eq!(s.v_at(0.5).norm(), 0.0);
        assert!(s.compatible);
    }

    #[test]
    fn compatible_random_source() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f = random_compatible_source(&mut rng, std::f64::consts::PI, 8, (0.2, 0.8), 3).unwrap();
        let d = envelope_integral(&f, 64).norm();
        assert!(d < 1e-12, "{d}");
        let s = solve_source_problem(&f, &params()).unwrap();
        assert!(s.compatible);
        assert!(s.residual < 1e-6, "{}", s.residual);
        assert!(s.endpoint_norms.0 < 1e-8 && s.endpoint_norms.1 < 1e-8, "{:?}", s.endpoint_norms);
        assert!(s.v_norm <= s.c_num * s.f_norm);
        // Pv = f pointwise in the window, checked in the physical picture.
        let t = 0.43;
        let diff = s.pv_at(t).sub(&f.field_at(t)).unwrap().norm();
        assert!(diff < 1e-6 * f.field_at(t).norm().max(1.0));
    }

    #[test]
    fn incompatible_source_is_flagged() {
        let amp = SpectralField::basis(1.0, 2, 1).unwrap();
        let f = SeparableSource::bump(TimeProfile::ExpBump { lo: 0.2, hi: 0.8 }, amp).unwrap();
        let s = solve_source_problem(&f, &params()).unwrap();
        assert!(!s.compatible);
        assert!(s.compatibility_defect > 0.1);
    }

    #[test]
    fn window_must_contain_support() {
        let amp = SpectralField::basis(1.0, 2, 1).unwrap();
        let f = SeparableSource::bump(TimeProfile::ExpBump { lo: 0.2, hi: 0.8 }, amp).unwrap();
        let p = SourceParams { window: Some((0.3, 0.9)), ..params() };
        assert!(solve_source_problem(&f, &p).is_err());
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let f1 = random_compatible_source(&mut rng, 1.0, 4, (0.1, 0.9), 2).unwrap();
        let f2 = random_compatible_source(&mut rng, 1.0, 4, (0.1, 0.9), 2).unwrap();
        let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.0));
        let mut terms: Vec<_> = f1.terms.iter().map(|(c, s)| (c * a, s.clone())).collect();
        terms.extend(f2.terms.iter().map(|(c, s)| (c * b, s.clone())));
        let f12 = SumSource::new(terms).unwrap();
        let p = params();
        let (s1, s2, s12) = (
            solve_source_problem(&f1, &p).unwrap(),
            solve_source_problem(&f2, &p).unwrap(),
            solve_source_problem(&f12, &p).unwrap(),
        );
        for t in [0.15, 0.5, 0.77] {
            let lin = s1.v_at(t).combine(a, &s2.v_at(t), b).unwrap();
            assert!(s12.v_at(t).sub(&lin).unwrap().norm() < 1e-10 * lin.norm().max(1.0));
        }
    }
}
