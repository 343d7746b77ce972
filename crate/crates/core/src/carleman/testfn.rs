//! Smooth real test functions `u(t, x)` on `(0,T) × (−L,L)` with compact
//! time support and high-order vanishing at `x = ±L`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::phase::unit_phase;
use crate::poly::Polynomial;
use crate::profile::TimeProfile;
use crate::spectral::{wavenumber, SpectralField};

/// `u, u_x, …, u_5x` and `u_t` at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValues {
    pub dx: [f64; 6],
    pub dt: f64,
}

impl PointValues {
    /// `Pu = u_t + u_x + u_xxx − u_5x`.
    pub fn p(&self) -> f64 {
        self.dt + self.dx[1] + self.dx[3] - self.dx[5]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dx: self.dx.map(|v| a * v),
            dt: a * self.dt,
        }
    }
}

/// A smooth real test function known pointwise with its derivatives.
pub trait SmoothField: Send + Sync {
    fn half_length(&self) -> f64;
    /// Closed interval containing the time support.
    fn time_support(&self) -> (f64, f64);
    fn eval(&self, t: f64, x: f64) -> PointValues;
    /// Largest angular frequency of the time dependence (used to size
    /// quadrature panels).
    fn time_frequency(&self) -> f64 {
        0.0
    }
    /// Points in time where the field is only piecewise smooth.
    fn time_breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.time_support();
        vec![a, b]
    }
}

/// `(L² − x²)^k`.
pub fn vanishing_factor(half_length: f64, k: u32) -> Polynomial {
    Polynomial::new(vec![half_length * half_length, 0.0, -1.0]).pow(k)
}

fn derivative_chain(p: &Polynomial) -> [Polynomial; 6] {
    let mut out: [Polynomial; 6] = Default::default();
    out[0] = p.clone();
    for j in 1..6 {
        out[j] = out[j - 1].derivative();
    }
    out
}

const BINOM5: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
];

/// `Σ_k η_k(t) ζ_k(x)` with polynomial bumps `η_k` and `ζ_k = (L²−x²)^6 p_k(x)`.
#[derive(Debug, Clone)]
pub struct AdmissibleFunction {
    half_length: f64,
    terms: Vec<(TimeProfile, [Polynomial; 6])>,
}

/// Power of the vanishing factor used by the built-in families.
pub const VANISHING_POWER: u32 = 5;
const BUMP_POWER: u32 = 4;

impl AdmissibleFunction {
    pub fn new(half_length: f64, terms: Vec<(TimeProfile, Polynomial)>) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
        }
        if terms.is_empty() {
            return Err(Error::Precondition("test function needs at least one term".into()));
        }
        if terms.iter().any(|(eta, _)| eta.support().is_none()) {
            return Err(Error::Precondition("time factors must be compactly supported".into()));
        }
        Ok(Self {
            half_length,
            terms: terms
                .into_iter()
                .map(|(eta, zeta)| (eta, derivative_chain(&zeta)))
                .collect(),
        })
    }

    /// `η(t)(L²−x²)^6` with `η` a bump on `[0.2T, 0.8T]`.
    pub fn single_bump(half_length: f64, horizon: f64) -> Result<Self> {
        Self::new(
            half_length,
            vec![(
                TimeProfile::PolyBump {
                    lo: 0.2 * horizon,
                    hi: 0.8 * horizon,
                    power: BUMP_POWER,
                },
                vanishing_factor(half_length, VANISHING_POWER),
            )],
        )
    }

    /// Random sum of `terms` bump products supported in `[0.2T, 0.8T]`.
    pub fn random<R: Rng>(rng: &mut R, half_length: f64, horizon: f64, terms: usize) -> Result<Self> {
        let base = vanishing_factor(half_length, VANISHING_POWER);
        let scale = half_length.powi(2 * VANISHING_POWER as i32);
        let mut out = Vec::with_capacity(terms);
        for _ in 0..terms.max(1) {
            let lo = horizon * rng.random_range(0.2..0.35);
            let hi = horizon * rng.random_range(0.65..0.8);
            let coeffs: Vec<f64> = (0..4)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    z / (scale * half_length.powi(j))
                })
                .collect();
            let zeta = &base * &Polynomial::new(coeffs);
            out.push((
                TimeProfile::PolyBump {
                    lo,
                    hi,
                    power: BUMP_POWER,
                },
                zeta,
            ));
        }
        Self::new(half_length, out)
    }
}

impl SmoothField for AdmissibleFunction {
    fn half_length(&self) -> f64 {
        self.half_length
    }

    fn time_support(&self) -> (f64, f64) {
        self.terms
            .iter()
            .filter_map(|(eta, _)| eta.support())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    fn eval(&self, t: f64, x: f64) -> PointValues {
        let mut out = PointValues::default();
        for (eta, zeta) in &self.terms {
            let (e, et) = eta.value_and_derivative(t);
            if e == 0.0 && et == 0.0 {
                continue;
            }
            let z0 = zeta[0].eval(x);
            for j in 0..6 {
                out.dx[j] += e * zeta[j].eval(x);
            }
            out.dt += et * z0;
        }
        out
    }

    fn time_breakpoints(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|(eta, _)| eta.breakpoints()).collect()
    }
}

/// `η(t) (L²−x²)^6 Re[S_L(t)c](x)`: a free orbit cut off in time and space.
#[derive(Debug, Clone)]
pub struct CutOrbit {
    eta: TimeProfile,
    zeta: [Polynomial; 6],
    state: SpectralField,
}

impl CutOrbit {
    pub fn new(eta: TimeProfile, state: SpectralField) -> Result<Self> {
        if eta.support().is_none() {
            return Err(Error::Precondition("time cutoff must be compactly supported".into()));
        }
        let zeta = derivative_chain(&vanishing_factor(state.half_length(), VANISHING_POWER));
        Ok(Self { eta, zeta, state })
    }

    fn orbit(&self, t: f64, x: f64) -> ([f64; 6], f64) {
        let l = self.state.half_length();
        let norm = 1.0 / (2.0 * l).sqrt();
        let mut w = [0.0; 6];
        let mut wt = 0.0;
        for n in self.state.modes() {
            let c = self.state.coeff(n);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = wavenumber(n, l);
            let lam = crate::spectral::eigenvalue(n, l).unwrap_or(0.0);
            let base = c * unit_phase(lam, t) * Complex64::from_polar(norm, k * x);
            let mut ik = Complex64::new(1.0, 0.0);
            for wj in w.iter_mut() {
                *wj += (base * ik).re;
                ik *= Complex64::new(0.0, k);
            }
            wt += (base * Complex64::new(0.0, lam)).re;
        }
        (w, wt)
    }
}

impl SmoothField for CutOrbit {
    fn half_length(&self) -> f64 {
        self.state.half_length()
    }

    fn time_support(&self) -> (f64, f64) {
        self.eta.support().unwrap_or((0.0, 0.0))
    }

    fn eval(&self, t: f64, x: f64) -> PointValues {
        let (e, et) = self.eta.value_and_derivative(t);
        if e == 0.0 && et == 0.0 {
            return PointValues::default();
        }
        let (w, wt) = self.orbit(t, x);
        let z: Vec<f64> = self.zeta.iter().map(|p| p.eval(x)).collect();
        let mut out = PointValues::default();
        for j in 0..6 {
            let mut acc = 0.0;
            for i in 0..=j {
                acc += BINOM5[j][i] * z[i] * w[j - i];
            }
            out.dx[j] = e * acc;
        }
        out.dt = et * z[0] * w[0] + e * z[0] * wt;
        out
    }

    fn time_frequency(&self) -> f64 {
        let l = self.state.half_length();
        self.state
            .modes()
            .filter(|&n| self.state.coeff(n).norm() > 0.0)
            .map(|n| crate::spectral::eigenvalue(n, l).unwrap_or(0.0).abs())
            .fold(0.0, f64::max)
    }

    fn time_breakpoints(&self) -> Vec<f64> {
        self.eta.breakpoints()
    }
}

/// `a·f`.
pub struct Scaled<'a> {
    pub inner: &'a dyn SmoothField,
    pub factor: f64,
}

impl SmoothField for Scaled<'_> {
    fn half_length(&self) -> f64 {
        self.inner.half_length()
    }
    fn time_support(&self) -> (f64, f64) {
        self.inner.time_support()
    }
    fn eval(&self, t: f64, x: f64) -> PointValues {
        self.inner.eval(t, x).scaled(self.factor)
    }
    fn time_frequency(&self) -> f64 {
        self.inner.time_frequency()
    }
    fn time_breakpoints(&self) -> Vec<f64> {
        self.inner.time_breakpoints()
    }
}

/// The zero function on `(0,T) × (−L,L)`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroField {
    pub half_length: f64,
    pub horizon: f64,
}

impl SmoothField for ZeroField {
    fn half_length(&self) -> f64 {
        self.half_length
    }
    fn time_support(&self) -> (f64, f64) {
        (0.25 * self.horizon, 0.75 * self.horizon)
    }
    fn eval(&self, _t: f64, _x: f64) -> PointValues {
        PointValues::default()
    }
}

const ADMISSIBILITY_SAMPLES: usize = 17;
const ADMISSIBILITY_TOL: f64 = 1e-10;

/// Checks that `u` is supported strictly inside `(0, T)`, that `u` and
/// `∂x^j u`, `j ≤ 4`, vanish at `x = ±L`, and that `u` vanishes at the ends
/// of its declared time support.
pub fn check_admissible(u: &dyn SmoothField, half_length: f64, horizon: f64) -> Result<()> {
    if (u.half_length() - half_length).abs() > 1e-14 * half_length {
        return Err(Error::Precondition(format!(
            "test function lives on (−{}, {}) but the weight on (−{half_length}, {half_length})",
            u.half_length(),
            u.half_length()
        )));
    }
    let (a, b) = u.time_support();
    if !(a > 0.0 && b < horizon && a < b) {
        return Err(Error::Precondition(format!(
            "time support [{a}, {b}] is not compactly inside (0, {horizon})"
        )));
    }
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    let mut edge = 0.0f64;
    for k in 0..ADMISSIBILITY_SAMPLES {
        let t = a + (b - a) * (k as f64 + 0.5) / ADMISSIBILITY_SAMPLES as f64;
        for j in 0..ADMISSIBILITY_SAMPLES {
            let x = -half_length + 2.0 * half_length * (j as f64 + 0.5) / ADMISSIBILITY_SAMPLES as f64;
            let v = u.eval(t, x);
            scale = scale.max(v.dx.iter().take(5).fold(0.0f64, |m, d| m.max(d.abs())));
        }
        for x in [-half_length, half_length] {
            let v = u.eval(t, x);
            worst = worst.max(v.dx.iter().take(5).fold(0.0f64, |m, d| m.max(d.abs())));
        }
    }
    for t in [a, b] {
        for j in 0..ADMISSIBILITY_SAMPLES {
            let x = -half_length + 2.0 * half_length * j as f64 / (ADMISSIBILITY_SAMPLES - 1) as f64;
            edge = edge.max(u.eval(t, x).dx[0].abs());
        }
    }
    if worst > ADMISSIBILITY_TOL * scale.max(f64::MIN_POSITIVE) && worst > 0.0 {
        return Err(Error::Precondition(format!(
            "test function and its first four x-derivatives must vanish at x = ±L (max {worst:e}, scale {scale:e})"
        )));
    }
    if edge > ADMISSIBILITY_TOL * scale.max(f64::MIN_POSITIVE) && edge > 0.0 {
        return Err(Error::Precondition(format!(
            "test function does not vanish at the ends of its time support (max {edge:e})"
        )));
    }
    Ok(())
}
