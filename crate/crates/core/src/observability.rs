//! Spectral gaps, Ingham frame bounds and the observability Gramian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigen};
use crate::phase::unit_phase;
use crate::spectral::{eigenvalue, SpectralField};

/// Frequencies `λ_n`, `|n| ≤ N`, with their gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    #[serde(rename = "L")]
    pub half_length: f64,
    pub indices: Vec<i64>,
    pub lambdas: Vec<f64>,
    pub gamma: f64,
    pub gamma_tail: f64,
    pub tail_threshold: usize,
}

fn min_gap(values: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            g = g.min((values[i] - values[j]).abs());
        }
    }
    g
}

/// `γ = min |λ_k − λ_n|` over `|k|,|n| ≤ N`, and the same over `|k|,|n| ≥ N0`.
pub fn spectral_gap(order: usize, half_length: f64, tail_threshold: usize) -> Result<FrequencySet> {
    if order < 1 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if tail_threshold > order {
        return Err(Error::Domain(format!("tail threshold {tail_threshold} exceeds N = {order}")));
    }
    let n = order as i64;
    let indices: Vec<i64> = (-n..=n).collect();
    let lambdas = indices
        .iter()
        .map(|&k| eigenvalue(k, half_length))
        .collect::<Result<Vec<_>>>()?;
    let gamma = min_gap(&lambdas);
    let tail: Vec<f64> = indices
        .iter()
        .zip(&lambdas)
        .filter(|(k, _)| k.unsigned_abs() as usize >= tail_threshold)
        .map(|(_, &l)| l)
        .collect();
    let gamma_tail = min_gap(&tail);
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "frequencies are not separated for L = {half_length} (minimal gap {gamma})"
        )));
    }
    Ok(FrequencySet {
        half_length,
        indices,
        lambdas,
        gamma,
        gamma_tail,
        tail_threshold,
    })
}

/// `∫_a^b e^{iδt} dt`, stable for small `δ(b−a)`.
pub fn exp_integral(delta: f64, a: f64, b: f64) -> Complex64 {
    let h = b - a;
    let z = delta * h;
    if z.abs() < 0.5 {
        // e^{iδa} h Σ (iz)^j/(j+1)!
        let iz = Complex64::new(0.0, z);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(1.0, 0.0);
        for j in 1..24 {
            term = term * iz / (j as f64 + 1.0);
            sum += term;
        }
        unit_phase(delta, a) * sum * h
    } else {
        (unit_phase(delta, b) - unit_phase(delta, a)) / Complex64::new(0.0, delta)
    }
}

/// Where a Gram matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GramDomain {
    /// Exponentials on a time interval.
    Interval { a: f64, b: f64 },
    /// Free orbits observed on `(t_a, t_b) × (−l, l)` inside `(−L, L)`.
    Region {
        #[serde(rename = "L")]
        half_length: f64,
        l: f64,
        t_a: f64,
        t_b: f64,
    },
}

/// A Hermitian positive semidefinite Gram matrix with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub matrix: DMatrix<Complex64>,
    pub domain: GramDomain,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl GramMatrix {
    fn new(matrix: DMatrix<Complex64>, domain: GramDomain) -> Self {
        let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix);
        Self {
            matrix,
            domain,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eig_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eig_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    /// Unit eigenvector of the `k`-th smallest eigenvalue.
    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn quadratic_form(&self, c: &DVector<Complex64>) -> f64 {
        crate::linalg::quadratic_form(&self.matrix, c)
    }
}

/// `G_kn = ∫_I e^{i(λ_n − λ_k)t} dt`, so that `c*Gc = ∫_I |Σ c_n e^{iλ_n t}|² dt`.
pub fn exponential_gram(interval: (f64, f64), freqs: &[f64]) -> Result<GramMatrix> {
    let (a, b) = interval;
    if !(b > a) {
        return Err(Error::Domain(format!("interval ({a}, {b}) has non-positive length")));
    }
    let n = freqs.len();
    if n == 0 {
        return Err(Error::Domain("no frequencies".into()));
    }
    let m = DMatrix::from_fn(n, n, |k, j| {
        if k == j {
            Complex64::new(b - a, 0.0)
        } else {
            exp_integral(freqs[j] - freqs[k], a, b)
        }
    });
    Ok(GramMatrix::new(m, GramDomain::Interval { a, b }))
}

/// Ingham frame bounds of a set of exponentials on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct InghamBounds {
    pub a: f64,
    pub b: f64,
    /// `|I| ≥ 2π/γ_tail`.
    pub hypothesis_met: bool,
    /// False when the lower bound degenerated and was clamped to zero.
    pub valid: bool,
    pub gram: GramMatrix,
}

const DEGENERATE_REL: f64 = 1e-12;

/// `A = λ_min(G)`, `B = λ_max(G)` for the exponentials of `freqs` on `interval`.
pub fn ingham_constants(interval: (f64, f64), freqs: &FrequencySet) -> Result<InghamBounds> {
    let gram = exponential_gram(interval, &freqs.lambdas)?;
    let len = interval.1 - interval.0;
    let b = gram.eig_max();
    let raw = gram.eig_min();
    let valid = raw > DEGENERATE_REL * b;
    Ok(InghamBounds {
        a: if valid { raw } else { raw.max(0.0) },
        b,
        hypothesis_met: len >= 2.0 * PI / freqs.gamma_tail,
        valid,
        gram,
    })
}

fn space_factor(dn: i64, half_length: f64, l: f64) -> f64 {
    if dn == 0 {
        l / half_length
    } else {
        let d = dn as f64;
        (d * PI * l / half_length).sin() / (d * PI)
    }
}

/// Gramian of the orbits `S_L(t)e_n`, `|n| ≤ N`, observed on
/// `(t_a, t_b) × (−l, l)`: `G_mn = ∫e^{i(λ_n−λ_m)t}dt · ∫_{−l}^{l} e_n conj(e_m) dx`.
pub fn region_gramian(order: usize, half_length: f64, l: f64, window: (f64, f64)) -> Result<GramMatrix> {
    if order < 1 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(half_length > 0.0) {
        return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
    }
    if !(l > 0.0 && l < half_length) {
        return Err(Error::Domain(format!("observation half-width l = {l} must lie in (0, {half_length})")));
    }
    let (ta, tb) = window;
    if !(tb > ta) {
        return Err(Error::Domain(format!("time window ({ta}, {tb}) has non-positive length")));
    }
    let n = order as i64;
    let lambdas = (-n..=n)
        .map(|k| eigenvalue(k, half_length))
        .collect::<Result<Vec<_>>>()?;
    let dim = 2 * order + 1;
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let time = if i == j {
            Complex64::new(tb - ta, 0.0)
        } else {
            exp_integral(lambdas[j] - lambdas[i], ta, tb)
        };
        time * space_factor(j as i64 - i as i64, half_length, l)
    });
    Ok(GramMatrix::new(
        m,
        GramDomain::Region {
            half_length,
            l,
            t_a: ta,
            t_b: tb,
        },
    ))
}

/// Observability Gramian on `(0, T) × (−l, l)`.
pub fn observability_gramian(order: usize, half_length: f64, l: f64, horizon: f64) -> Result<GramMatrix> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    region_gramian(order, half_length, l, (0.0, horizon))
}

/// Sharp truncated observability constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "L")]
    pub half_length: f64,
    pub l: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub eig_min: f64,
    #[serde(rename = "C_obs")]
    pub c_obs: f64,
    #[serde(rename = "C_full")]
    pub c_full: f64,
}

/// `C_obs = 1/√λ_min`, `C_full = √T C_obs`.
pub fn observability_constant(order: usize, half_length: f64, l: f64, horizon: f64) -> Result<ObservabilityReport> {
    let g = observability_gramian(order, half_length, l, horizon)?;
    report_from_gramian(&g, order, half_length, l, horizon)
}

pub(crate) fn report_from_gramian(
    g: &GramMatrix,
    order: usize,
    half_length: f64,
    l: f64,
    horizon: f64,
) -> Result<ObservabilityReport> {
    let eig_min = g.eig_min();
    if !(eig_min > 0.0) {
        return Err(Error::NonObservable { eig_min });
    }
    let c_obs = 1.0 / eig_min.sqrt();
    Ok(ObservabilityReport {
        order,
        half_length,
        l,
        horizon,
        eig_min,
        c_obs,
        c_full: horizon.sqrt() * c_obs,
    })
}

/// `c*Gc` for the coefficient vector of a field.
pub fn observed_energy(g: &GramMatrix, u0: &SpectralField) -> Result<f64> {
    if u0.coeffs().len() != g.dim() {
        return Err(Error::Dimension {
            expected: g.dim(),
            got: u0.coeffs().len(),
        });
    }
    Ok(g.quadratic_form(&DVector::from_column_slice(u0.coeffs())))
}
