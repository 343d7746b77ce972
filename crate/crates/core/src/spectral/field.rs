use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated Fourier coefficients `c_n`, `n = −N..N`, of a state on the
/// periodic interval `(−L, L)` in the orthonormal basis
/// `e_n(x) = exp(i n π x / L) / √(2L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldJson", into = "FieldJson")]
pub struct SpectralField {
    half_length: f64,
    order: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    #[serde(rename = "L")]
    half_length: f64,
    #[serde(rename = "N")]
    order: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<FieldJson> for SpectralField {
    type Error = Error;
    fn try_from(j: FieldJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::Dimension {
                expected: j.re.len(),
                got: j.im.len(),
            });
        }
        let coeffs = j
            .re
            .into_iter()
            .zip(j.im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect();
        SpectralField::new(j.half_length, j.order, coeffs)
    }
}

impl From<SpectralField> for FieldJson {
    fn from(f: SpectralField) -> Self {
        FieldJson {
            half_length: f.half_length,
            order: f.order,
            re: f.coeffs.iter().map(|c| c.re).collect(),
            im: f.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

const REALITY_TOL: f64 = 1e-14;

impl SpectralField {
    pub fn new(half_length: f64, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
        }
        if order < 1 {
            return Err(Error::Domain("truncation order must be at least 1".into()));
        }
        if coeffs.len() != 2 * order + 1 {
            return Err(Error::Dimension {
                expected: 2 * order + 1,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            half_length,
            order,
            coeffs,
            real_valued: false,
        })
    }

    pub fn zeros(half_length: f64, order: usize) -> Result<Self> {
        Self::new(half_length, order, vec![Complex64::new(0.0, 0.0); 2 * order + 1])
    }

    /// The basis vector `e_n`.
    pub fn basis(half_length: f64, order: usize, n: i64) -> Result<Self> {
        let mut f = Self::zeros(half_length, order)?;
        if n.unsigned_abs() as usize > order {
            return Err(Error::Domain(format!("mode {n} outside truncation {order}")));
        }
        f.coeffs[(n + order as i64) as usize] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    /// Marks the field as real-valued after checking `c_{−n} = conj(c_n)`.
    pub fn into_real(mut self) -> Result<Self> {
        let defect = self.reality_defect();
        if defect > REALITY_TOL {
            return Err(Error::Precondition(format!(
                "field is not real-valued: conjugate-symmetry defect {defect:e}"
            )));
        }
        self.real_valued = true;
        Ok(self)
    }

    pub fn reality_defect(&self) -> f64 {
        let n = self.order as i64;
        (-n..=n)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.real_valued = false;
        &mut self.coeffs
    }

    /// Mode indices `−N..=N` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.order as i64;
        -n..=n
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs[(n + self.order as i64) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// L² norm on (−L, L); equals the coefficient 2-norm by orthonormality.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = Σ conj(a_n) b_n`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.order == other.order && self.half_length == other.half_length
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "fields live in different spaces: (L={}, N={}) vs (L={}, N={})",
                self.half_length, self.order, other.half_length, other.order
            )))
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let real = self.real_valued && a.im == 0.0;
        Self {
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            real_valued: real,
            ..*self
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            real_valued: self.real_valued && other.real_valued && a.im == 0.0 && b.im == 0.0,
            ..*self
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Multiplies each coefficient by `f(n)`.
    pub fn map_modes<F: Fn(i64, Complex64) -> Complex64>(&self, f: F) -> Self {
        let n0 = self.order as i64;
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| f(k as i64 - n0, c))
                .collect(),
            real_valued: false,
            ..*self
        }
    }

    pub(crate) fn with_real_flag(mut self, flag: bool) -> Self {
        self.real_valued = flag;
        self
    }
}
