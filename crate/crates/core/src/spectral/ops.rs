use std::f64::consts::PI;

use num_complex::Complex64;

use super::fd::fornberg_weights;
use super::field::SpectralField;
use super::trajectory::{TrajectoryField, TrajectoryValues};
use crate::error::{Error, Result};
use crate::phase::unit_phase;

const FD_STENCIL: usize = 7;

/// `nπ/L`.
pub fn wavenumber(n: i64, half_length: f64) -> f64 {
    n as f64 * (PI / half_length)
}

/// `λ_n = k⁵ + k³ − k` with `k = nπ/L`.
pub fn eigenvalue(n: i64, half_length: f64) -> Result<f64> {
    if !(half_length > 0.0) || !half_length.is_finite() {
        return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
    }
    let k = wavenumber(n, half_length);
    let k2 = k * k;
    Ok(k * (k2 * k2 + k2 - 1.0) + 0.0)
}

pub(crate) fn lambda(n: i64, half_length: f64) -> f64 {
    let k = wavenumber(n, half_length);
    let k2 = k * k;
    k * (k2 * k2 + k2 - 1.0)
}

/// `S_L(t)u`: `c_n ↦ e^{iλ_n t} c_n`.
pub fn evolve(u: &SpectralField, t: f64) -> SpectralField {
    let l = u.half_length();
    let real = u.is_real_valued();
    u.map_modes(|n, c| unit_phase(lambda(n, l), t) * c)
        .with_real_flag(real)
}

/// `A u = −u_x − u_xxx + u_5x`, i.e. `c_n ↦ iλ_n c_n`.
pub fn apply_generator(u: &SpectralField) -> SpectralField {
    let l = u.half_length();
    u.map_modes(|n, c| Complex64::new(0.0, lambda(n, l)) * c)
}

/// `M` uniform periodic nodes `x_j = −L + 2Lj/M`.
pub fn periodic_nodes(half_length: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| -half_length + 2.0 * half_length * j as f64 / m as f64)
        .collect()
}

fn root_of_unity(k: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)
}

/// Trapezoidal projection of samples on [`periodic_nodes`] onto `e_n`, `|n| ≤ N`.
pub fn project(samples: &[Complex64], half_length: f64, order: usize) -> Result<SpectralField> {
    let m = samples.len();
    if m < 2 * order + 1 {
        return Err(Error::Aliasing {
            samples: m,
            order,
            needed: 2 * order + 1,
        });
    }
    let scale = 2.0 * half_length / m as f64 / (2.0 * half_length).sqrt();
    let roots: Vec<Complex64> = (0..m).map(|k| root_of_unity(k, m)).collect();
    let mut coeffs = Vec::with_capacity(2 * order + 1);
    let n0 = order as i64;
    for n in -n0..=n0 {
        let nm = n.rem_euclid(m as i64) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, f) in samples.iter().enumerate() {
            acc += f * roots[(nm * j) % m].conj();
        }
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        coeffs.push(acc * (scale * sign));
    }
    SpectralField::new(half_length, order, coeffs)
}

/// Nodal values `Σ c_n e_n(x)` at arbitrary points.
pub fn synthesize(u: &SpectralField, x_nodes: &[f64]) -> Vec<Complex64> {
    let l = u.half_length();
    let norm = 1.0 / (2.0 * l).sqrt();
    let n0 = u.order() as i64;
    x_nodes
        .iter()
        .map(|&x| {
            let base = Complex64::from_polar(1.0, PI * x / l);
            let mut acc = u.coeff(0);
            let mut p = Complex64::new(1.0, 0.0);
            for n in 1..=n0 {
                p = if n % 16 == 0 {
                    Complex64::from_polar(1.0, wavenumber(n, l) * x)
                } else {
                    p * base
                };
                acc += u.coeff(n) * p + u.coeff(-n) * p.conj();
            }
            acc * norm
        })
        .collect()
}

/// How the time derivative entering `Pu` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDerivativeKind {
    Analytic,
    FiniteDifference,
}

/// `Pu` on the nodes of a trajectory together with diagnostics.
#[derive(Debug, Clone)]
pub struct PResidual {
    pub residual: TrajectoryField,
    pub derivative: TimeDerivativeKind,
    pub warning: Option<String>,
}

impl PResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.max_abs()
    }
}

/// `(∂t + ∂x + ∂x³ − ∂x⁵)u` at the grid nodes.
///
/// Spatial derivatives are spectral. The time derivative is the declared
/// analytic one when present, otherwise a 7-point finite difference applied
/// to the interaction-picture coefficients `e^{−iλ_n t}c_n(t)`, which are
/// constant along free orbits.
pub fn apply_p(traj: &TrajectoryField) -> Result<PResidual> {
    let grid = traj.grid();
    let fields = match traj.values() {
        TrajectoryValues::Spectral(f) => f.clone(),
        TrajectoryValues::Nodal(_) => traj.to_spectral_fields()?,
    };
    let ts = grid.t_nodes();
    if let Some(dt) = traj.time_derivative() {
        let residual = fields
            .iter()
            .zip(dt)
            .map(|(u, ut)| ut.sub(&apply_generator(u)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(PResidual {
            residual: TrajectoryField::spectral(grid.clone(), residual)?,
            derivative: TimeDerivativeKind::Analytic,
            warning: None,
        });
    }
    let nt = ts.len();
    if nt < FD_STENCIL {
        return Err(Error::TimeResolution(format!(
            "finite-difference time derivative needs at least {FD_STENCIL} time nodes, got {nt}"
        )));
    }
    let l = fields[0].half_length();
    let interaction: Vec<SpectralField> = fields
        .iter()
        .zip(ts)
        .map(|(u, &t)| evolve(u, -t))
        .collect();
    let mut residual = Vec::with_capacity(nt);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..nt {
        let lo = k.saturating_sub(FD_STENCIL / 2).min(nt - FD_STENCIL);
        let idx: Vec<usize> = (lo..lo + FD_STENCIL).collect();
        let xs: Vec<f64> = idx.iter().map(|&i| ts[i]).collect();
        let w6 = fornberg_weights(ts[k], &xs, 1);
        let lo5 = k.saturating_sub(2).min(nt - 5);
        let xs5: Vec<f64> = (lo5..lo5 + 5).map(|i| ts[i]).collect();
        let w4 = fornberg_weights(ts[k], &xs5, 1);
        let d6 = interaction[k].map_modes(|n, _| {
            idx.iter()
                .zip(&w6)
                .map(|(&i, w)| interaction[i].coeff(n) * *w)
                .sum()
        });
        let d4 = interaction[k].map_modes(|n, _| {
            (lo5..lo5 + 5)
                .zip(&w4)
                .map(|(i, w)| interaction[i].coeff(n) * *w)
                .sum()
        });
        worst = worst.max(d6.sub(&d4)?.norm());
        scale = scale.max(d6.norm());
        let t = ts[k];
        residual.push(d6.map_modes(|n, c| unit_phase(lambda(n, l), t) * c));
    }
    let warning = if worst > 1e-3 * scale.max(f64::MIN_POSITIVE) && worst > 1e-12 {
        Some(format!(
            "time resolution may be insufficient: 4th/6th-order derivative estimates differ by {worst:.3e}"
        ))
    } else {
        None
    };
    Ok(PResidual {
        residual: TrajectoryField::spectral(grid.clone(), residual)?,
        derivative: TimeDerivativeKind::FiniteDifference,
        warning,
    })
}
