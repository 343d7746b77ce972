use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::SpaceTimeGrid;
use super::ops::{apply_generator, evolve, project, synthesize};
use crate::error::{Error, Result};

/// Trajectory samples: row-major nodal values (time outer, space inner) or
/// one spectral field per time node.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryValues {
    Nodal(Vec<Complex64>),
    Spectral(Vec<SpectralField>),
}

/// A state sampled on a [`SpaceTimeGrid`], optionally carrying an analytic
/// time derivative per time node.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryField {
    grid: SpaceTimeGrid,
    values: TrajectoryValues,
    time_derivative: Option<Vec<SpectralField>>,
}

fn check_fields(grid: &SpaceTimeGrid, fields: &[SpectralField]) -> Result<()> {
    if fields.len() != grid.nt() {
        return Err(Error::Dimension {
            expected: grid.nt(),
            got: fields.len(),
        });
    }
    if let Some(first) = fields.first() {
        if first.half_length() != grid.half_length() {
            return Err(Error::Precondition(format!(
                "field half-length {} does not match grid half-length {}",
                first.half_length(),
                grid.half_length()
            )));
        }
        if fields.iter().any(|f| !f.same_space(first)) {
            return Err(Error::Precondition("trajectory fields differ in (L, N)".into()));
        }
    }
    Ok(())
}

impl TrajectoryField {
    pub fn nodal(grid: SpaceTimeGrid, values: Vec<Complex64>) -> Result<Self> {
        let expected = grid.nt() * grid.nx();
        if values.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values: TrajectoryValues::Nodal(values),
            time_derivative: None,
        })
    }

    pub fn spectral(grid: SpaceTimeGrid, fields: Vec<SpectralField>) -> Result<Self> {
        check_fields(&grid, &fields)?;
        Ok(Self {
            grid,
            values: TrajectoryValues::Spectral(fields),
            time_derivative: None,
        })
    }

    /// Attaches an analytic time derivative `∂t u(t_k)` (spectral mode only).
    pub fn with_time_derivative(mut self, derivative: Vec<SpectralField>) -> Result<Self> {
        check_fields(&self.grid, &derivative)?;
        match &self.values {
            TrajectoryValues::Spectral(f) => {
                if let (Some(a), Some(b)) = (f.first(), derivative.first()) {
                    if !a.same_space(b) {
                        return Err(Error::Precondition(
                            "derivative fields differ in (L, N) from the trajectory".into(),
                        ));
                    }
                }
            }
            TrajectoryValues::Nodal(_) => {
                return Err(Error::Precondition(
                    "analytic time derivatives require spectral mode".into(),
                ))
            }
        }
        self.time_derivative = Some(derivative);
        Ok(self)
    }

    /// The free orbit `t ↦ S_L(t)u0` with its analytic derivative `A S_L(t)u0`.
    pub fn orbit(u0: &SpectralField, grid: SpaceTimeGrid) -> Result<Self> {
        let fields: Vec<SpectralField> = grid.t_nodes().iter().map(|&t| evolve(u0, t)).collect();
        let deriv = fields.iter().map(apply_generator).collect();
        Self::spectral(grid, fields)?.with_time_derivative(deriv)
    }

    /// Builds a spectral trajectory from `t ↦ (u(t), ∂t u(t))`.
    pub fn from_fn<F>(grid: SpaceTimeGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (SpectralField, SpectralField),
    {
        let (u, ut): (Vec<_>, Vec<_>) = grid.t_nodes().iter().map(|&t| f(t)).unzip();
        Self::spectral(grid, u)?.with_time_derivative(ut)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &TrajectoryValues {
        &self.values
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.values, TrajectoryValues::Spectral(_))
    }

    pub fn time_derivative(&self) -> Option<&[SpectralField]> {
        self.time_derivative.as_deref()
    }

    /// Nodal values on the grid, row-major.
    pub fn to_nodal(&self) -> Vec<Complex64> {
        match &self.values {
            TrajectoryValues::Nodal(v) => v.clone(),
            TrajectoryValues::Spectral(f) => f
                .iter()
                .flat_map(|u| synthesize(u, self.grid.x_nodes()))
                .collect(),
        }
    }

    /// Spectral fields per time node. Nodal data is projected from the
    /// periodic part of the x grid at the largest unaliased order.
    pub fn to_spectral_fields(&self) -> Result<Vec<SpectralField>> {
        match &self.values {
            TrajectoryValues::Spectral(f) => Ok(f.clone()),
            TrajectoryValues::Nodal(v) => {
                let nx = self.grid.nx();
                let m = nx - 1;
                if m < 3 {
                    return Err(Error::Aliasing {
                        samples: m,
                        order: 1,
                        needed: 3,
                    });
                }
                let order = (m - 1) / 2;
                v.chunks(nx)
                    .map(|row| project(&row[..m], self.grid.half_length(), order))
                    .collect()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_nodal().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Time nodes and per-node sup norms.
    pub fn sup_norms_in_time(&self) -> Vec<(f64, f64)> {
        let nx = self.grid.nx();
        self.grid
            .t_nodes()
            .iter()
            .copied()
            .zip(
                self.to_nodal()
                    .chunks(nx)
                    .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            )
            .collect()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let values = match &self.values {
            TrajectoryValues::Nodal(v) => TrajectoryValues::Nodal(v.iter().map(|z| a * z).collect()),
            TrajectoryValues::Spectral(f) => {
                TrajectoryValues::Spectral(f.iter().map(|u| u.scaled(a)).collect())
            }
        };
        Self {
            grid: self.grid.clone(),
            values,
            time_derivative: self
                .time_derivative
                .as_ref()
                .map(|d| d.iter().map(|u| u.scaled(a)).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_p, TimeDerivativeKind};

    #[test]
    fn dimension_checks() {
        let g = SpaceTimeGrid::new(1.0, 1.0, 3, 5).unwrap();
        assert!(TrajectoryField::nodal(g.clone(), vec![Complex64::default(); 14]).is_err());
        assert!(TrajectoryField::nodal(g.clone(), vec![Complex64::default(); 15]).is_ok());
        let z = SpectralField::zeros(1.0, 2).unwrap();
        assert!(TrajectoryField::spectral(g.clone(), vec![z.clone(); 2]).is_err());
        let wrong = SpectralField::zeros(2.0, 2).unwrap();
        assert!(TrajectoryField::spectral(g, vec![wrong; 3]).is_err());
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let g = SpaceTimeGrid::new(1.0, 1.0, 9, 9).unwrap();
        let traj = TrajectoryField::nodal(g, vec![Complex64::default(); 81]).unwrap();
        assert_eq!(apply_p(&traj).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn analytic_orbit_residual() {
        let mut u0 = SpectralField::zeros(std::f64::consts::PI, 32).unwrap();
        for (k, c) in u0.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()) / (1.0 + k as f64);
        }
        let g = SpaceTimeGrid::new(2.0, std::f64::consts::PI, 8, 65).unwrap();
        let r = apply_p(&TrajectoryField::orbit(&u0, g).unwrap()).unwrap();
        assert_eq!(r.derivative, TimeDerivativeKind::Analytic);
        assert!(r.max_abs() < 1e-10);
    }

    #[test]
    fn nodal_round_trip_through_projection() {
        let u0 = SpectralField::basis(1.0, 3, -2).unwrap();
        let g = SpaceTimeGrid::new(1.0, 1.0, 2, 17).unwrap();
        let traj = TrajectoryField::orbit(&u0, g.clone()).unwrap();
        let nodal = TrajectoryField::nodal(g, traj.to_nodal()).unwrap();
        let back = nodal.to_spectral_fields().unwrap();
        let TrajectoryValues::Spectral(orig) = traj.values() else { unreachable!() };
        for (a, b) in back.iter().zip(orig) {
            assert!((a.coeff(-2) - b.coeff(-2)).norm() < 1e-13);
        }
    }
}
