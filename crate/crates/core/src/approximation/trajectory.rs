use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::unit_phase;
use crate::profile::TimeProfile;
use crate::spectral::{apply_generator, eigenvalue, SpaceTimeGrid, SpectralField, TrajectoryField};

/// `u(t) = χ(t) Σ_j e^{iμ_j t} F_j` on a periodic interval; `χ ≡ 1` when no
/// profile is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    half_length: f64,
    order: usize,
    profile: Option<TimeProfile>,
    components: Vec<(f64, SpectralField)>,
}

impl ModalTrajectory {
    pub fn new(
        half_length: f64,
        order: usize,
        profile: Option<TimeProfile>,
        components: Vec<(f64, SpectralField)>,
    ) -> Result<Self> {
        SpectralField::zeros(half_length, order)?;
        for (mu, f) in &components {
            if !mu.is_finite() {
                return Err(Error::Domain(format!("component frequency {mu} is not finite")));
            }
            if f.half_length() != half_length || f.order() != order {
                return Err(Error::Precondition(
                    "every component must live on the trajectory's (L, N)".into(),
                ));
            }
        }
        Ok(Self {
            half_length,
            order,
            profile,
            components,
        })
    }

    /// `χ(t)S(t)u0`, one component per nonzero mode.
    pub fn orbit(u0: &SpectralField, profile: Option<TimeProfile>) -> Result<Self> {
        let l = u0.half_length();
        let n = u0.order();
        let mut comps = Vec::new();
        for k in u0.modes() {
            let c = u0.coeff(k);
            if c != Complex64::new(0.0, 0.0) {
                let mut f = SpectralField::basis(l, n, k)?;
                f = f.scaled(c);
                comps.push((eigenvalue(k, l)?, f));
            }
        }
        Self::new(l, n, profile, comps)
    }

    pub fn zero(half_length: f64, order: usize) -> Result<Self> {
        Self::new(half_length, order, None, Vec::new())
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn profile(&self) -> Option<&TimeProfile> {
        self.profile.as_ref()
    }

    pub fn components(&self) -> &[(f64, SpectralField)] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|(_, f)| f.norm() == 0.0)
    }

    pub fn profile_value(&self, t: f64) -> (f64, f64) {
        self.profile
            .as_ref()
            .map_or((1.0, 0.0), |p| p.value_and_derivative(t))
    }

    /// Same components, new time profile.
    pub fn with_profile(&self, profile: Option<TimeProfile>) -> Self {
        Self {
            profile,
            ..self.clone()
        }
    }

    /// Scalar weights `(χ e^{iμ_j t}, ∂t(χ e^{iμ_j t}))` of each component.
    pub fn weights(&self, t: f64) -> Vec<(Complex64, Complex64)> {
        let (chi, dchi) = self.profile_value(t);
        self.components
            .iter()
            .map(|(mu, _)| {
                let e = unit_phase(*mu, t);
                (e * chi, e * Complex64::new(dchi, mu * chi))
            })
            .collect()
    }

    fn sum(&self, w: impl Iterator<Item = Complex64>) -> SpectralField {
        let mut acc = vec![Complex64::new(0.0, 0.0); 2 * self.order + 1];
        for (c, (_, f)) in w.zip(&self.components) {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(f.coeffs()) {
                *a += c * b;
            }
        }
        SpectralField::new(self.half_length, self.order, acc).expect("valid space")
    }

    pub fn state(&self, t: f64) -> SpectralField {
        self.sum(self.weights(t).into_iter().map(|w| w.0))
    }

    pub fn time_derivative(&self, t: f64) -> SpectralField {
        self.sum(self.weights(t).into_iter().map(|w| w.1))
    }

    /// `Pu(t) = Σ_j e^{iμ_j t}[(χ′ + iμ_jχ)F_j − χAF_j]`.
    pub fn source(&self, t: f64) -> SpectralField {
        self.time_derivative(t)
            .sub(&apply_generator(&self.state(t)))
            .expect("same space")
    }

    /// Samples on a grid with the analytic time derivative attached.
    pub fn to_trajectory_field(&self, grid: SpaceTimeGrid) -> Result<TrajectoryField> {
        TrajectoryField::from_fn(grid, |t| (self.state(t), self.time_derivative(t)))
    }

    /// Largest component frequency spread `max μ − min μ` (0 for fewer than
    /// two components).
    pub fn frequency_range(&self) -> (f64, f64) {
        let lo = self.components.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = self.components.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo, hi)
        } else {
            (0.0, 0.0)
        }
    }
}

/// A modal trajectory on `(0, T)` vanishing outside `[t1, t2] ⊂ (0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactTrajectory {
    traj: ModalTrajectory,
    horizon: f64,
    support: (f64, f64),
}

impl CompactTrajectory {
    pub fn new(traj: ModalTrajectory, horizon: f64, support: (f64, f64)) -> Result<Self> {
        let (t1, t2) = support;
        if !(0.0 < t1 && t1 < t2 && t2 < horizon) {
            return Err(Error::Domain(format!(
                "support [{t1}, {t2}] must satisfy 0 < t1 < t2 < T = {horizon}"
            )));
        }
        if !traj.is_zero() {
            match traj.profile().and_then(|p| p.support()) {
                Some((a, b)) if a >= t1 - 1e-14 && b <= t2 + 1e-14 => {}
                _ => {
                    return Err(Error::Precondition(format!(
                        "time profile is not supported in [{t1}, {t2}]"
                    )))
                }
            }
        }
        Ok(Self {
            traj,
            horizon,
            support,
        })
    }

    /// `χ(t)S(t)u0` with `χ` compactly supported.
    pub fn windowed_orbit(u0: &SpectralField, profile: TimeProfile, horizon: f64) -> Result<Self> {
        let support = profile
            .support()
            .ok_or_else(|| Error::Precondition("windowing profile must have compact support".into()))?;
        Self::new(ModalTrajectory::orbit(u0, Some(profile))?, horizon, support)
    }

    pub fn trajectory(&self) -> &ModalTrajectory {
        &self.traj
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn half_length(&self) -> f64 {
        self.traj.half_length()
    }

    /// Largest nodal norm at grid times outside the declared support.
    pub fn support_leak(&self, grid: &SpaceTimeGrid) -> f64 {
        let (t1, t2) = self.support;
        grid.t_nodes()
            .iter()
            .filter(|&&t| t < t1 || t > t2)
            .map(|&t| self.traj.state(t).norm())
            .fold(0.0, f64::max)
    }
}
