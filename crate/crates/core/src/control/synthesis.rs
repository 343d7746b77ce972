use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::source::{
    solve_source_problem, Envelope, SeparableSource, SourceParams, SourceSolution,
};
use crate::error::{Error, Result};
use crate::profile::{panel_rule, TimeProfile};
use crate::spectral::{apply_generator, evolve, SpaceTimeGrid, SpectralField, TrajectoryField};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Endpoint residual tolerance for acceptance.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Source values below this count as zero for support checks.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Steer `u0` at `t = 0` to `uT` at `t = T` on the truncated periodic space.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub u0: SpectralField,
    pub ut: SpectralField,
    pub horizon: f64,
    pub eps: f64,
    pub eps_prime: f64,
}

impl ControlProblem {
    /// `eps_prime` defaults to the midpoint of `(eps, T/2)`.
    pub fn new(
        u0: SpectralField,
        ut: SpectralField,
        horizon: f64,
        eps: f64,
        eps_prime: Option<f64>,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if !(eps > 0.0 && eps < 0.5 * horizon) {
            return Err(Error::Domain(format!("eps = {eps} must lie in (0, T/2) with T = {horizon}")));
        }
        let eps_prime = eps_prime.unwrap_or(0.5 * (eps + 0.5 * horizon));
        if !(eps_prime > eps && eps_prime < 0.5 * horizon) {
            return Err(Error::Domain(format!(
                "eps' = {eps_prime} must lie in (eps, T/2) = ({eps}, {})",
                0.5 * horizon
            )));
        }
        if !u0.same_space(&ut) {
            return Err(Error::Precondition("u0 and uT must share (L, N)".into()));
        }
        Ok(Self {
            u0,
            ut,
            horizon,
            eps,
            eps_prime,
        })
    }

    /// `φ`: 1 on `[0, ε′]`, 0 on `[T−ε′, T]`.
    pub fn cutoff(&self) -> TimeProfile {
        TimeProfile::FallingStep {
            start: self.eps_prime,
            end: self.horizon - self.eps_prime,
        }
    }

    /// `K = S(−T)uT − u0`, the envelope of `ũ2 − u1`.
    pub fn mismatch(&self) -> SpectralField {
        evolve(&self.ut, -self.horizon)
            .sub(&self.u0)
            .expect("validated space")
    }

    /// Window `[(ε+ε′)/2, T − (ε+ε′)/2]` of the correction and of `ω`.
    pub fn correction_window(&self) -> (f64, f64) {
        let m = 0.5 * (self.eps + self.eps_prime);
        (m, self.horizon - m)
    }

    /// Time-reversed problem for `(uT, u0)` roles swapped.
    pub fn swapped(&self) -> Self {
        Self {
            u0: self.ut.clone(),
            ut: self.u0.clone(),
            ..self.clone()
        }
    }
}

/// `f = φ′(t)(ũ2 − u1)` with `u1 = S(t)u0`, `ũ2 = S(t−T)uT`.
pub fn blend_source(prob: &ControlProblem) -> SeparableSource {
    let phi = prob.cutoff();
    SeparableSource::new(
        Envelope::ProfileDerivative(phi),
        prob.mismatch(),
        (prob.eps_prime, prob.horizon - prob.eps_prime),
    )
}

/// A trajectory together with the source it solves, `Pu = w`.
pub trait ControlledTrajectory {
    fn horizon(&self) -> f64;
    fn state(&self, t: f64) -> SpectralField;
    /// `w(t) = (Pu)(t)`.
    fn source(&self, t: f64) -> SpectralField;
    fn source_support(&self) -> (f64, f64);
    fn source_breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.source_support();
        vec![a, b]
    }
}

/// The blended trajectory `φu1 + (1−φ)ũ2 + ω` and its source.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    pub problem: ControlProblem,
    pub cutoff: TimeProfile,
    /// `F = f + g` where `g` restores compatibility; `g` is the control.
    pub correction: SeparableSource,
    pub omega: SourceSolution,
    pub residual_0: f64,
    pub residual_t: f64,
    pub source_support: (f64, f64),
    pub c_num: f64,
    /// `‖w‖_{L²}` over space-time.
    pub control_norm: f64,
    pub support_ok: bool,
    pub accepted: bool,
}

/// Serializable summary of a [`ControlSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub residual_0: f64,
    #[serde(rename = "residual_T")]
    pub residual_t: f64,
    pub source_support: [f64; 2],
    #[serde(rename = "C_num")]
    pub c_num: f64,
    pub accepted: bool,
}

impl ControlSolution {
    pub fn summary(&self) -> ControlSummary {
        ControlSummary {
            residual_0: self.residual_0,
            residual_t: self.residual_t,
            source_support: [self.source_support.0, self.source_support.1],
            c_num: self.c_num,
            accepted: self.accepted,
        }
    }

    /// `S(−t)w(t) = −φ′(t)K + z′(t)`.
    pub fn source_envelope(&self, t: f64) -> SpectralField {
        let k = self.problem.mismatch();
        let (_, zp) = self.omega.envelope(t);
        zp.combine(ONE, &k, Complex64::new(-self.cutoff.derivative(t), 0.0))
            .expect("same space")
    }

    /// Samples the trajectory on a grid with its analytic time derivative
    /// `∂t u = A u + w`.
    pub fn trajectory_field(&self, grid: SpaceTimeGrid) -> Result<TrajectoryField> {
        TrajectoryField::from_fn(grid, |t| {
            let u = self.state(t);
            let ut = apply_generator(&u).add(&self.source(t)).expect("same space");
            (u, ut)
        })
    }

    /// Adds the free orbit `S(t)n` to the state (a solution that no longer
    /// matches the endpoints).
    pub fn with_state_perturbation(&self, noise: SpectralField) -> Perturbed<'_> {
        Perturbed { base: self, noise }
    }
}

impl ControlledTrajectory for ControlSolution {
    fn horizon(&self) -> f64 {
        self.problem.horizon
    }

    fn state(&self, t: f64) -> SpectralField {
        let phi = self.cutoff.value(t);
        let u1 = evolve(&self.problem.u0, t);
        let u2 = evolve(&self.problem.ut, t - self.problem.horizon);
        let blend = if phi == 1.0 {
            u1
        } else if phi == 0.0 {
            u2
        } else {
            u1.combine(Complex64::new(phi, 0.0), &u2, Complex64::new(1.0 - phi, 0.0))
                .expect("same space")
        };
        let (a, b) = self.omega.window();
        if t < a || t > b {
            blend
        } else {
            blend.add(&self.omega.v_at(t)).expect("same space")
        }
    }

    fn source(&self, t: f64) -> SpectralField {
        let (a, b) = self.source_support;
        if t < a || t > b {
            return SpectralField::zeros(self.problem.u0.half_length(), self.problem.u0.order())
                .expect("valid space");
        }
        evolve(&self.source_envelope(t), t)
    }

    fn source_support(&self) -> (f64, f64) {
        self.source_support
    }

    fn source_breakpoints(&self) -> Vec<f64> {
        let b = &self.omega.basis;
        let mut v: Vec<f64> = (0..b.intervals()).map(|k| b.knot_interval(k).0).collect();
        v.push(b.interval().1);
        v.push(self.problem.eps_prime);
        v.push(self.problem.horizon - self.problem.eps_prime);
        v
    }
}

/// A controlled trajectory with a free orbit added to its state.
pub struct Perturbed<'a> {
    base: &'a dyn ControlledTrajectory,
    noise: SpectralField,
}

impl ControlledTrajectory for Perturbed<'_> {
    fn horizon(&self) -> f64 {
        self.base.horizon()
    }
    fn state(&self, t: f64) -> SpectralField {
        self.base.state(t).add(&evolve(&self.noise, t)).expect("same space")
    }
    fn source(&self, t: f64) -> SpectralField {
        self.base.source(t)
    }
    fn source_support(&self) -> (f64, f64) {
        self.base.source_support()
    }
    fn source_breakpoints(&self) -> Vec<f64> {
        self.base.source_breakpoints()
    }
}

/// Builds `u = φu1 + (1−φ)ũ2 + ω` where `Pω = f + g`, `f` the blend
/// residual and `g = S(t)Kρ(t)/∫ρ` the smallest-norm bump correction making
/// `f + g` compatible with `ω` vanishing outside the correction window. The
/// source of `u` is `w = −f + Pω ≈ g`.
pub fn synthesize_control(prob: &ControlProblem, params: &SourceParams) -> Result<ControlSolution> {
    let f = blend_source(prob);
    let window = prob.correction_window();
    let rho = TimeProfile::ExpBump {
        lo: window.0,
        hi: window.1,
    };
    let mass = panel_rule(window.0, window.1, &rho.breakpoints(), 64, 12).integrate(|t| rho.value(t));
    let k = prob.mismatch();
    let correction = SeparableSource::new(
        Envelope::Profile(rho),
        k.scaled(Complex64::new(1.0 / mass, 0.0)),
        window,
    );
    let total = super::source::SumSource::new(vec![(ONE, f), (ONE, correction.clone())])?;
    let omega = solve_source_problem(
        &total,
        &SourceParams {
            window: Some(window),
            ..*params
        },
    )?;
    let mut sol = ControlSolution {
        problem: prob.clone(),
        cutoff: prob.cutoff(),
        correction,
        c_num: omega.c_num,
        omega,
        residual_0: f64::NAN,
        residual_t: f64::NAN,
        source_support: window,
        control_norm: 0.0,
        support_ok: false,
        accepted: false,
    };
    let check = verify_endpoints(&sol, prob, 1)?;
    sol.residual_0 = check.residual_0;
    sol.residual_t = check.residual_t;
    sol.support_ok = check.support_ok;
    sol.control_norm = check.source_norm;
    sol.accepted = check.residual_0 < RESIDUAL_TOL
        && check.residual_t < RESIDUAL_TOL
        && check.support_ok
        && sol.omega.compatible;
    Ok(sol)
}

/// Independent endpoint and support audit of a controlled trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointCheck {
    pub residual_0: f64,
    pub residual_t: f64,
    pub support_ok: bool,
    /// Largest `‖w(t)‖` sampled outside the declared source support.
    pub leak: f64,
    pub source_norm: f64,
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

const LEAK_SAMPLES: usize = 4001;

/// Recomputes the endpoint residuals from the state and, through Duhamel's
/// formula `u(T) = S(T)u(0) + ∫S(T−s)w(s)ds`, from the source; each residual
/// is the larger of the two. `refine` multiplies the quadrature panels.
pub fn verify_endpoints(sol: &dyn ControlledTrajectory, prob: &ControlProblem, refine: usize) -> Result<EndpointCheck> {
    let horizon = sol.horizon();
    let rule = panel_rule(0.0, horizon, &sol.source_breakpoints(), 2 * refine.max(1), 12);
    let mut drive = SpectralField::zeros(prob.u0.half_length(), prob.u0.order())?;
    let mut norm2 = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let wt = sol.source(t);
        norm2 += w * wt.norm_sqr();
        drive = drive.combine(ONE, &evolve(&wt, -t), Complex64::new(w, 0.0))?;
    }
    let start = sol.state(0.0);
    let end = sol.state(horizon);
    let forward = evolve(&start.add(&drive)?, horizon);
    let backward = evolve(&end, -horizon).sub(&drive)?;
    let r_t = end.sub(&prob.ut)?.norm().max(forward.sub(&prob.ut)?.norm());
    let r_0 = start.sub(&prob.u0)?.norm().max(backward.sub(&prob.u0)?.norm());
    let (lo, hi) = sol.source_support();
    let mut leak = 0.0f64;
    for j in 0..LEAK_SAMPLES {
        let t = horizon * j as f64 / (LEAK_SAMPLES - 1) as f64;
        if t < lo || t > hi {
            leak = leak.max(sol.source(t).norm());
        }
    }
    Ok(EndpointCheck {
        residual_0: relative(r_0, prob.u0.norm()),
        residual_t: relative(r_t, prob.ut.norm()),
        support_ok: leak < SUPPORT_TOL && lo > prob.eps && hi < horizon - prob.eps,
        leak,
        source_norm: norm2.sqrt(),
    })
}

/// `max ‖u(t) − S(t)u0‖` over `[0, ε]` and `max ‖u(t) − S(t−T)uT‖` over
/// `[T−ε, T]`, sampled at `samples` points each.
pub fn exactness_defects(sol: &dyn ControlledTrajectory, prob: &ControlProblem, samples: usize) -> (f64, f64) {
    let n = samples.max(2);
    let mut d0 = 0.0f64;
    let mut dt = 0.0f64;
    for j in 0..n {
        let s = prob.eps * j as f64 / (n - 1) as f64;
        d0 = d0.max(sol.state(s).sub(&evolve(&prob.u0, s)).expect("same space").norm());
        let t = prob.horizon - s;
        dt = dt.max(
            sol.state(t)
                .sub(&evolve(&prob.ut, t - prob.horizon))
                .expect("same space")
                .norm(),
        );
    }
    (d0, dt)
}
