use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trajectory::{CompactTrajectory, ModalTrajectory};
use crate::control::{
    envelope_integral, solve_source_problem, Envelope, SeparableSource, SourceParams,
    SourceSolution, SourceTerm,
};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::observability::{exp_integral, observability_constant, region_gramian};
use crate::phase::unit_phase;
use crate::profile::{panel_rule, TimeProfile};
use crate::quadrature::CompositeRule;
use crate::spectral::{
    apply_generator, apply_p, eigenvalue, evolve, periodic_nodes, project, synthesize,
    wavenumber, SpaceTimeGrid, SpectralField, TrajectoryField,
};

/// Tikhonov weight (relative to the largest Gram diagonal) for orbit and
/// extension fits.
pub const TIKHONOV: f64 = 1e-12;
const ILL_CONDITIONED: f64 = 1e-10;
const MAX_NODES: usize = 4_000_000;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `X_km = ∫_{−l}^{l} conj(e_k) e_m dx` with `e_k` the modes of `(L_b, N_b)`
/// and `e_m` those of `(L_s, N_s)`.
pub fn cross_gram(nb: usize, lb: f64, ns: usize, ls: f64, l: f64) -> DMatrix<Complex64> {
    let scale = 1.0 / (4.0 * lb * ls).sqrt();
    let (nb, ns) = (nb as i64, ns as i64);
    DMatrix::from_fn((2 * nb + 1) as usize, (2 * ns + 1) as usize, |i, j| {
        let kappa = wavenumber(j as i64 - ns, ls) - wavenumber(i as i64 - nb, lb);
        let z = kappa * l;
        let v = if z.abs() < 1e-4 {
            2.0 * l * (1.0 - z * z / 6.0 + z.powi(4) / 120.0)
        } else {
            2.0 * z.sin() / kappa
        };
        Complex64::new(v * scale, 0.0)
    })
}

/// Regularized solve of `(G + τ·max diag·I) a = b`; flags ill conditioning.
fn regularized_solve(g: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<(DVector<Complex64>, bool)> {
    let (eig, _) = hermitian_eigen(g);
    let top = eig.last().copied().unwrap_or(0.0);
    let flagged = eig.first().copied().unwrap_or(0.0) < ILL_CONDITIONED * top;
    let diag = (0..g.nrows()).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let mut m = g.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(TIKHONOV * diag, 0.0);
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("regularized Gram matrix is not positive definite".into()))?;
    Ok((chol.solve(b), flagged))
}

/// Least-squares extension of a field to a larger periodic interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExtension {
    pub field: SpectralField,
    pub regularized: bool,
}

/// Fits `Σ_{|k|≤N_b} a_k e_k` on `(−L_b, L_b)` to `f` over `(−l, l)`.
pub fn extend_field(f: &SpectralField, lb: f64, nb: usize, l: f64) -> Result<FieldExtension> {
    if !(l > 0.0 && l <= f.half_length() && l <= lb) {
        return Err(Error::Domain(format!(
            "fit half-width l = {l} must lie in (0, min(L_s, L_b)] = (0, {}]",
            f.half_length().min(lb)
        )));
    }
    let g = cross_gram(nb, lb, nb, lb, l);
    let x = cross_gram(nb, lb, f.order(), f.half_length(), l);
    let rhs = &x * DVector::from_column_slice(f.coeffs());
    let (a, regularized) = regularized_solve(&g, &rhs)?;
    Ok(FieldExtension {
        field: SpectralField::new(lb, nb, a.as_slice().to_vec())?,
        regularized,
    })
}

fn x_rule(kmax: f64, l: f64) -> CompositeRule {
    let periods = kmax * 2.0 * l / (2.0 * std::f64::consts::PI);
    CompositeRule::new(-l, l, (periods.ceil() as usize + 4).max(8), 12)
}

fn time_rule(window: (f64, f64), breaks: &[f64], spread: f64) -> Result<CompositeRule> {
    let (a, b) = window;
    let len = b - a;
    let periods = spread * len / (2.0 * std::f64::consts::PI);
    let panels = ((3.0 * periods).ceil() as usize).max(4);
    let segs = breaks.iter().filter(|&&p| p > a && p < b).count() + 1;
    if panels * segs * 12 > MAX_NODES {
        return Err(Error::TimeResolution(format!(
            "time quadrature over ({a}, {b}) would need {} nodes",
            panels * segs * 12
        )));
    }
    Ok(panel_rule(a, b, breaks, panels, 12))
}

fn profile_breaks(u: &ModalTrajectory) -> Vec<f64> {
    u.profile().map(|p| p.breakpoints()).unwrap_or_default()
}

/// `‖a − b‖_{L²(window × (−l, l))}` by tensor Gauss–Legendre quadrature.
pub fn region_distance(a: &ModalTrajectory, b: &ModalTrajectory, window: (f64, f64), l: f64) -> Result<f64> {
    let kmax = wavenumber(a.order() as i64, a.half_length()).max(wavenumber(b.order() as i64, b.half_length()));
    let xr = x_rule(kmax, l);
    let nodal = |u: &ModalTrajectory| -> Vec<Vec<Complex64>> {
        u.components().iter().map(|(_, f)| synthesize(f, &xr.nodes)).collect()
    };
    let (na, nb) = (nodal(a), nodal(b));
    let (alo, ahi) = a.frequency_range();
    let (blo, bhi) = b.frequency_range();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (l0, h0, n) in [(alo, ahi, a.components().len()), (blo, bhi, b.components().len())] {
        if n > 0 {
            lo = lo.min(l0);
            hi = hi.max(h0);
        }
    }
    let spread = if lo.is_finite() { hi - lo } else { 0.0 };
    let mut breaks = profile_breaks(a);
    breaks.extend(profile_breaks(b));
    let tr = time_rule(window, &breaks, spread)?;
    let mut total = 0.0;
    let mut r = vec![ZERO; xr.len()];
    for (&t, &wt) in tr.nodes.iter().zip(&tr.weights) {
        let (wa, wb) = (a.weights(t), b.weights(t));
        r.iter_mut().for_each(|z| *z = ZERO);
        for (c, vals) in wa.iter().map(|w| w.0).zip(&na).chain(wb.iter().map(|w| -w.0).zip(&nb)) {
            if c == ZERO {
                continue;
            }
            for (z, v) in r.iter_mut().zip(vals) {
                *z += c * v;
            }
        }
        total += wt * r.iter().zip(&xr.weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Result of [`smooth_truncate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub trajectory: CompactTrajectory,
    /// Half-width of the time mollifier that was used.
    pub width: f64,
    /// `‖u′ − u‖` over the inner region.
    pub error: f64,
}

/// Mollifies `u` in time along the flow (the envelope `χ` is convolved, the
/// phases `e^{iμt}` are kept) and optionally multiplies every component by a
/// smooth spatial cutoff equal to 1 on `(−l1, l1)` and 0 outside `(−l2, l2)`.
/// The kernel half-width starts at `δ/4` and is halved until
/// `‖u′ − u‖ < η` on the inner region.
pub fn smooth_truncate(
    u: &CompactTrajectory,
    delta: f64,
    eta: f64,
    spatial: Option<(f64, f64)>,
) -> Result<Truncation> {
    let (t1, t2) = u.support();
    let horizon = u.horizon();
    if !(delta > 0.0 && eta > 0.0) {
        return Err(Error::Domain("delta and eta must be positive".into()));
    }
    if 2.0 * delta >= t1.min(horizon - t2) {
        return Err(Error::Precondition(format!(
            "2·delta = {} leaves no room inside (0, T) around [{t1}, {t2}]",
            2.0 * delta
        )));
    }
    let traj = u.trajectory();
    let (ll, n) = (traj.half_length(), traj.order());
    let inner = match spatial {
        Some((l1, l2)) if 0.0 < l1 && l1 < l2 && l2 < ll => l1,
        Some((l1, l2)) => {
            return Err(Error::Domain(format!("spatial cutoff needs 0 < l1 < l2 < L, got ({l1}, {l2}, {ll})")))
        }
        None => ll,
    };
    if traj.is_zero() {
        return Ok(Truncation {
            trajectory: u.clone(),
            width: 0.0,
            error: 0.0,
        });
    }
    let comps = match spatial {
        None => traj.components().to_vec(),
        Some((l1, l2)) => {
            let cut = TimeProfile::Plateau { a: -l2, b: -l1, c: l1, d: l2 };
            let nodes = periodic_nodes(ll, 4 * (2 * n + 1));
            let mask: Vec<f64> = nodes.iter().map(|&x| cut.value(x)).collect();
            traj.components()
                .iter()
                .map(|(mu, f)| {
                    let vals: Vec<Complex64> =
                        synthesize(f, &nodes).into_iter().zip(&mask).map(|(v, m)| v * m).collect();
                    Ok((*mu, project(&vals, ll, n)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let base = traj.profile().cloned().expect("nonzero compact trajectory has a profile");
    let cut = ModalTrajectory::new(ll, n, Some(base.clone()), comps.clone())?;
    let floor = region_distance(&cut, traj, (t1, t2), inner)?;
    if floor >= eta {
        return Err(Error::Precondition(format!(
            "spatial truncation error {floor:.3e} already exceeds eta = {eta:.3e}"
        )));
    }
    let mut width = delta / 4.0;
    for _ in 0..40 {
        let profile = TimeProfile::Mollified {
            base: Box::new(base.clone()),
            width,
        };
        let m = ModalTrajectory::new(ll, n, Some(profile), comps.clone())?;
        let error = region_distance(&m, traj, (t1 - width, t2 + width), inner)?;
        if error < eta {
            return Ok(Truncation {
                trajectory: CompactTrajectory::new(m, horizon, (t1 - width, t2 + width))?,
                width,
                error,
            });
        }
        width *= 0.5;
    }
    Err(Error::Precondition(format!("mollification cannot reach eta = {eta:.3e}")))
}

/// Semigroup orbit fitted on one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFit {
    pub window: (f64, f64),
    /// State at the window start.
    pub v: SpectralField,
    /// `‖S(· − t_a)v − u‖` over the window and the inner region.
    pub fit_error: f64,
    /// `‖u‖` over the window and the inner region.
    pub data_norm: f64,
    pub regularized: bool,
    /// `‖S v‖` on the big interval over `‖S v‖` on the inner region (0 for `v = 0`).
    pub stability_ratio: f64,
    /// `√|window|·C_obs` for the big interval observed on the inner region.
    pub c_full: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFits {
    pub first: WindowFit,
    pub second: WindowFit,
}

impl WindowFits {
    pub fn fit_errors(&self) -> [f64; 2] {
        [self.first.fit_error, self.second.fit_error]
    }
}

fn fit_window(u: &ModalTrajectory, window: (f64, f64), lb: f64, nb: usize, l: f64) -> Result<WindowFit> {
    let (ta, tb) = window;
    let len = tb - ta;
    let g = region_gramian(nb, lb, l, (0.0, len))?;
    let (ls, ns) = (u.half_length(), u.order());
    let x = cross_gram(nb, lb, ns, ls, l);
    let dim = 2 * nb + 1;
    let lambdas = (-(nb as i64)..=nb as i64)
        .map(|k| eigenvalue(k, lb))
        .collect::<Result<Vec<_>>>()?;
    let active = match u.profile() {
        None => true,
        Some(p) => match p.support() {
            Some((a, b)) => a < tb && b > ta,
            None => true,
        },
    };
    let mut b = DVector::from_element(dim, ZERO);
    if active && !u.is_zero() {
        let breaks = profile_breaks(u);
        for (mu, f) in u.components() {
            let xf = &x * DVector::from_column_slice(f.coeffs());
            for k in 0..dim {
                let d = mu - lambdas[k];
                let time = match u.profile() {
                    None => unit_phase(*mu, ta) * exp_integral(d, 0.0, len),
                    Some(p) => {
                        let r = time_rule(window, &breaks, d.abs())?;
                        r.nodes
                            .iter()
                            .zip(&r.weights)
                            .map(|(&t, &w)| unit_phase(*mu, t) * unit_phase(-lambdas[k], t - ta) * (w * p.value(t)))
                            .sum()
                    }
                };
                b[k] += time * xf[k];
            }
        }
    }
    let (a, regularized) = regularized_solve(&g.matrix, &b)?;
    let data_norm = if active && !u.is_zero() {
        let xs = cross_gram(ns, ls, ns, ls, l);
        let (lo, hi) = u.frequency_range();
        let r = time_rule(window, &profile_breaks(u), hi - lo)?;
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&t, &w)| {
                let c = DVector::from_column_slice(u.state(t).coeffs());
                w * (c.adjoint() * &xs * &c)[(0, 0)].re
            })
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    } else {
        0.0
    };
    let ga = &g.matrix * &a;
    let inner = a.dotc(&ga).re;
    let v = SpectralField::new(lb, nb, a.as_slice().to_vec())?;
    let fitted = ModalTrajectory::orbit(&evolve(&v, -ta), None)?;
    let fit_error = if fitted.is_zero() && !active {
        0.0
    } else {
        match region_distance(&fitted, u, window, l) {
            Ok(e) => e,
            Err(Error::TimeResolution(_)) => (data_norm * data_norm - 2.0 * a.dotc(&b).re + inner).max(0.0).sqrt(),
            Err(e) => return Err(e),
        }
    };
    let stability_ratio = if inner > 0.0 {
        (len * a.norm_squared() / inner).sqrt()
    } else {
        0.0
    };
    Ok(WindowFit {
        window,
        v,
        fit_error,
        data_norm,
        regularized,
        stability_ratio,
        c_full: observability_constant(nb, lb, l, len)?.c_full,
    })
}

/// Least-squares fits of orbits `S_{L_b}(t − t_a)v` of the big interval to
/// `u` over `(t1 − 2δ, t1 − δ) × (−l, l)` and `(t2 + δ, t2 + 2δ) × (−l, l)`.
#[allow(clippy::too_many_arguments)]
pub fn match_semigroup_windows(
    u: &ModalTrajectory,
    anchors: (f64, f64),
    horizon: f64,
    delta: f64,
    lb: f64,
    nb: usize,
    l: f64,
) -> Result<WindowFits> {
    let (t1, t2) = anchors;
    if !(delta > 0.0 && 2.0 * delta < t1.min(horizon - t2) && t1 < t2) {
        return Err(Error::Precondition(format!(
            "windows need 0 < 2·delta < min(t1, T − t2); got delta = {delta}, [{t1}, {t2}], T = {horizon}"
        )));
    }
    if !(l > 0.0 && l < u.half_length() && u.half_length() <= lb) {
        return Err(Error::Domain(format!(
            "need 0 < l < L_s ≤ L_b; got l = {l}, L_s = {}, L_b = {lb}",
            u.half_length()
        )));
    }
    Ok(WindowFits {
        first: fit_window(u, (t1 - 2.0 * delta, t1 - delta), lb, nb, l)?,
        second: fit_window(u, (t2 + delta, t2 + 2.0 * delta), lb, nb, l)?,
    })
}

/// `−φ′(t)ṽ(t)` plus a bump correction making its envelope integrate to zero.
struct CutResidual<'a> {
    carried: &'a ModalTrajectory,
    cutoff: &'a TimeProfile,
    support: (f64, f64),
    correction: Option<SeparableSource>,
}

impl SourceTerm for CutResidual<'_> {
    fn half_length(&self) -> f64 {
        self.carried.half_length()
    }
    fn order(&self) -> usize {
        self.carried.order()
    }
    fn envelope_at(&self, t: f64) -> SpectralField {
        let d = self.cutoff.derivative(t);
        let mut e = if d == 0.0 {
            SpectralField::zeros(self.half_length(), self.order()).expect("valid space")
        } else {
            evolve(&self.carried.state(t).scaled(Complex64::new(-d, 0.0)), -t)
        };
        if let Some(c) = &self.correction {
            e = e.add(&c.envelope_at(t)).expect("same space");
        }
        e
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.cutoff.breakpoints();
        b.extend(profile_breaks(self.carried));
        b
    }
}

/// `v = φṽ + ω` on the big interval, with `Pv = φPṽ + g` declared.
#[derive(Debug, Clone)]
pub struct ExtendedTrajectory {
    /// `ṽ`: the least-squares extension of the input, carrying its own source.
    pub carried: ModalTrajectory,
    pub cutoff: TimeProfile,
    /// `φṽ`.
    pub modal: ModalTrajectory,
    pub omega: Option<SourceSolution>,
    /// Compatibility correction `g` entering `Pω = −φ′ṽ + g`.
    pub correction: Option<SeparableSource>,
}

impl ExtendedTrajectory {
    pub fn state(&self, t: f64) -> SpectralField {
        let v = self.modal.state(t);
        match &self.omega {
            Some(w) if t >= w.window().0 && t <= w.window().1 => v.add(&w.v_at(t)).expect("same space"),
            _ => v,
        }
    }

    pub fn time_derivative(&self, t: f64) -> SpectralField {
        let v = self.modal.time_derivative(t);
        match &self.omega {
            Some(w) if t >= w.window().0 && t <= w.window().1 => {
                let om = w.v_at(t);
                v.add(&apply_generator(&om).add(&w.pv_at(t)).expect("same space"))
                    .expect("same space")
            }
            _ => v,
        }
    }

    /// `φ(t)·Pṽ(t) + g(t)`.
    pub fn declared_source(&self, t: f64) -> SpectralField {
        let phi = self.cutoff.value(t);
        let mut s = if phi == 0.0 {
            SpectralField::zeros(self.modal.half_length(), self.modal.order()).expect("valid space")
        } else {
            self.carried.source(t).scaled(Complex64::new(phi, 0.0))
        };
        if let Some(g) = &self.correction {
            s = s.add(&g.field_at(t)).expect("same space");
        }
        s
    }

    pub fn to_trajectory_field(&self, grid: SpaceTimeGrid) -> Result<TrajectoryField> {
        TrajectoryField::from_fn(grid, |t| (self.state(t), self.time_derivative(t)))
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionParams {
    /// Truncation orders on the big interval, tried in turn until accepted.
    pub big_orders: Vec<usize>,
    pub source: SourceParams,
    /// Time nodes of the `Pv` audit grid.
    pub pv_samples: usize,
    pub mollify: bool,
}

impl Default for ExtensionParams {
    fn default() -> Self {
        Self {
            big_orders: vec![16, 32, 48],
            source: SourceParams::default(),
            pv_samples: 64,
            mollify: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub v: ExtendedTrajectory,
    /// `‖v − u‖_{L²((0,T)×(−a+1, a−1))}`, plus `‖ω‖` when a correction was needed.
    pub achieved_error: f64,
    /// Max-norm of `Pv − (φPṽ + g)` on the audit grid.
    pub pv_residual: f64,
    pub support: (f64, f64),
    /// Largest `‖v(t)‖` at audit times outside `support`.
    pub support_leak: f64,
    pub accepted: bool,
    pub eps: f64,
    pub order: usize,
    pub fits: WindowFits,
    pub truncation_error: f64,
    pub correction_norm: f64,
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSummary {
    pub achieved_error: f64,
    pub pv_residual: f64,
    pub support: [f64; 2],
    pub accepted: bool,
}

impl ExtensionResult {
    pub fn summary(&self) -> ExtensionSummary {
        ExtensionSummary {
            achieved_error: self.achieved_error,
            pv_residual: self.pv_residual,
            support: [self.support.0, self.support.1],
            accepted: self.accepted,
        }
    }
}

/// Pv tolerance for acceptance.
pub const PV_TOL: f64 = 1e-8;
const SUPPORT_TOL: f64 = 1e-10;

/// Solves `Pω = −φ′ṽ + g` on `support`, with `g = S(t)ρ(t)c` the bump
/// correction that makes the right-hand side compatible.
fn cut_correction(
    carried: &ModalTrajectory,
    cutoff: &TimeProfile,
    support: (f64, f64),
    source: &SourceParams,
) -> Result<(Option<SourceSolution>, Option<SeparableSource>)> {
    let mut cut = CutResidual {
        carried,
        cutoff,
        support,
        correction: None,
    };
    let (lo, hi) = carried.frequency_range();
    let spread = lo.abs().max(hi.abs()) + eigenvalue(carried.order() as i64, carried.half_length())?.abs();
    let panels = ((3.0 * spread * (support.1 - support.0) / (2.0 * std::f64::consts::PI)).ceil() as usize)
        .clamp(16, 100_000);
    let k = envelope_integral(&cut, panels);
    let rho = TimeProfile::ExpBump {
        lo: support.0,
        hi: support.1,
    };
    let mass = panel_rule(support.0, support.1, &rho.breakpoints(), 64, 12).integrate(|t| rho.value(t));
    let g = SeparableSource::new(Envelope::Profile(rho), k.scaled(Complex64::new(-1.0 / mass, 0.0)), support);
    cut.correction = Some(g.clone());
    let w = solve_source_problem(
        &cut,
        &SourceParams {
            window: Some(support),
            ..*source
        },
    )?;
    Ok((Some(w), Some(g)))
}

/// Extends `u`, given on `(−a, a)`, to `(−a−1, a+1)` so that the result
/// matches `u` on `(−a+1, a−1)` to within `eps`, vanishes outside
/// `[t1 − eps/2, t2 + eps/2]` and solves `Pv = φPṽ + g` with `g` the
/// compatibility correction of the cutoff residual (zero when the cutoff
/// ramps miss the support of `ṽ`).
pub fn extend_solution(u: &CompactTrajectory, eps: f64, params: &ExtensionParams) -> Result<ExtensionResult> {
    let (t1, t2) = u.support();
    let horizon = u.horizon();
    if !(eps > 0.0 && eps < t1.min(horizon - t2)) {
        return Err(Error::Precondition(format!(
            "eps = {eps} must lie in (0, min(t1, T − t2)) = (0, {})",
            t1.min(horizon - t2)
        )));
    }
    let a = u.half_length();
    if a <= 1.0 {
        return Err(Error::Precondition(format!("half-length a = {a} must exceed 1 (inner region (−a+1, a−1))")));
    }
    if params.big_orders.is_empty() {
        return Err(Error::Config("no big-interval orders to try".into()));
    }
    let (lb, l) = (a + 1.0, a - 1.0);
    let delta = eps / 4.0;
    let (smoothed, truncation_error) = if params.mollify {
        let tr = smooth_truncate(u, delta, eps / 2.0, None)?;
        (tr.trajectory, tr.error)
    } else {
        (u.clone(), 0.0)
    };
    let src = smoothed.trajectory();
    let cutoff = TimeProfile::Plateau {
        a: t1 - eps / 2.0,
        b: t1 - eps / 4.0,
        c: t2 + eps / 4.0,
        d: t2 + eps / 2.0,
    };
    let support = (t1 - eps / 2.0, t2 + eps / 2.0);
    let mut best: Option<ExtensionResult> = None;
    for &nb in &params.big_orders {
        let fits = match_semigroup_windows(src, (t1, t2), horizon, delta, lb, nb, l)?;
        let mut regularized = false;
        let comps = src
            .components()
            .iter()
            .map(|(mu, f)| {
                let e = extend_field(f, lb, nb, l)?;
                regularized |= e.regularized;
                Ok((*mu, e.field))
            })
            .collect::<Result<Vec<_>>>()?;
        let carried = ModalTrajectory::new(lb, nb, src.profile().cloned(), comps)?;
        let modal = carried.with_profile(Some(match src.profile() {
            Some(p) => TimeProfile::Product(Box::new(cutoff.clone()), Box::new(p.clone())),
            None => cutoff.clone(),
        }));
        let ramps_hit = match src.profile().and_then(|p| p.support()) {
            _ if carried.is_zero() => false,
            Some((lo, hi)) => lo < t1 - eps / 4.0 || hi > t2 + eps / 4.0,
            None => true,
        };
        let (omega, correction) = if ramps_hit {
            cut_correction(&carried, &cutoff, support, &params.source)?
        } else {
            (None, None)
        };
        let correction_norm = omega.as_ref().map_or(0.0, |w| w.v_norm);
        let v = ExtendedTrajectory {
            carried,
            cutoff: cutoff.clone(),
            modal,
            omega,
            correction,
        };
        let achieved_error = region_distance(&v.modal, u.trajectory(), (support.0.min(t1), support.1.max(t2)), l)? + correction_norm;
        let grid = SpaceTimeGrid::new(horizon, lb, params.pv_samples.max(8), 4 * nb + 3)?;
        let pv = apply_p(&v.to_trajectory_field(grid.clone())?)?;
        let declared: Vec<SpectralField> = grid.t_nodes().iter().map(|&t| v.declared_source(t)).collect();
        let diff = match pv.residual.values() {
            crate::spectral::TrajectoryValues::Spectral(f) => f
                .iter()
                .zip(&declared)
                .map(|(p, d)| p.sub(d))
                .collect::<Result<Vec<_>>>()?,
            crate::spectral::TrajectoryValues::Nodal(_) => unreachable!("analytic residuals are spectral"),
        };
        let pv_residual = TrajectoryField::spectral(grid.clone(), diff)?.max_abs();
        let support_leak = grid
            .t_nodes()
            .iter()
            .filter(|&&t| t < support.0 || t > support.1)
            .map(|&t| v.state(t).norm())
            .fold(0.0, f64::max);
        let accepted = achieved_error < eps && pv_residual < PV_TOL && support_leak < SUPPORT_TOL;
        let res = ExtensionResult {
            v,
            achieved_error,
            pv_residual,
            support,
            support_leak,
            accepted,
            eps,
            order: nb,
            fits,
            truncation_error,
            correction_norm,
            regularized,
        };
        let better = best.as_ref().is_none_or(|b| res.achieved_error < b.achieved_error);
        if accepted {
            return Ok(res);
        }
        if better {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one order tried"))
}

/// Repeats [`extend_solution`] `rounds` times (at most 4), growing the
/// interval by 1 per round with budgets `eps/2, eps/4, …`.
pub fn extend_rounds(
    u: &CompactTrajectory,
    eps: f64,
    rounds: usize,
    params: &ExtensionParams,
) -> Result<Vec<ExtensionResult>> {
    if !(1..=4).contains(&rounds) {
        return Err(Error::Domain(format!("rounds must be in 1..=4, got {rounds}")));
    }
    let mut out: Vec<ExtensionResult> = Vec::with_capacity(rounds);
    let mut current = u.clone();
    let mut budget = eps / 2.0;
    for k in 0..rounds {
        let p = ExtensionParams {
            mollify: params.mollify && k == 0,
            ..params.clone()
        };
        let r = extend_solution(&current, budget, &p)?;
        if r.v.omega.is_some() {
            return Err(Error::Precondition(format!(
                "round {} needed a nonzero correction; the result is not a modal trajectory",
                k + 1
            )));
        }
        current = CompactTrajectory::new(r.v.modal.clone(), current.horizon(), r.support)?;
        out.push(r);
        budget /= 2.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_field(rng: &mut ChaCha20Rng, l: f64, n: usize) -> SpectralField {
        let c = (0..2 * n + 1)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpectralField::new(l, n, c).unwrap()
    }

    fn bump(lo: f64, hi: f64) -> TimeProfile {
        TimeProfile::ExpBump { lo, hi }
    }

    #[test]
    fn cross_gram_matches_quadrature() {
        let (x, w) = gauss_legendre(40);
        let (lb, ls, l) = (3.0, 2.0, 1.0);
        let g = cross_gram(5, lb, 4, ls, l);
        for k in -5i64..=5 {
            for m in -4i64..=4 {
                let q: Complex64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&s, &ws)| {
                        let xx = l * s;
                        let ek = Complex64::from_polar(1.0 / (2.0 * lb).sqrt(), wavenumber(k, lb) * xx);
                        let em = Complex64::from_polar(1.0 / (2.0 * ls).sqrt(), wavenumber(m, ls) * xx);
                        ek.conj() * em * (ws * l)
                    })
                    .sum();
                assert!((q - g[((k + 5) as usize, (m + 4) as usize)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn commensurate_mode_extends() {
        // e^{imπx/2} with m even is the mode n = 3m/2 of the interval of half-length 3.
        let f = SpectralField::basis(2.0, 4, 2).unwrap();
        let e = extend_field(&f, 3.0, 16, 1.0).unwrap();
        let xs: Vec<f64> = (0..41).map(|j| -1.0 + 0.05 * j as f64).collect();
        let (a, b) = (synthesize(&f, &xs), synthesize(&e.field, &xs));
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-6);
        }
    }

    #[test]
    fn generic_field_extension_is_accurate_on_the_inner_region() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f = random_field(&mut rng, 2.0, 4);
        let mut last = f64::INFINITY;
        for nb in [16, 32] {
            let e = extend_field(&f, 3.0, nb, 1.0).unwrap();
            let xs: Vec<f64> = (0..201).map(|j| -1.0 + 0.01 * j as f64).collect();
            let err = synthesize(&f, &xs)
                .iter()
                .zip(synthesize(&e.field, &xs))
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            last = err;
        }
        assert!(last < 1e-5, "{last}");
    }

    #[test]
    fn zero_input_extends_to_zero() {
        let u = CompactTrajectory::new(ModalTrajectory::zero(2.0, 4).unwrap(), 1.0, (0.3, 0.7)).unwrap();
        let r = extend_solution(&u, 1e-3, &ExtensionParams::default()).unwrap();
        assert_eq!(r.achieved_error, 0.0);
        assert!(r.pv_residual == 0.0 && r.accepted);
        assert!(r.v.omega.is_none());
    }

    #[test]
    fn windowed_orbit_extends() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let u0 = random_field(&mut rng, 2.0, 4);
        let u = CompactTrajectory::windowed_orbit(&u0, bump(0.3, 0.7), 1.0).unwrap();
        let r = extend_solution(&u, 1e-3, &ExtensionParams::default()).unwrap();
        assert!(r.accepted, "{:?}", r.summary());
        assert!(r.achieved_error < 1e-6, "{}", r.achieved_error);
        assert!(r.pv_residual < 1e-8);
        assert!(r.support.0 >= 0.3 - 1e-3 && r.support.1 <= 0.7 + 1e-3);
        assert_eq!(r.fit_errors_zero(), true);
        // Independent check of the inner mismatch at a few times on a fine x grid.
        let xs: Vec<f64> = (0..101).map(|j| -1.0 + 0.02 * j as f64).collect();
        for t in [0.35, 0.5, 0.62] {
            let a = synthesize(&u.trajectory().state(t), &xs);
            let b = synthesize(&r.v.state(t), &xs);
            let e = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(e < 1e-5, "t={t}: {e}");
        }
    }

    impl ExtensionResult {
        fn fit_errors_zero(&self) -> bool {
            self.fits.fit_errors() == [0.0, 0.0]
        }
    }

    #[test]
    fn acceptance_follows_the_attained_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let u0 = random_field(&mut rng, 2.0, 4);
        let u = CompactTrajectory::windowed_orbit(&u0, bump(0.3, 0.7), 1.0).unwrap();
        let params = ExtensionParams {
            big_orders: vec![4],
            ..Default::default()
        };
        let e0 = extend_solution(&u, 1e-4, &params).unwrap().achieved_error;
        assert!(e0 > 1e-6 && e0 < 2e-2, "{e0}");
        for eps in [10.0 * e0, e0 / 10.0] {
            let r = extend_solution(&u, eps, &params).unwrap();
            assert_eq!(r.accepted, r.achieved_error < eps && r.pv_residual < PV_TOL && r.support_leak < 1e-10);
            assert_eq!(r.accepted, eps > e0, "eps={eps}: {}", r.achieved_error);
        }
    }

    #[test]
    fn truncation_of_zero_and_random_inputs() {
        let z = CompactTrajectory::new(ModalTrajectory::zero(2.0, 3).unwrap(), 1.0, (0.3, 0.7)).unwrap();
        let t = smooth_truncate(&z, 0.05, 1e-6, None).unwrap();
        assert_eq!(t.error, 0.0);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let u0 = random_field(&mut rng, 2.0, 3);
        let u = CompactTrajectory::windowed_orbit(&u0, bump(0.3, 0.7), 1.0).unwrap();
        let t = smooth_truncate(&u, 0.05, 1e-4, None).unwrap();
        assert!(t.error < 1e-4);
        // Oracle: composite Simpson in time, trapezoid on the periodic x grid.
        let xs = periodic_nodes(2.0, 64);
        let m = 4000;
        let (a, b) = t.trajectory.support();
        let h = (b - a) / m as f64;
        let mut acc = 0.0;
        for j in 0..=m {
            let s = a + h * j as f64;
            let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            let d = t.trajectory.trajectory().state(s).sub(&u.trajectory().state(s)).unwrap();
            let vals = synthesize(&d, &xs);
            acc += w * h / 3.0 * vals.iter().map(|z| z.norm_sqr()).sum::<f64>() * (4.0 / 64.0);
        }
        assert!((acc.sqrt() - t.error).abs() < 1e-3 * t.error + 1e-12, "{} vs {}", acc.sqrt(), t.error);
        assert!(smooth_truncate(&u, 0.2, 1e-4, None).is_err());
    }

    #[test]
    fn spatial_cutoff_keeps_the_inner_region() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let u0 = random_field(&mut rng, 2.0, 3);
        let u0 = SpectralField::new(2.0, 24, {
            let mut c = vec![Complex64::new(0.0, 0.0); 49];
            for n in -3i64..=3 {
                c[(n + 24) as usize] = u0.coeff(n);
            }
            c
        })
        .unwrap();
        let u = CompactTrajectory::windowed_orbit(&u0, bump(0.3, 0.7), 1.0).unwrap();
        let t = smooth_truncate(&u, 0.05, 1e-3, Some((0.8, 1.6))).unwrap();
        assert!(t.error < 1e-3);
        let xs = [1.9, -1.95];
        let v = synthesize(&t.trajectory.trajectory().state(0.5), &xs);
        assert!(v.iter().all(|z| z.norm() < 1e-3));
    }

    #[test]
    fn orbit_of_the_big_interval_is_recovered() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let w0 = random_field(&mut rng, 3.0, 6);
        let u = ModalTrajectory::orbit(&w0, None).unwrap();
        let fits = match_semigroup_windows(&u, (0.4, 0.6), 1.0, 0.05, 3.0, 6, 1.0).unwrap();
        for f in [&fits.first, &fits.second] {
            let expect = evolve(&w0, f.window.0);
            assert!(f.v.sub(&expect).unwrap().norm() < 1e-6 * expect.norm(), "{}", f.v.sub(&expect).unwrap().norm());
            assert!(f.fit_error < 1e-8 * f.data_norm, "{} of {}", f.fit_error, f.data_norm);
            assert!(f.stability_ratio <= f.c_full * (1.0 + 1e-9));
        }
    }

    #[test]
    fn fit_errors_decrease_with_the_fitting_space() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let u0 = random_field(&mut rng, 2.0, 3);
        let u = ModalTrajectory::orbit(&u0, None).unwrap();
        let mut prev = [f64::INFINITY; 2];
        for nb in [8, 16, 32] {
            let fits = match_semigroup_windows(&u, (0.4, 0.6), 1.0, 5e-4, 3.0, nb, 1.0).unwrap();
            let e = fits.fit_errors();
            for k in 0..2 {
                assert!(e[k] <= prev[k] * (1.0 + 1e-6) + 1e-12, "{nb}: {e:?} after {prev:?}");
                assert!(fits.first.stability_ratio <= fits.first.c_full * (1.0 + 1e-9));
            }
            prev = e;
        }
    }

    #[test]
    fn cut_residual_correction_vanishes_outside_support() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let w0 = random_field(&mut rng, 3.0, 3);
        let carried = ModalTrajectory::orbit(&w0, None).unwrap();
        let cutoff = TimeProfile::Plateau { a: 0.2, b: 0.4, c: 0.6, d: 0.8 };
        let support = (0.2, 0.8);
        let (omega, g) = cut_correction(&carried, &cutoff, support, &SourceParams::default()).unwrap();
        let omega = omega.unwrap();
        assert!(omega.compatible);
        let v = ExtendedTrajectory {
            modal: carried.with_profile(Some(cutoff.clone())),
            carried,
            cutoff,
            omega: Some(omega),
            correction: g,
        };
        for t in [0.1, 0.19, 0.81, 0.95] {
            assert!(v.state(t).norm() < 1e-8, "t={t}: {}", v.state(t).norm());
        }
        let grid = SpaceTimeGrid::new(1.0, 3.0, 32, 31).unwrap();
        let pv = apply_p(&v.to_trajectory_field(grid.clone()).unwrap()).unwrap();
        let crate::spectral::TrajectoryValues::Spectral(f) = pv.residual.values() else { unreachable!() };
        let scale = w0.norm() * 10.0;
        for (k, &t) in grid.t_nodes().iter().enumerate() {
            let d = f[k].sub(&v.declared_source(t)).unwrap().norm();
            assert!(d < 1e-5 * scale, "t={t}: {d}");
        }
    }
}
