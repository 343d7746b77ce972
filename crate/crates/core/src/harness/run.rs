use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use super::config::{ExperimentConfig, Subcommand, Target};
use super::{RunOutput, RunRecord, Sweep, PERIODIC_SUBSTITUTION, VERSION};
use crate::approximation::{extend_rounds, CompactTrajectory, ExtensionParams};
use crate::carleman::{certify, positivity_check, AdmissibleFunction, SmoothField, WeightProfile};
use crate::control::{exactness_defects, synthesize_control, ControlProblem, ControlledTrajectory, SourceParams};
use crate::error::{Error, Result};
use crate::io::{csv_string, trajectory_csv};
use crate::observability::{ingham_constants, observability_constant, observability_gramian, spectral_gap};
use crate::profile::TimeProfile;
use crate::quadrature::Resolution;
use crate::rng::{from_seed, random_state, substream};
use crate::spectral::{eigenvalue, evolve, periodic_nodes, synthesize, SpaceTimeGrid, SpectralField};

struct Outcome {
    payload: serde_json::Value,
    sweep: Option<Sweep>,
    flags: BTreeMap<String, bool>,
    tables: Vec<(String, String)>,
    periodic: bool,
}

fn flags<const K: usize>(items: [(&str, bool); K]) -> BTreeMap<String, bool> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn gram_csv(m: &DMatrix<Complex64>) -> Result<String> {
    let rows = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j, m[(i, j)].re, m[(i, j)].im)));
    csv_string(&["i", "j", "re", "im"], rows)
}

fn samples_csv(f: impl Fn(f64) -> SpectralField, times: &[f64], xs: &[f64]) -> Result<String> {
    let mut rows = Vec::with_capacity(times.len() * xs.len());
    for &t in times {
        for (&x, z) in xs.iter().zip(synthesize(&f(t), xs)) {
            rows.push((t, x, z));
        }
    }
    trajectory_csv(&rows)
}

/// Dispatches one experiment. Identical configurations produce identical
/// records and tables.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let out = match cfg.subcommand {
        Subcommand::Spectrum => spectrum(cfg)?,
        Subcommand::Evolve => evolve_cmd(cfg)?,
        Subcommand::Carleman => carleman(cfg)?,
        Subcommand::Ingham => ingham(cfg)?,
        Subcommand::Observability => observability(cfg)?,
        Subcommand::Extend => extend(cfg)?,
        Subcommand::Control => control(cfg)?,
    };
    let accepted = out.flags.values().all(|&b| b);
    Ok(RunOutput {
        record: RunRecord {
            subcommand: cfg.subcommand,
            version: VERSION.to_string(),
            substitution: out.periodic.then(|| PERIODIC_SUBSTITUTION.to_string()),
            config: cfg.params.clone(),
            payload: out.payload,
            sweep: out.sweep,
            flags: out.flags,
            accepted,
            wall_time: start.elapsed(),
        },
        tables: out.tables,
    })
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")? as i64;
    let rows = (-n..=n).map(|k| Ok((k, eigenvalue(k, l)?))).collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        payload: json!({ "L": l, "N": n, "lambda": rows }),
        sweep: Some(Sweep {
            x_name: "n".into(),
            y_name: "lambda".into(),
            x: rows.iter().map(|r| r.0 as f64).collect(),
            y: rows.iter().map(|r| r.1).collect(),
        }),
        flags: flags([("finite", rows.iter().all(|r| r.1.is_finite()))]),
        tables: vec![("spectrum.csv".into(), csv_string(&["n", "lambda"], rows)?)],
        periodic: true,
    })
}

const EVOLVE_TIMES: usize = 20;

fn evolve_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")?;
    let horizon = cfg.f(&p.horizon, "T")?;
    let states = cfg.u(&p.samples, "samples")?;
    let mut rng = from_seed(cfg.seed());
    // Dyadic fractions of T so that s + t is exact.
    let times: Vec<f64> = (0..EVOLVE_TIMES).map(|k| horizon * k as f64 / 32.0).collect();
    let mut drift = 0.0f64;
    let mut group = 0.0f64;
    let mut first = None;
    for _ in 0..states {
        let u0 = random_state(&mut rng, l, n)?;
        for (i, &t) in times.iter().enumerate() {
            let ut = evolve(&u0, t);
            drift = drift.max((ut.norm() - 1.0).abs());
            let s = times[(i * 7 + 3) % EVOLVE_TIMES];
            let d = evolve(&ut, s).sub(&evolve(&u0, s + t))?.norm();
            group = group.max(d);
        }
        first.get_or_insert(u0);
    }
    let u0 = first.expect("at least one state");
    let xs = periodic_nodes(l, 64);
    let norms: Vec<f64> = times.iter().map(|&t| evolve(&u0, t).norm()).collect();
    Ok(Outcome {
        payload: json!({
            "unitarity_drift": drift,
            "group_defect": group,
            "states": states,
            "times": times,
            "u0": u0,
            "uT": evolve(&u0, horizon),
        }),
        sweep: Some(Sweep {
            x_name: "t".into(),
            y_name: "norm".into(),
            x: times.clone(),
            y: norms,
        }),
        flags: flags([("unitarity", drift < 1e-12), ("group_law", group < 1e-13)]),
        tables: vec![("evolve.csv".into(), samples_csv(|t| evolve(&u0, t), &times, &xs)?)],
        periodic: true,
    })
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

const POSITIVITY_NT: usize = 16;
const POSITIVITY_NX: usize = 17;

fn carleman(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let horizon = cfg.f(&p.horizon, "T")?;
    let size = cfg.u(&p.family, "family")?;
    let s_grid = geometric_grid(cfg.f(&p.s_min, "s_min")?, cfg.f(&p.s_max, "s_max")?, cfg.u(&p.s_count, "s_count")?);
    let w = WeightProfile::default_for(l, horizon)?;
    let mut rng = from_seed(cfg.seed());
    let family = (0..size)
        .map(|_| AdmissibleFunction::random(&mut rng, l, horizon, 3))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn SmoothField> = family.iter().map(|f| f as &dyn SmoothField).collect();
    let report = certify(&refs, &w, &s_grid, cfg.resolution())?;
    let tail: Vec<f64> = s_grid.iter().copied().filter(|&s| s >= report.s0_hat).collect();
    let grid = SpaceTimeGrid::new(horizon, l, POSITIVITY_NT, POSITIVITY_NX)?;
    let positivity = positivity_check(&w, &tail, &grid)?;
    let rows: Vec<(f64, f64, f64, f64)> = (0..s_grid.len())
        .map(|j| (s_grid[j], report.lhs[j], report.rhs[j], report.ratios[j]))
        .collect();
    Ok(Outcome {
        payload: json!({ "report": report, "positivity": positivity, "psi": w.psi().coeffs() }),
        sweep: Some(Sweep {
            x_name: "s".into(),
            y_name: "ratio".into(),
            x: s_grid.clone(),
            y: report.ratios.clone(),
        }),
        flags: flags([("certified", report.certified), ("positivity", positivity.all_positive())]),
        tables: vec![("carleman.csv".into(), csv_string(&["s", "lhs", "rhs", "ratio"], rows)?)],
        periodic: false,
    })
}

fn ingham(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")?;
    let interval = (cfg.f(&p.a, "a")?, cfg.f(&p.b, "b")?);
    let freqs = spectral_gap(n, l, cfg.u(&p.n0, "n0")?)?;
    let b = ingham_constants(interval, &freqs)?;
    Ok(Outcome {
        payload: json!({
            "A": b.a,
            "B": b.b,
            "hypothesis_met": b.hypothesis_met,
            "valid": b.valid,
            "frequencies": freqs,
            "eigenvalues": b.gram.eigenvalues,
        }),
        sweep: None,
        flags: flags([("positive_lower_bound", b.a > 0.0 && b.valid)]),
        tables: vec![("ingham_gram.csv".into(), gram_csv(&b.gram.matrix)?)],
        periodic: true,
    })
}

fn observability(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l_big = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")?;
    let l = cfg.f(&p.l, "l")?;
    let horizon = cfg.f(&p.horizon, "T")?;
    let gram = observability_gramian(n, l_big, l, horizon)?;
    let report = match observability_constant(n, l_big, l, horizon) {
        Ok(r) => Some(r),
        Err(Error::NonObservable { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut sweep: Vec<f64> = p.l_sweep.clone().unwrap_or_default();
    sweep.sort_by(|a, b| a.total_cmp(b));
    let eigs = sweep
        .iter()
        .map(|&s| Ok(observability_gramian(n, l_big, s, horizon)?.eig_min()))
        .collect::<Result<Vec<_>>>()?;
    let monotone = eigs.windows(2).all(|w| w[1] >= w[0]);
    Ok(Outcome {
        payload: json!({ "report": report, "eig_min": gram.eig_min(), "eig_max": gram.eig_max(), "l_sweep": sweep, "sweep_eig_min": eigs }),
        sweep: Some(Sweep {
            x_name: "l".into(),
            y_name: "eig_min".into(),
            x: sweep.clone(),
            y: eigs,
        }),
        flags: flags([("observable", report.is_some()), ("monotone_in_l", monotone)]),
        tables: vec![("observability_gram.csv".into(), gram_csv(&gram.matrix)?)],
        periodic: true,
    })
}

fn source_params(res: Resolution) -> SourceParams {
    SourceParams {
        intervals: match res {
            Resolution::Low => 128,
            Resolution::Default => 256,
            Resolution::High => 512,
        },
        ..SourceParams::default()
    }
}

fn extend(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")?;
    let horizon = cfg.f(&p.horizon, "T")?;
    let (t1, t2) = (cfg.f(&p.t1, "t1")?, cfg.f(&p.t2, "t2")?);
    let eps = cfg.f(&p.eps, "eps")?;
    let samples = cfg.u(&p.samples, "samples")?;
    let rounds = cfg.u(&p.rounds, "rounds")?;
    let params = ExtensionParams {
        source: source_params(cfg.resolution()),
        ..Default::default()
    };
    let mut summaries = Vec::new();
    let mut details = Vec::new();
    let mut dump = None;
    for k in 0..samples {
        let u0 = random_state(&mut substream(cfg.seed(), k as u64), l, n)?;
        let u = CompactTrajectory::windowed_orbit(&u0, TimeProfile::ExpBump { lo: t1, hi: t2 }, horizon)?;
        let res = extend_rounds(&u, eps, rounds, &params)?;
        let last = res.last().expect("at least one round");
        summaries.push(last.summary());
        details.push(json!({
            "rounds": res.iter().map(|r| json!({
                "summary": r.summary(),
                "eps": r.eps,
                "order": r.order,
                "truncation_error": r.truncation_error,
                "fit_errors": r.fits.fit_errors(),
                "correction_norm": r.correction_norm,
                "regularized": r.regularized,
                "support_leak": r.support_leak,
            })).collect::<Vec<_>>(),
        }));
        if dump.is_none() {
            let v = &res[0].v;
            let xs: Vec<f64> = (0..=32).map(|j| -(l + 1.0) + 2.0 * (l + 1.0) * j as f64 / 32.0).collect();
            let times: Vec<f64> = (0..=8).map(|j| t1 - eps + (t2 - t1 + 2.0 * eps) * j as f64 / 8.0).collect();
            dump = Some(samples_csv(|t| v.state(t), &times, &xs)?);
        }
    }
    let all = summaries.iter().all(|s| s.accepted);
    Ok(Outcome {
        payload: json!({ "results": summaries, "details": details, "inner_region": [-(l - 1.0), l - 1.0], "big_interval": [-(l + 1.0), l + 1.0] }),
        sweep: Some(Sweep {
            x_name: "sample".into(),
            y_name: "achieved_error".into(),
            x: (0..samples).map(|k| k as f64).collect(),
            y: summaries.iter().map(|s| s.achieved_error).collect(),
        }),
        flags: flags([("accepted", all)]),
        tables: vec![("extend_trajectory.csv".into(), dump.unwrap_or_default())],
        periodic: true,
    })
}

fn control(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let l = cfg.f(&p.half_length, "L")?;
    let n = cfg.u(&p.order, "N")?;
    let horizon = cfg.f(&p.horizon, "T")?;
    let eps = cfg.f(&p.eps, "eps")?;
    let (u0, ut) = match p.target.unwrap_or(Target::Random) {
        Target::Random => (
            random_state(&mut substream(cfg.seed(), 0), l, n)?,
            random_state(&mut substream(cfg.seed(), 1), l, n)?,
        ),
        Target::Free => {
            let u0 = random_state(&mut substream(cfg.seed(), 0), l, n)?;
            let ut = evolve(&u0, horizon);
            (u0, ut)
        }
        Target::Basis => (SpectralField::basis(l, n, 1)?, SpectralField::basis(l, n, 2)?),
    };
    let prob = ControlProblem::new(u0, ut, horizon, eps, p.eps_prime)?;
    let sol = synthesize_control(&prob, &source_params(cfg.resolution()))?;
    let (d0, dt) = exactness_defects(&sol, &prob, 50);
    let ts: Vec<f64> = (0..=100).map(|k| horizon * k as f64 / 100.0).collect();
    let dev: Vec<f64> = ts
        .iter()
        .map(|&t| sol.state(t).sub(&evolve(&prob.u0, t)).map(|d| d.norm()))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = (0..=32).map(|j| -l + 2.0 * l * j as f64 / 32.0).collect();
    let coarse: Vec<f64> = (0..=10).map(|k| horizon * k as f64 / 10.0).collect();
    Ok(Outcome {
        payload: json!({
            "solution": sol.summary(),
            "eps_prime": prob.eps_prime,
            "exactness_defects": [d0, dt],
            "control_norm": sol.control_norm,
            "compatibility_defect": sol.omega.compatibility_defect,
            "omega_residual": sol.omega.residual,
            "correction_norm": sol.correction.amplitude.norm(),
        }),
        sweep: Some(Sweep {
            x_name: "t".into(),
            y_name: "deviation_from_free_orbit".into(),
            x: ts,
            y: dev,
        }),
        flags: flags([
            ("accepted", sol.accepted),
            ("exactness_windows", d0 < 1e-10 && dt < 1e-10),
        ]),
        tables: vec![
            ("control_trajectory.csv".into(), samples_csv(|t| sol.state(t), &coarse, &xs)?),
            ("control_source.csv".into(), samples_csv(|t| sol.source(t), &coarse, &xs)?),
        ],
        periodic: true,
    })
}
