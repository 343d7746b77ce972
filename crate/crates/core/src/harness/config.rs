use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Resolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Spectrum,
    Evolve,
    Carleman,
    Ingham,
    Observability,
    Extend,
    Control,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Evolve => "evolve",
            Subcommand::Carleman => "carleman",
            Subcommand::Ingham => "ingham",
            Subcommand::Observability => "observability",
            Subcommand::Extend => "extend",
            Subcommand::Control => "control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Independent random target state.
    Random,
    /// `uT = S(T)u0`.
    Free,
    /// `e1 → e2`.
    Basis,
}

/// Flat numeric parameters. Every field is optional so that a config file
/// and command-line flags can be layered over the per-subcommand defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
    /// Half-length of the periodic interval.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Fourier truncation order.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Observation half-width.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_sweep: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long = "eps-prime")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_prime: Option<f64>,
    /// Ingham interval start.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Ingham interval end.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Tail threshold for the asymptotic gap.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    #[arg(long = "s-min")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
    #[arg(long = "s-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[arg(long = "s-count")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_count: Option<usize>,
    /// Size of the random test-function family.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<usize>,
    /// Number of random samples (states, inputs).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Params { $($f: $top.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl Params {
    /// Fields set in `top` win.
    pub fn overlay(&self, top: &Params) -> Params {
        overlay!(
            self, top, seed, resolution, half_length, horizon, order, l, l_sweep, t1, t2, eps,
            eps_prime, a, b, n0, s_min, s_max, s_count, family, samples, rounds, target
        )
    }

    pub fn from_file(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }

    pub fn defaults(sub: Subcommand) -> Params {
        let base = Params {
            seed: Some(0),
            resolution: Some(Resolution::Default),
            ..Default::default()
        };
        let specific = match sub {
            Subcommand::Spectrum => Params {
                half_length: Some(PI),
                order: Some(8),
                ..Default::default()
            },
            Subcommand::Evolve => Params {
                half_length: Some(PI),
                order: Some(64),
                horizon: Some(2.0),
                samples: Some(100),
                ..Default::default()
            },
            Subcommand::Carleman => Params {
                half_length: Some(1.0),
                horizon: Some(2.0),
                family: Some(20),
                s_min: Some(1.0),
                s_max: Some(64.0),
                s_count: Some(13),
                ..Default::default()
            },
            Subcommand::Ingham => Params {
                half_length: Some(PI),
                order: Some(8),
                a: Some(0.0),
                b: Some(2.0 * PI),
                n0: Some(2),
                ..Default::default()
            },
            Subcommand::Observability => Params {
                half_length: Some(1.0),
                order: Some(32),
                l: Some(0.5),
                horizon: Some(1.0),
                l_sweep: Some(vec![0.25, 0.5, 0.75]),
                ..Default::default()
            },
            Subcommand::Extend => Params {
                half_length: Some(2.0),
                order: Some(4),
                horizon: Some(1.0),
                t1: Some(0.3),
                t2: Some(0.7),
                eps: Some(1e-3),
                samples: Some(5),
                rounds: Some(1),
                ..Default::default()
            },
            Subcommand::Control => Params {
                half_length: Some(PI),
                order: Some(32),
                horizon: Some(1.0),
                eps: Some(0.2),
                target: Some(Target::Random),
                ..Default::default()
            },
        };
        base.overlay(&specific)
    }
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub params: Params,
    pub out: PathBuf,
    pub json: bool,
    pub csv: bool,
}

fn bad(msg: String) -> Error {
    Error::Config(msg)
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| bad(format!("missing parameter {name}")))
}

impl ExperimentConfig {
    /// Layers defaults < file < command line and validates the result.
    pub fn resolve(
        subcommand: Subcommand,
        file: Option<&Path>,
        cli: &Params,
        out: PathBuf,
        json: bool,
        csv: bool,
    ) -> Result<Self> {
        let mut p = Params::defaults(subcommand);
        if let Some(f) = file {
            p = p.overlay(&Params::from_file(f)?);
        }
        p = p.overlay(cli);
        let cfg = Self {
            subcommand,
            params: p,
            out,
            json,
            csv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.params.seed.unwrap_or(0)
    }

    pub fn resolution(&self) -> Resolution {
        self.params.resolution.unwrap_or(Resolution::Default)
    }

    pub fn f(&self, v: &Option<f64>, name: &str) -> Result<f64> {
        need(v, name)
    }

    pub fn u(&self, v: &Option<usize>, name: &str) -> Result<usize> {
        need(v, name)
    }

    /// Checks every geometric constraint of the target module.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let positive = |v: &Option<f64>, name: &str| -> Result<f64> {
            let x = need(v, name)?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(bad(format!("{name} must be positive and finite, got {x}")));
            }
            Ok(x)
        };
        let at_least = |v: &Option<usize>, name: &str, min: usize| -> Result<usize> {
            let x = need(v, name)?;
            if x < min {
                return Err(bad(format!("{name} must be at least {min}, got {x}")));
            }
            Ok(x)
        };
        let l_big = positive(&p.half_length, "L")?;
        match self.subcommand {
            Subcommand::Spectrum => {
                at_least(&p.order, "N", 1)?;
            }
            Subcommand::Evolve => {
                at_least(&p.order, "N", 1)?;
                positive(&p.horizon, "T")?;
                at_least(&p.samples, "samples", 1)?;
            }
            Subcommand::Carleman => {
                positive(&p.horizon, "T")?;
                at_least(&p.family, "family", 1)?;
                let lo = positive(&p.s_min, "s_min")?;
                let hi = positive(&p.s_max, "s_max")?;
                let n = at_least(&p.s_count, "s_count", 1)?;
                if n > 1 && hi <= lo {
                    return Err(bad(format!("s_max = {hi} must exceed s_min = {lo}")));
                }
            }
            Subcommand::Ingham => {
                at_least(&p.order, "N", 1)?;
                let a = need(&p.a, "a")?;
                let b = need(&p.b, "b")?;
                if !(b > a) {
                    return Err(bad(format!("interval ({a}, {b}) must have b > a")));
                }
                let n0 = need(&p.n0, "n0")?;
                if n0 > need(&p.order, "N")? {
                    return Err(bad(format!("n0 = {n0} must not exceed N")));
                }
            }
            Subcommand::Observability => {
                at_least(&p.order, "N", 1)?;
                positive(&p.horizon, "T")?;
                let l = positive(&p.l, "l")?;
                if l >= l_big {
                    return Err(bad(format!("observation half-width l = {l} must be below L = {l_big}")));
                }
                for &s in p.l_sweep.as_deref().unwrap_or(&[]) {
                    if !(s > 0.0 && s < l_big) {
                        return Err(bad(format!("l_sweep value {s} must lie in (0, L = {l_big})")));
                    }
                }
            }
            Subcommand::Extend => {
                at_least(&p.order, "N", 1)?;
                if l_big <= 1.0 {
                    return Err(bad(format!("L = {l_big} must exceed 1 so the inner region (−L+1, L−1) is nonempty")));
                }
                let t = positive(&p.horizon, "T")?;
                let t1 = need(&p.t1, "t1")?;
                let t2 = need(&p.t2, "t2")?;
                if !(0.0 < t1 && t1 < t2 && t2 < t) {
                    return Err(bad(format!("support must satisfy 0 < t1 < t2 < T, got t1 = {t1}, t2 = {t2}, T = {t}")));
                }
                let eps = positive(&p.eps, "eps")?;
                if eps >= t1.min(t - t2) {
                    return Err(bad(format!("eps = {eps} must be below min(t1, T − t2) = {}", t1.min(t - t2))));
                }
                at_least(&p.samples, "samples", 1)?;
                let r = at_least(&p.rounds, "rounds", 1)?;
                if r > 4 {
                    return Err(bad(format!("rounds = {r} exceeds the cap of 4")));
                }
            }
            Subcommand::Control => {
                at_least(&p.order, "N", 1)?;
                let t = positive(&p.horizon, "T")?;
                let eps = positive(&p.eps, "eps")?;
                if eps >= t / 2.0 {
                    return Err(bad(format!("eps = {eps} must be below T/2 = {}", t / 2.0)));
                }
                if let Some(e2) = p.eps_prime {
                    if !(e2 > eps && e2 < t / 2.0) {
                        return Err(bad(format!("eps_prime = {e2} must lie in (eps, T/2) = ({eps}, {})", t / 2.0)));
                    }
                }
                need(&p.target, "target")?;
                if need(&p.target, "target")? == Target::Basis && need(&p.order, "N")? < 2 {
                    return Err(bad("target basis needs N ≥ 2".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_cli_over_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.json");
        std::fs::write(&f, r#"{"N": 5, "L": 2.0}"#).unwrap();
        let cli = Params {
            order: Some(7),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(Subcommand::Spectrum, Some(&f), &cli, "o".into(), false, false).unwrap();
        assert_eq!(c.params.order, Some(7));
        assert_eq!(c.params.half_length, Some(2.0));
        assert_eq!(c.seed(), 0);
    }

    #[test]
    fn violations_are_named() {
        let cli = Params {
            eps: Some(0.6),
            ..Default::default()
        };
        let e = ExperimentConfig::resolve(Subcommand::Control, None, &cli, "o".into(), false, false).unwrap_err();
        assert!(e.to_string().contains("eps"), "{e}");
        let cli = Params {
            l: Some(2.0),
            ..Default::default()
        };
        let e = ExperimentConfig::resolve(Subcommand::Observability, None, &cli, "o".into(), false, false).unwrap_err();
        assert!(e.to_string().contains("l = 2"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.json");
        std::fs::write(&f, r#"{"NN": 5}"#).unwrap();
        assert!(ExperimentConfig::resolve(Subcommand::Spectrum, Some(&f), &Params::default(), "o".into(), false, false).is_err());
    }
}
