use serde::{Deserialize, Serialize};

use super::coefficients::combined_coefficients;
use super::space_time_rules;
use super::testfn::{check_admissible, SmoothField};
use super::weight::WeightProfile;
use crate::error::{Error, Result};
use crate::quadrature::Resolution;
use crate::spectral::SpaceTimeGrid;

const MONOTONE_SLACK: f64 = 1.05;

/// Quadrature samples of `q`, its x-derivatives, `Pq` and `φ`, reusable
/// across values of `s`.
pub struct SidesSampler {
    weights: Vec<f64>,
    phi: Vec<f64>,
    derivs: Vec<[f64; 5]>,
    pq: Vec<f64>,
}

impl SidesSampler {
    pub fn new(q: &dyn SmoothField, w: &WeightProfile, res: Resolution) -> Result<Self> {
        check_admissible(q, w.half_length(), w.horizon())?;
        let (t_rule, x_rule) = space_time_rules(q, res);
        let n = t_rule.len() * x_rule.len();
        let mut out = Self {
            weights: Vec::with_capacity(n),
            phi: Vec::with_capacity(n),
            derivs: Vec::with_capacity(n),
            pq: Vec::with_capacity(n),
        };
        for (&t, &wt) in t_rule.nodes.iter().zip(&t_rule.weights) {
            for (&x, &wx) in x_rule.nodes.iter().zip(&x_rule.weights) {
                let v = q.eval(t, x);
                out.weights.push(wt * wx);
                out.phi.push(w.phi(t, x)?);
                out.derivs.push([v.dx[0], v.dx[1], v.dx[2], v.dx[3], v.dx[4]]);
                out.pq.push(v.p());
            }
        }
        Ok(out)
    }

    /// `(lhs, rhs)` at parameter `s`.
    pub fn sides(&self, s: f64) -> (f64, f64) {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..self.weights.len() {
            let sp = s * self.phi[i];
            let e = (-2.0 * sp).exp() * self.weights[i];
            let d = &self.derivs[i];
            let sp2 = sp * sp;
            let mut acc = sp * d[4] * d[4];
            let mut pw = sp;
            for j in (0..4).rev() {
                pw *= sp2;
                acc += pw * d[j] * d[j];
            }
            lhs += e * acc;
            rhs += e * self.pq[i] * self.pq[i];
        }
        (lhs, rhs)
    }
}

/// `lhs = ∫∫ Σ_j (sφ)^{9−2j} |∂x^j q|² e^{−2sφ}`, `rhs = ∫∫ |Pq|² e^{−2sφ}`.
pub fn carleman_sides(q: &dyn SmoothField, w: &WeightProfile, s: f64, res: Resolution) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("Carleman parameter must be positive, got {s}")));
    }
    Ok(SidesSampler::new(q, w, res)?.sides(s))
}

/// Result of an `s`-sweep over a test family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    #[serde(rename = "s")]
    pub s_values: Vec<f64>,
    /// Sides of the member attaining the largest ratio at each `s`.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Largest ratio over the family at each `s`.
    #[serde(rename = "ratio")]
    pub ratios: Vec<f64>,
    pub s0_hat: f64,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub family_size: usize,
    /// `ratio[i][j]` for member `i` at `s_j`.
    pub member_ratios: Vec<Vec<f64>>,
    /// False when the ratios diverge or never settle.
    pub certified: bool,
}

/// Sweeps `s_grid` over `family` and certifies `(s0_hat, C_hat)`: `s0_hat`
/// is the smallest grid value after which the max-over-family ratio never
/// grows by more than 5% from one grid point to the next, and `C_hat` the
/// largest ratio from there on.
pub fn certify(
    family: &[&dyn SmoothField],
    w: &WeightProfile,
    s_grid: &[f64],
    res: Resolution,
) -> Result<CarlemanReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if s_grid.is_empty() || s_grid.windows(2).any(|p| p[0] >= p[1]) || s_grid[0] <= 0.0 {
        return Err(Error::Domain("s grid must be positive and strictly increasing".into()));
    }
    let mut member_sides = Vec::with_capacity(family.len());
    for (index, q) in family.iter().enumerate() {
        let sampler = SidesSampler::new(*q, w, res)?;
        let sides: Vec<(f64, f64)> = s_grid.iter().map(|&s| sampler.sides(s)).collect();
        if sides.iter().all(|&(_, r)| r == 0.0) {
            return Err(Error::DegenerateMember { index });
        }
        member_sides.push(sides);
    }
    let member_ratios: Vec<Vec<f64>> = member_sides
        .iter()
        .map(|m| {
            m.iter()
                .map(|&(l, r)| if r > 0.0 { l / r } else if l == 0.0 { 0.0 } else { f64::INFINITY })
                .collect()
        })
        .collect();
    let ns = s_grid.len();
    let mut ratios = vec![f64::NEG_INFINITY; ns];
    let mut lhs = vec![0.0; ns];
    let mut rhs = vec![0.0; ns];
    for (i, m) in member_ratios.iter().enumerate() {
        for j in 0..ns {
            if m[j] > ratios[j] || (m[j].is_nan() && !ratios[j].is_nan()) {
                ratios[j] = m[j];
                lhs[j] = member_sides[i][j].0;
                rhs[j] = member_sides[i][j].1;
            }
        }
    }
    let finite = ratios.iter().all(|r| r.is_finite());
    let mut start = ns - 1;
    while start > 0 && ratios[start] <= MONOTONE_SLACK * ratios[start - 1] {
        start -= 1;
    }
    let c_hat = ratios[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let certified = finite && (ns == 1 || start < ns - 1);
    Ok(CarlemanReport {
        s_values: s_grid.to_vec(),
        lhs,
        rhs,
        ratios,
        s0_hat: s_grid[start],
        c_hat,
        family_size: family.len(),
        member_ratios,
        certified,
    })
}

/// Signs of `M, N, O, R, S` over the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub s_values: Vec<f64>,
    /// Smallest value of each coefficient over all nodes and all `s`.
    pub min_m: f64,
    pub min_n: f64,
    pub min_o: f64,
    pub min_r: f64,
    pub min_s: f64,
    /// Number of (node, s) pairs where each coefficient is not positive.
    pub nonpositive: [usize; 5],
    pub nodes: usize,
}

impl PositivityReport {
    pub fn all_positive(&self) -> bool {
        self.nonpositive.iter().all(|&c| c == 0)
    }
}

/// Evaluates `M, …, S` at every node of `grid` with `|x| < L` for each `s`.
pub fn positivity_check(w: &WeightProfile, s_values: &[f64], grid: &SpaceTimeGrid) -> Result<PositivityReport> {
    let mut rep = PositivityReport {
        s_values: s_values.to_vec(),
        min_m: f64::INFINITY,
        min_n: f64::INFINITY,
        min_o: f64::INFINITY,
        min_r: f64::INFINITY,
        min_s: f64::INFINITY,
        nonpositive: [0; 5],
        nodes: 0,
    };
    let interior: Vec<f64> = grid
        .x_nodes()
        .iter()
        .copied()
        .filter(|x| x.abs() < w.half_length())
        .collect();
    for &s in s_values {
        for &t in grid.t_nodes() {
            for &x in &interior {
                let c = combined_coefficients(w, t, x, s)?;
                let vals = [c.m, c.n, c.o, c.r, c.s];
                for (k, v) in vals.iter().enumerate() {
                    if !(*v > 0.0) {
                        rep.nonpositive[k] += 1;
                    }
                }
                rep.min_m = rep.min_m.min(c.m);
                rep.min_n = rep.min_n.min(c.n);
                rep.min_o = rep.min_o.min(c.o);
                rep.min_r = rep.min_r.min(c.r);
                rep.min_s = rep.min_s.min(c.s);
                rep.nodes += 1;
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::testfn::{AdmissibleFunction, ZeroField};

    #[test]
    fn zero_and_scaling() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let z = ZeroField { half_length: 1.0, horizon: 2.0 };
        assert_eq!(carleman_sides(&z, &w, 3.0, Resolution::Low).unwrap(), (0.0, 0.0));
        let u = AdmissibleFunction::single_bump(1.0, 2.0).unwrap();
        let two = crate::carleman::testfn::Scaled { inner: &u, factor: 2.0 };
        let (a, b) = carleman_sides(&u, &w, 3.0, Resolution::Low).unwrap();
        let (c, d) = carleman_sides(&two, &w, 3.0, Resolution::Low).unwrap();
        assert!((c - 4.0 * a).abs() <= 1e-14 * c.abs());
        assert!((d - 4.0 * b).abs() <= 1e-14 * d.abs());
    }

    #[test]
    fn empty_and_degenerate_families() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        assert!(matches!(certify(&[], &w, &[1.0], Resolution::Low), Err(Error::EmptyFamily)));
        let z = ZeroField { half_length: 1.0, horizon: 2.0 };
        assert!(matches!(
            certify(&[&z], &w, &[1.0, 2.0], Resolution::Low),
            Err(Error::DegenerateMember { index: 0 })
        ));
    }

    #[test]
    fn single_bump_sweep() {
        let w = WeightProfile::default_for(1.0, 2.0).unwrap();
        let u = AdmissibleFunction::single_bump(1.0, 2.0).unwrap();
        let grid: Vec<f64> = (0..7).map(|k| 2f64.powi(k)).collect();
        let r = certify(&[&u], &w, &grid, Resolution::Default).unwrap();
        assert!(r.c_hat.is_finite() && r.c_hat > 0.0);
        assert_eq!(r.ratios.len(), 7);
    }
}
