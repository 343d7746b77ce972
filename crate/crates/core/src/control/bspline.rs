//! Clamped uniform B-spline bases on an interval.

/// Degree-`p` B-splines on `[a, b]` with `m` equal knot intervals and
/// `p + 1`-fold end knots; `m + p` functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    a: f64,
    b: f64,
    intervals: usize,
    degree: usize,
    knots: Vec<f64>,
}

impl BSplineBasis {
    pub fn new(a: f64, b: f64, intervals: usize, degree: usize) -> Self {
        assert!(b > a && intervals >= 1 && degree >= 1);
        let h = (b - a) / intervals as f64;
        let mut knots = vec![a; degree + 1];
        knots.extend((1..intervals).map(|k| a + k as f64 * h));
        knots.extend(std::iter::repeat_n(b, degree + 1));
        Self {
            a,
            b,
            intervals,
            degree,
            knots,
        }
    }

    pub fn len(&self) -> usize {
        self.intervals + self.degree
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Knot interval `[t_k, t_{k+1}]`.
    pub fn knot_interval(&self, k: usize) -> (f64, f64) {
        let p = self.degree;
        (self.knots[p + k], self.knots[p + k + 1])
    }

    fn span(&self, t: f64) -> usize {
        let h = (self.b - self.a) / self.intervals as f64;
        let k = ((t - self.a) / h).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(self.intervals - 1) };
        k + self.degree
    }

    /// Index of the first nonzero function at `t` and the values of the
    /// `p + 1` nonzero functions and their derivatives up to `nders`
    /// (`out[d][j]` is the `d`-th derivative of function `first + j`).
    pub fn eval(&self, t: f64, nders: usize) -> (usize, Vec<Vec<f64>>) {
        let p = self.degree;
        let span = self.span(t);
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let nd = nders.min(p);
        let mut ders = vec![vec![0.0; p + 1]; nders + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nd {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        (span - p, ders)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_clamping() {
        let b = BSplineBasis::new(0.3, 1.7, 10, 7);
        assert_eq!(b.len(), 17);
        for k in 0..=50 {
            let t = 0.3 + 1.4 * k as f64 / 50.0;
            let (_, d) = b.eval(t, 2);
            assert!((d[0].iter().sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(d[1].iter().sum::<f64>().abs() < 1e-9);
            assert!(d[2].iter().sum::<f64>().abs() < 1e-6);
        }
        let (first, d) = b.eval(0.3, 0);
        assert_eq!(first, 0);
        assert!((d[0][0] - 1.0).abs() < 1e-15);
        let (first, d) = b.eval(1.7, 0);
        assert_eq!(first + 7, b.len() - 1);
        assert!((d[0][7] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = BSplineBasis::new(0.0, 1.0, 6, 5);
        let t = 0.437;
        let h = 1e-6;
        let (f0, d) = b.eval(t, 2);
        let (f1, p) = b.eval(t + h, 0);
        let (f2, m) = b.eval(t - h, 0);
        assert_eq!((f0, f0), (f1, f2));
        for j in 0..=5 {
            let fd = (p[0][j] - m[0][j]) / (2.0 * h);
            assert!((fd - d[1][j]).abs() < 1e-6);
        }
    }

    #[test]
    fn reproduces_polynomials() {
        // Greville abscissae reproduce the identity: Σ ξ_i B_i(t) = t.
        let p = 3;
        let b = BSplineBasis::new(0.0, 2.0, 5, p);
        let knots = &b.knots;
        let xi: Vec<f64> = (0..b.len())
            .map(|i| knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect();
        for t in [0.0, 0.33, 1.2, 2.0] {
            let (f, d) = b.eval(t, 1);
            let v: f64 = (0..=p).map(|j| xi[f + j] * d[0][j]).sum();
            let dv: f64 = (0..=p).map(|j| xi[f + j] * d[1][j]).sum();
            assert!((v - t).abs() < 1e-13 && (dv - 1.0).abs() < 1e-12);
        }
    }
}
