/// Finite-difference weights for the `m`-th derivative at `z` from nodes `x`
/// (Fornberg's recursion).
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_sixth_order_first_derivative() {
        let x: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
        let w = fornberg_weights(0.0, &x, 1);
        let expected = [-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_stencil_differentiates_polynomials() {
        let x: Vec<f64> = (0..7).map(|k| 0.1 * k as f64).collect();
        let w = fornberg_weights(0.0, &x, 1);
        let d: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!(d.abs() < 1e-10);
        let d: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 + 2.0 * x)).sum();
        assert!((d - 2.0).abs() < 1e-10);
    }
}
