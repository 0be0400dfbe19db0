//! Finite-difference weights (Fornberg's recursion).

/// Weights `w[m][j]` such that `f^{(m)}(x0) ~ sum_j w[m][j] f(xs[j])`
/// for derivative orders `m = 0..=max_order`.
pub fn weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Symmetric stencil `x0 + k h`, k = -half..=half.
pub fn central_stencil(half: usize, h: f64) -> Vec<f64> {
    (-(half as i64)..=half as i64).map(|k| k as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let w = weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn high_order_derivatives_of_exponential() {
        let xs = central_stencil(4, 0.05);
        let w = weights(0.0, &xs, 4);
        for (m, wm) in w.iter().enumerate().take(5) {
            let d: f64 = xs.iter().zip(wm).map(|(x, c)| c * x.exp()).sum();
            assert!((d - 1.0).abs() < 1e-7, "order {m}: {d}");
        }
    }
}
