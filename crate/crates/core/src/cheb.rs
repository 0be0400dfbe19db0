//! Chebyshev interpolants on an interval, with spectral differentiation and
//! integration. Used to store smooth functions of the beam parameter `t`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

pub trait ChebValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl ChebValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl ChebValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Chebyshev-Lobatto nodes `c + h cos(pi k / n)`, k = 0..=n (descending).
pub fn lobatto_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..=n)
        .map(|k| {
            if k == 0 {
                b
            } else if k == n {
                a
            } else {
                c + h * (PI * k as f64 / n as f64).cos()
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Chebyshev<T: ChebValue> {
    a: f64,
    b: f64,
    coeffs: Vec<T>,
}

impl<T: ChebValue> Chebyshev<T> {
    /// Interpolant through values sampled at `lobatto_nodes(n, a, b)`.
    pub fn from_values(a: f64, b: f64, values: &[T]) -> Self {
        let n = values.len() - 1;
        assert!(n >= 1, "need at least two samples");
        let two_n = 2 * n;
        let cos_table: Vec<f64> = (0..two_n).map(|m| (PI * m as f64 / n as f64).cos()).collect();
        let mut coeffs = vec![T::default(); n + 1];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = T::default();
            for (k, &v) in values.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                acc = acc + v * (w * cos_table[(j * k) % two_n]);
            }
            let scale = if j == 0 || j == n { 1.0 / n as f64 } else { 2.0 / n as f64 };
            *c = acc * scale;
        }
        Chebyshev { a, b, coeffs }
    }

    pub fn from_coeffs(a: f64, b: f64, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "need at least one coefficient");
        Chebyshev { a, b, coeffs }
    }

    pub fn sample<F: Fn(f64) -> T>(a: f64, b: f64, n: usize, f: F) -> Self {
        let vals: Vec<T> = lobatto_nodes(n, a, b).into_iter().map(f).collect();
        Self::from_values(a, b, &vals)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Clenshaw evaluation. Arguments outside the interval are extrapolated.
    pub fn eval(&self, t: f64) -> T {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let mut b1 = T::default();
        let mut b2 = T::default();
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = *c + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * x - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        let scale = 2.0 / (self.b - self.a);
        if n == 0 {
            return Chebyshev { a: self.a, b: self.b, coeffs: vec![T::default()] };
        }
        let mut d = vec![T::default(); n + 1];
        for k in (1..=n).rev() {
            let next = if k < n { d[k + 1] } else { T::default() };
            d[k - 1] = next + self.coeffs[k] * (2.0 * k as f64);
        }
        d[0] = d[0] * 0.5;
        d.truncate(n.max(1));
        for c in d.iter_mut() {
            *c = *c * scale;
        }
        Chebyshev { a: self.a, b: self.b, coeffs: d }
    }

    /// Antiderivative vanishing at the left endpoint `a`.
    pub fn antiderivative(&self) -> Self {
        let n = self.degree();
        let h = 0.5 * (self.b - self.a);
        let c = |k: usize| if k <= n { self.coeffs[k] } else { T::default() };
        let mut out = vec![T::default(); n + 2];
        out[1] = (c(0) - c(2) * 0.5) * h;
        for (k, o) in out.iter_mut().enumerate().skip(2) {
            *o = (c(k - 1) - c(k + 1)) * (h / (2.0 * k as f64));
        }
        let mut at_a = T::default();
        for (k, v) in out.iter().enumerate().skip(1) {
            at_a = if k % 2 == 0 { at_a + *v } else { at_a - *v };
        }
        out[0] = T::default() - at_a;
        Chebyshev { a: self.a, b: self.b, coeffs: out }
    }

    /// Size of the trailing coefficients relative to the largest one; a
    /// small value means the interpolant resolves the sampled function.
    pub fn relative_tail(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        let tail_len = (n / 8).max(2).min(n);
        let tail = self.coeffs[n - tail_len..].iter().map(|c| c.magnitude()).fold(0.0, f64::max);
        tail / scale
    }
}

/// Piecewise Chebyshev representation on equal subintervals, for fast
/// evaluation of a high-degree interpolant.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev<T: ChebValue> {
    a: f64,
    width: f64,
    pieces: Vec<Chebyshev<T>>,
}

impl<T: ChebValue> PiecewiseChebyshev<T> {
    /// Resample `c` on pieces of at most `max_width`, doubling the local
    /// degree (from 16, up to 64) until every piece's tail is below `tol`.
    pub fn from_chebyshev(c: &Chebyshev<T>, max_width: f64, tol: f64) -> Self {
        let (a, b) = c.interval();
        let m = ((b - a) / max_width).ceil().max(1.0) as usize;
        let width = (b - a) / m as f64;
        let mut deg = 16;
        loop {
            let pieces: Vec<Chebyshev<T>> = (0..m)
                .map(|k| {
                    let lo = a + width * k as f64;
                    let hi = if k + 1 == m { b } else { lo + width };
                    Chebyshev::sample(lo, hi, deg, |t| c.eval(t))
                })
                .collect();
            let scale = c.coeffs.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
            let worst = pieces
                .iter()
                .map(|p| {
                    let n = p.coeffs.len();
                    p.coeffs[n - 3..].iter().map(|v| v.magnitude()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if worst <= tol * scale || deg >= 64 {
                return PiecewiseChebyshev { a, width, pieces };
            }
            deg *= 2;
        }
    }

    pub fn eval(&self, t: f64) -> T {
        let k = (((t - self.a) / self.width).floor().max(0.0) as usize).min(self.pieces.len() - 1);
        self.pieces[k].eval(t)
    }
}

/// Tensor Chebyshev interpolant on [pa, pb] x [qa, qb].
#[derive(Debug, Clone)]
pub struct Chebyshev2 {
    p: (f64, f64),
    q: (f64, f64),
    n: usize,
    /// c[j * (n + 1) + k] multiplies T_j(p) T_k(q).
    coeffs: Vec<f64>,
}

impl Chebyshev2 {
    /// Interpolant through `values[i][k] = f(p_i, q_k)` on Lobatto nodes.
    pub fn from_values(p: (f64, f64), q: (f64, f64), values: &[Vec<f64>]) -> Self {
        let n = values.len() - 1;
        // Transform along q for every p-node, then along p for every mode.
        let rows: Vec<Chebyshev<f64>> = values.iter().map(|row| Chebyshev::from_values(q.0, q.1, row)).collect();
        let mut coeffs = vec![0.0; (n + 1) * (n + 1)];
        for k in 0..=n {
            let col: Vec<f64> = rows.iter().map(|r| r.coeffs[k]).collect();
            let c = Chebyshev::from_values(p.0, p.1, &col);
            for j in 0..=n {
                coeffs[j * (n + 1) + k] = c.coeffs[j];
            }
        }
        Chebyshev2 { p, q, n, coeffs }
    }

    pub fn sample<F: FnMut(f64, f64) -> f64>(p: (f64, f64), q: (f64, f64), n: usize, mut f: F) -> Self {
        let pn = lobatto_nodes(n, p.0, p.1);
        let qn = lobatto_nodes(n, q.0, q.1);
        let values: Vec<Vec<f64>> = pn.iter().map(|&pp| qn.iter().map(|&qq| f(pp, qq)).collect()).collect();
        Self::from_values(p, q, &values)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// The restriction to the line q = const, as a Chebyshev series in p.
    pub fn line(&self, q: f64) -> Chebyshev<f64> {
        let x = (2.0 * q - self.q.0 - self.q.1) / (self.q.1 - self.q.0);
        let m = self.n + 1;
        let mut tk = vec![0.0; m];
        tk[0] = 1.0;
        if m > 1 {
            tk[1] = x;
        }
        for k in 2..m {
            tk[k] = 2.0 * x * tk[k - 1] - tk[k - 2];
        }
        let coeffs = (0..m).map(|j| self.coeffs[j * m..(j + 1) * m].iter().zip(&tk).map(|(c, t)| c * t).sum()).collect();
        Chebyshev { a: self.p.0, b: self.p.1, coeffs }
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.line(q).eval(p)
    }

    /// Largest coefficient with max(j, k) in the top eighth, relative to
    /// the largest coefficient overall.
    pub fn relative_tail(&self) -> f64 {
        let m = self.n + 1;
        let cut = m - (m / 8).max(2).min(m);
        let scale = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut tail = 0.0f64;
        for j in 0..m {
            for k in 0..m {
                if j >= cut || k >= cut {
                    tail = tail.max(self.coeffs[j * m + k].abs());
                }
            }
        }
        tail / scale
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn tensor_interpolant() {
        let f = |p: f64, q: f64| (0.7 * p).sin() * (1.0 + q * q).ln() + p * q;
        let c = super::Chebyshev2::sample((-1.0, 2.0), (-0.5, 0.5), 24, f);
        for &(p, q) in &[(0.3, 0.1), (-0.9, -0.45), (1.7, 0.33)] {
            assert!((c.eval(p, q) - f(p, q)).abs() < 1e-13);
        }
        assert!(c.relative_tail() < 1e-13);
    }

    use super::*;

    #[test]
    fn interpolates_and_differentiates_smooth_function() {
        let f = Chebyshev::sample(-1.3, 2.1, 64, |t: f64| (2.0 * t).sin() * (-t * t).exp());
        let d = f.derivative();
        let dd = d.derivative();
        for &t in &[-1.2f64, -0.3, 0.0, 0.77, 2.0] {
            let exact = (2.0 * t).sin() * (-t * t).exp();
            let dexact = (2.0 * (2.0 * t).cos() - 2.0 * t * (2.0 * t).sin()) * (-t * t).exp();
            assert!((f.eval(t) - exact).abs() < 1e-13);
            assert!((d.eval(t) - dexact).abs() < 1e-11);
            let h = 1e-4;
            let fd = (d.eval(t + h) - d.eval(t - h)) / (2.0 * h);
            assert!((dd.eval(t) - fd).abs() < 1e-6);
        }
        assert!(f.relative_tail() < 1e-14);
    }

    #[test]
    fn antiderivative_matches_closed_form() {
        let f = Chebyshev::sample(0.5, 3.0, 40, |t: f64| Complex64::new(t.cos(), t * t));
        let fi = f.antiderivative();
        for &t in &[0.5f64, 1.0, 2.2, 3.0] {
            let exact = Complex64::new(t.sin() - 0.5f64.sin(), (t.powi(3) - 0.125) / 3.0);
            assert!((fi.eval(t) - exact).norm() < 1e-13, "t={t}");
        }
    }
}
