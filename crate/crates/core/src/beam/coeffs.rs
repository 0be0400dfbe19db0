use super::{BeamError, FermiChart, RiccatiSolution};
use crate::cheb::{lobatto_nodes, Chebyshev, PiecewiseChebyshev};
use crate::fd;
use num_complex::Complex64;

type C = Complex64;

/// A coefficient function with its first two derivatives.
#[derive(Debug, Clone)]
pub struct CoefJet {
    pub f: Chebyshev<C>,
    pub df: Chebyshev<C>,
    pub ddf: Chebyshev<C>,
    /// Low-degree piecewise copy of `f` for value-only evaluation.
    pub fast: PiecewiseChebyshev<C>,
}

impl CoefJet {
    pub fn eval(&self, t: f64) -> [C; 3] {
        [self.f.eval(t), self.df.eval(t), self.ddf.eval(t)]
    }
}

/// Taylor coefficients in y of the beam phase and amplitude, as functions of t.
#[derive(Debug, Clone)]
pub struct BeamCoefficients {
    pub order: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Interpolation degree shared by all coefficients.
    pub degree: usize,
    /// `phase[m]` multiplies y^(m + 2) in Theta; `phase[0] = H / 2`.
    pub phase: Vec<CoefJet>,
    /// `amp[m]` multiplies y^m in the leading amplitude.
    pub amp: Vec<CoefJet>,
    /// `amp1[m]` multiplies y^m / s.
    pub amp1: Vec<CoefJet>,
    /// Largest relative Chebyshev tail over all coefficients.
    pub tail: f64,
}

/// Node values of a coefficient and its first two derivatives.
struct Stage {
    v: Vec<C>,
    d: Vec<C>,
    dd: Vec<C>,
}

struct Grid {
    t_lo: f64,
    t_hi: f64,
    nodes: Vec<f64>,
    /// log Y at the nodes.
    l: Vec<C>,
    h: Vec<C>,
}

impl Grid {
    fn cheb(&self, v: &[C]) -> Chebyshev<C> {
        Chebyshev::from_values(self.t_lo, self.t_hi, v)
    }

    fn derivative_values(&self, v: &[C]) -> Vec<C> {
        let d = self.cheb(v).derivative();
        self.nodes.iter().map(|&t| d.eval(t)).collect()
    }

    /// Solve f' = -c H f + beta with f(0) = 0.
    fn solve(&self, c: f64, beta: &[C]) -> Stage {
        let w: Vec<C> = self.l.iter().zip(beta).map(|(l, b)| (c * l).exp() * b).collect();
        let prim = self.cheb(&w).antiderivative();
        let at0 = prim.eval(0.0);
        let v: Vec<C> = self.nodes.iter().zip(&self.l).map(|(&t, l)| (-c * l).exp() * (prim.eval(t) - at0)).collect();
        let d: Vec<C> = v.iter().zip(&self.h).zip(beta).map(|((f, h), b)| -c * h * f + b).collect();
        let dd = self.derivative_values(&d);
        Stage { v, d, dd }
    }

    fn jet(&self, s: &Stage) -> CoefJet {
        let f = self.cheb(&s.v);
        let fast = PiecewiseChebyshev::from_chebyshev(&f, 0.25, 1e-15);
        CoefJet { f, df: self.cheb(&s.d), ddf: self.cheb(&s.dd), fast }
    }
}

/// Half-width of the y-interval used to differentiate K across the axis.
const K_SPAN: f64 = 0.2;
const K_NODES: usize = 16;
const TAIL_TOL: f64 = 1e-11;

/// y-derivatives K_j = d^j/dy^j K(x(t, y)) at y = 0, j = 0..=4.
fn curvature_jets(fc: &FermiChart, t: f64) -> Result<[f64; 5], BeamError> {
    if fc.chart.is_flat() {
        return Ok([0.0; 5]);
    }
    let mut span = K_SPAN;
    for _ in 0..6 {
        let ys: Vec<f64> = lobatto_nodes(K_NODES, -span, span).into_iter().map(|y| if y.abs() < 1e-14 { 0.0 } else { y }).collect();
        let pos: Vec<f64> = ys.iter().rev().copied().filter(|&y| y >= 0.0).collect();
        let neg: Vec<f64> = ys.iter().copied().filter(|&y| y < 0.0).collect();
        let attempt = fc.ray_samples(t, &pos).and_then(|p| Ok((p, fc.ray_samples(t, &neg)?)));
        if let Ok((p, n)) = attempt {
            let xs: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
            let ks: Result<Vec<f64>, _> = p.iter().chain(n.iter()).map(|pt| fc.chart.curvature_at(pt.x)).collect();
            let Ok(ks) = ks else {
                span *= 0.5;
                continue;
            };
            let w = fd::weights(0.0, &xs, 4);
            let mut out = [0.0; 5];
            for (j, o) in out.iter_mut().enumerate() {
                *o = w[j].iter().zip(&ks).map(|(a, b)| a * b).sum();
            }
            return Ok(out);
        }
        span *= 0.5;
    }
    Err(BeamError::Precondition(format!("curvature jet unavailable at t = {t}")))
}

impl BeamCoefficients {
    pub fn build(fc: &FermiChart, ric: &RiccatiSolution, order: usize) -> Result<Self, BeamError> {
        if order > 1 {
            return Err(BeamError::UnsupportedOrder(order));
        }
        let (t_lo, t_hi) = (ric.t_lo, ric.t_hi);
        let mut n = ric.degree().next_power_of_two().max(64);
        loop {
            let out = Self::build_on(fc, ric, order, n)?;
            if out.tail < TAIL_TOL || n >= 1024 {
                if out.tail >= 1e-7 {
                    return Err(BeamError::Unresolved(out.tail));
                }
                debug_assert_eq!((out.t_lo, out.t_hi), (t_lo, t_hi));
                return Ok(out);
            }
            n *= 2;
        }
    }

    fn build_on(fc: &FermiChart, ric: &RiccatiSolution, order: usize, n: usize) -> Result<Self, BeamError> {
        let (t_lo, t_hi) = (ric.t_lo, ric.t_hi);
        let nodes = lobatto_nodes(n, t_lo, t_hi);
        let h: Vec<C> = nodes.iter().map(|&t| ric.h_at(t)).collect();
        let l: Vec<C> = nodes.iter().map(|&t| ric.log_y_at(t)).collect();
        let grid = Grid { t_lo, t_hi, nodes, l, h };
        let m = grid.nodes.len();

        let kj: Vec<[f64; 5]> = if order == 0 {
            grid.nodes.iter().map(|&t| [ric.curvature_at(t), 0.0, 0.0, 0.0, 0.0]).collect()
        } else {
            grid.nodes.iter().map(|&t| curvature_jets(fc, t)).collect::<Result<_, _>>()?
        };
        let kc = |j: usize| -> Vec<C> { kj.iter().map(|k| C::from(k[j])).collect() };
        let k0 = kc(0);
        let dk0 = grid.derivative_values(&k0);

        // H / 2 and a0 with exact first derivatives from their equations.
        let hh = &grid.h;
        let dh: Vec<C> = (0..m).map(|i| -hh[i] * hh[i] - k0[i]).collect();
        let ddh: Vec<C> = (0..m).map(|i| -2.0 * hh[i] * dh[i] - dk0[i]).collect();
        let half = |v: &[C]| -> Vec<C> { v.iter().map(|x| 0.5 * x).collect() };
        let theta2 = Stage { v: half(hh), d: half(&dh), dd: half(&ddh) };
        let a0v: Vec<C> = grid.l.iter().map(|l| (-0.5 * l).exp()).collect();
        let da0: Vec<C> = (0..m).map(|i| -0.5 * hh[i] * a0v[i]).collect();
        let dda0: Vec<C> = (0..m).map(|i| -0.5 * (dh[i] * a0v[i] + hh[i] * da0[i])).collect();
        let a0 = Stage { v: a0v, d: da0, dd: dda0 };

        let mut phase = vec![grid.jet(&theta2)];
        let mut amp = vec![grid.jet(&a0)];
        let mut amp1 = Vec::new();

        if order == 1 {
            let k1 = kc(1);
            let k2 = kc(2);
            let k3 = kc(3);
            let k4 = kc(4);
            let dk1 = grid.derivative_values(&k1);
            let dk2 = grid.derivative_values(&k2);
            let i_ = C::i();
            let beta = |f: &dyn Fn(usize) -> C| -> Vec<C> { (0..m).map(f).collect() };

            let th3 = grid.solve(3.0, &beta(&|i| -k1[i] / 6.0));
            let th4 = grid
                .solve(4.0, &beta(&|i| -k0[i] * k0[i] / 3.0 - k0[i] * dh[i] / 2.0 - k2[i] / 24.0 - dh[i] * dh[i] / 8.0 - 4.5 * th3.v[i] * th3.v[i]));
            let th5 = grid.solve(
                5.0,
                &beta(&|i| {
                    k0[i] * (-13.0 * k1[i] / 60.0 - th3.d[i])
                        - k1[i] * dh[i] / 6.0
                        - k3[i] / 120.0
                        - dh[i] * th3.d[i] / 2.0
                        - 12.0 * th3.v[i] * th4.v[i]
                }),
            );
            let th6 = grid.solve(
                6.0,
                &beta(&|i| {
                    let (k0, k1, k2, dh) = (k0[i], k1[i], k2[i], dh[i]);
                    -17.0 * k0 * k0 * k0 / 90.0 - k0 * k0 * dh / 3.0 + k0 * (-19.0 * k2 / 360.0 - dh * dh / 8.0 - th4.d[i])
                        - 13.0 * k1 * k1 / 360.0
                        - k1 * th3.d[i] / 3.0
                        - k2 * dh / 24.0
                        - k4[i] / 720.0
                        - dh * th4.d[i] / 2.0
                        - th3.d[i] * th3.d[i] / 2.0
                        - 15.0 * th3.v[i] * th5.v[i]
                        - 8.0 * th4.v[i] * th4.v[i]
                }),
            );
            let a1 = grid.solve(1.5, &beta(&|i| -3.0 * a0.v[i] * th3.v[i]));
            let a2 = grid.solve(
                2.5,
                &beta(&|i| {
                    hh[i] * k0[i] * a0.v[i] / 2.0 - k0[i] * a0.d[i] - 6.0 * a0.v[i] * th4.v[i] + a0.v[i] * (-dk0[i] / 4.0 - ddh[i] / 4.0)
                        - 6.0 * a1.v[i] * th3.v[i]
                        - dh[i] * a0.d[i] / 2.0
                }),
            );
            let a3 = grid.solve(
                3.5,
                &beta(&|i| {
                    let (k0, k1) = (k0[i], k1[i]);
                    hh[i] * (k0 * a1.v[i] / 2.0 + k1 * a0.v[i] / 4.0) - k0 * a1.d[i] - k1 * a0.d[i] / 3.0 - 10.0 * a0.v[i] * th5.v[i]
                        + a0.v[i] * (-dk1[i] / 12.0 - th3.dd[i] / 2.0)
                        - 10.0 * a1.v[i] * th4.v[i]
                        + a1.v[i] * (-dk0[i] / 4.0 - ddh[i] / 4.0)
                        - dh[i] * a1.d[i] / 2.0
                        - a0.d[i] * th3.d[i]
                        + th3.v[i] * (1.5 * k0 * a0.v[i] - 9.0 * a2.v[i])
                }),
            );
            let a4 = grid.solve(
                4.5,
                &beta(&|i| {
                    let (k0, k1, k2, dh) = (k0[i], k1[i], k2[i], dh[i]);
                    let (a0v, a1v, a2v) = (a0.v[i], a1.v[i], a2.v[i]);
                    hh[i] * (k0 * k0 * a0v / 6.0 + k0 * a2v / 2.0 + k1 * a1v / 4.0 + k2 * a0v / 12.0) - 2.0 * k0 * k0 * a0.d[i] / 3.0
                        + k0 * (-dh * a0.d[i] / 2.0 - a2.d[i])
                        - k1 * a1.d[i] / 3.0
                        - k2 * a0.d[i] / 12.0
                        - 15.0 * a0v * th6.v[i]
                        + a0v * (-k0 * dk0[i] / 3.0 - k0 * ddh[i] / 4.0 - dh * dk0[i] / 8.0 - dk2[i] / 48.0 - th4.dd[i] / 2.0)
                        - 15.0 * a1v * th5.v[i]
                        + a1v * (-dk1[i] / 12.0 - th3.dd[i] / 2.0)
                        + a2v * (-dk0[i] / 4.0 - ddh[i] / 4.0)
                        - dh * a2.d[i] / 2.0
                        - a0.d[i] * th4.d[i]
                        - a1.d[i] * th3.d[i]
                        + th3.v[i] * (1.5 * k0 * a1v + 0.75 * k1 * a0v - 12.0 * a3.v[i])
                        + th4.v[i] * (2.0 * k0 * a0v - 14.0 * a2v)
                }),
            );
            let b0 = grid.solve(0.5, &beta(&|i| i_ * a2.v[i] + i_ * a0.dd[i] / 2.0));
            let b1 = grid.solve(1.5, &beta(&|i| -i_ * k0[i] * a1.v[i] / 2.0 + 3.0 * i_ * a3.v[i] - 3.0 * b0.v[i] * th3.v[i] + i_ * a1.dd[i] / 2.0));
            let b2 = grid.solve(
                2.5,
                &beta(&|i| {
                    let k0 = k0[i];
                    hh[i] * k0 * b0.v[i] / 2.0 - i_ * k0 * a2.v[i] + k0 * (-b0.d[i] + i_ * a0.dd[i] / 2.0) - i_ * k1[i] * a1.v[i] / 4.0
                        + 6.0 * i_ * a4.v[i]
                        - 6.0 * b0.v[i] * th4.v[i]
                        + b0.v[i] * (-dk0[i] / 4.0 - ddh[i] / 4.0)
                        - 6.0 * b1.v[i] * th3.v[i]
                        - dh[i] * b0.d[i] / 2.0
                        + i_ * dk0[i] * a0.d[i] / 4.0
                        + i_ * a2.dd[i] / 2.0
                }),
            );
            phase.extend([&th3, &th4, &th5, &th6].iter().map(|s| grid.jet(s)));
            amp.extend([&a1, &a2, &a3, &a4].iter().map(|s| grid.jet(s)));
            amp1.extend([&b0, &b1, &b2].iter().map(|s| grid.jet(s)));
        }

        let tail = phase.iter().chain(amp.iter()).chain(amp1.iter()).map(|j| j.f.relative_tail().max(j.df.relative_tail())).fold(0.0, f64::max);
        Ok(BeamCoefficients { order, t_lo, t_hi, degree: n, phase, amp, amp1, tail })
    }
}
