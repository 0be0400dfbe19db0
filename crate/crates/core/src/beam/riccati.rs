use super::{BeamError, FermiChart};
use crate::cheb::{lobatto_nodes, Chebyshev};
use crate::ode::{self, AdaptiveOptions};
use num_complex::Complex64;

/// Solution of `H' + H^2 = -K(gamma(t))` through the linearisation
/// `Y'' = -K Y`, `Y(0) = 1`, `Y'(0) = H(0)`, `H = Y'/Y`.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub t_lo: f64,
    pub t_hi: f64,
    h: Chebyshev<Complex64>,
    /// log Y on the continuous branch with log Y(0) = 0.
    log_y: Chebyshev<Complex64>,
    /// Source term K(gamma(t)).
    curvature: Chebyshev<f64>,
    min_abs_y: f64,
}

const TAIL_TOL: f64 = 1e-13;

impl RiccatiSolution {
    pub fn from_fermi(fc: &FermiChart, h0: Complex64) -> Result<Self, BeamError> {
        let chart = fc.chart;
        Self::solve_with(|t| chart.curvature_unchecked(fc.axis(t).0), h0, fc.t_lo, fc.t_hi)
    }

    /// Solve with an explicit curvature profile on [t_lo, t_hi] (0 inside).
    pub fn solve_with<K: Fn(f64) -> f64>(curvature: K, h0: Complex64, t_lo: f64, t_hi: f64) -> Result<Self, BeamError> {
        if !(t_lo < 0.0 && t_hi > 0.0) {
            return Err(BeamError::Precondition(format!("Riccati interval [{t_lo}, {t_hi}] must contain 0 in its interior")));
        }
        if h0.im <= 0.0 {
            return Err(BeamError::Precondition(format!("initial value must have positive imaginary part, got {h0}")));
        }
        let f = |t: f64, u: &[f64; 4]| -> [f64; 4] {
            let k = curvature(t);
            [u[2], u[3], -k * u[0], -k * u[1]]
        };
        let opts = AdaptiveOptions { rtol: 1e-13, atol: 1e-15, h_max: 0.05, h_init: 1e-3, max_steps: 1_000_000 };
        let y0 = [1.0, 0.0, h0.re, h0.im];
        let mut n = 32;
        loop {
            let nodes = lobatto_nodes(n, t_lo, t_hi);
            let pos: Vec<f64> = nodes.iter().rev().copied().filter(|&t| t >= 0.0).collect();
            let neg: Vec<f64> = nodes.iter().copied().filter(|&t| t < 0.0).collect();
            let sp = ode::integrate_to_targets(&f, 0.0, y0, &pos, &opts)?;
            let sn = ode::integrate_to_targets(&f, 0.0, y0, &neg, &opts)?;
            // Nodes are descending: negative ones first in `sn` order, then
            // the reversed positive ones.
            let mut states: Vec<[f64; 4]> = Vec::with_capacity(n + 1);
            states.extend(sp.iter().rev());
            states.extend(sn.iter());
            let mut min_abs_y = f64::INFINITY;
            let mut hv = Vec::with_capacity(n + 1);
            for (t, s) in nodes.iter().zip(&states) {
                let y = Complex64::new(s[0], s[1]);
                let dy = Complex64::new(s[2], s[3]);
                min_abs_y = min_abs_y.min(y.norm());
                if y.norm() < 1e-12 {
                    return Err(BeamError::BlowUp(*t));
                }
                hv.push(dy / y);
            }
            let h = Chebyshev::from_values(t_lo, t_hi, &hv);
            let tail = h.relative_tail();
            if tail < TAIL_TOL || n >= 1024 {
                if tail >= 1e-9 {
                    return Err(BeamError::Unresolved(tail));
                }
                let prim = h.antiderivative();
                let at0 = prim.eval(0.0);
                let lv: Vec<Complex64> = nodes.iter().map(|&t| prim.eval(t) - at0).collect();
                let log_y = Chebyshev::from_values(t_lo, t_hi, &lv);
                let kv: Vec<f64> = nodes.iter().map(|&t| curvature(t)).collect();
                let curvature = Chebyshev::from_values(t_lo, t_hi, &kv);
                let sol = RiccatiSolution { t_lo, t_hi, h, log_y, curvature, min_abs_y };
                if let Some(t) = nodes.iter().copied().find(|&t| sol.h_at(t).im <= 0.0) {
                    return Err(BeamError::Precondition(format!("Im H lost positivity at t = {t}")));
                }
                return Ok(sol);
            }
            n *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.h.degree()
    }

    pub fn h_at(&self, t: f64) -> Complex64 {
        self.h.eval(t)
    }

    pub fn h_cheb(&self) -> &Chebyshev<Complex64> {
        &self.h
    }

    pub fn log_y_at(&self, t: f64) -> Complex64 {
        self.log_y.eval(t)
    }

    /// Leading amplitude Y^{-1/2}.
    pub fn a0_at(&self, t: f64) -> Complex64 {
        (-0.5 * self.log_y_at(t)).exp()
    }

    pub fn curvature_at(&self, t: f64) -> f64 {
        self.curvature.eval(t)
    }

    pub fn min_abs_y(&self) -> f64 {
        self.min_abs_y
    }

    /// max |H' + H^2 + K| over `samples` equispaced points.
    pub fn residual_max(&self, samples: usize) -> f64 {
        let dh = self.h.derivative();
        (0..=samples)
            .map(|k| {
                let t = self.t_lo + (self.t_hi - self.t_lo) * k as f64 / samples as f64;
                let h = self.h.eval(t);
                (dh.eval(t) + h * h + self.curvature.eval(t)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// min Im H over `samples` equispaced points.
    pub fn min_im_h(&self, samples: usize) -> f64 {
        (0..=samples).map(|k| self.h.eval(self.t_lo + (self.t_hi - self.t_lo) * k as f64 / samples as f64).im).fold(f64::INFINITY, f64::min)
    }
}
