use super::{BeamCoefficients, BeamError, Cutoff, FermiChart, FermiPoint, RiccatiSolution};
use crate::geodesic::GeodesicPath;
use crate::linalg::Vec2;
use crate::manifold::ChartMetric;
use crate::pairing::Coframe;
use num_complex::Complex64;

type C = Complex64;

/// Phase Theta and the derivatives entering the Fermi Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseJet {
    pub theta: C,
    pub theta_t: C,
    pub theta_y: C,
    pub theta_tt: C,
    pub theta_yy: C,
}

/// A function of (t, y) with the derivatives entering the Fermi Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BeamJet {
    pub u: C,
    pub u_t: C,
    pub u_y: C,
    pub u_tt: C,
    pub u_yy: C,
}

impl BeamJet {
    /// Laplace-Beltrami operator in Fermi coordinates.
    pub fn laplacian(&self, p: &FermiPoint) -> C {
        self.u_tt / (p.h * p.h) - self.u_t * (p.h_t / (p.h * p.h * p.h)) + self.u_yy + self.u_y * (p.h_y / p.h)
    }
}

/// Beam value together with (Delta + s^2) applied to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamValue {
    pub value: C,
    pub residual: C,
}

/// Gaussian beam v_s = Re(s)^{1/4} chi(y / delta) A e^{i s Theta}.
#[derive(Debug, Clone)]
pub struct GaussianBeam {
    pub fermi: FermiChart,
    pub riccati: RiccatiSolution,
    pub coeffs: BeamCoefficients,
    pub cutoff: Cutoff,
}

impl GaussianBeam {
    /// Beam of truncation order 0 or 1 with Riccati datum `h0` (Im h0 > 0).
    pub fn build(chart: &ChartMetric, path: &GeodesicPath, frame: &Coframe, delta: f64, order: usize, h0: C) -> Result<Self, BeamError> {
        if order > 1 {
            return Err(BeamError::UnsupportedOrder(order));
        }
        let fermi = FermiChart::new(chart, path, frame, delta)?;
        Self::from_fermi(fermi, order, h0)
    }

    pub fn from_fermi(fermi: FermiChart, order: usize, h0: C) -> Result<Self, BeamError> {
        if order > 1 {
            return Err(BeamError::UnsupportedOrder(order));
        }
        let riccati = RiccatiSolution::from_fermi(&fermi, h0)?;
        let coeffs = BeamCoefficients::build(&fermi, &riccati, order)?;
        let cutoff = Cutoff { delta: fermi.delta };
        let mut beam = GaussianBeam { fermi, riccati, coeffs, cutoff };
        beam.cutoff.delta = beam.positive_phase_width(beam.fermi.delta);
        Ok(beam)
    }

    /// Largest w <= `max` with Im Theta(t, y) >= Im H(t) y^2 / 4 for
    /// |y| <= w on a sample grid. Order 0 always gives `max`.
    fn positive_phase_width(&self, max: f64) -> f64 {
        if self.coeffs.phase.len() == 1 {
            return max;
        }
        let nt = 200;
        let ny = 100;
        let mut width = max;
        for i in 0..=nt {
            let t = self.fermi.t_lo + (self.fermi.t_hi - self.fermi.t_lo) * i as f64 / nt as f64;
            let imh = self.riccati.h_at(t).im;
            for j in 1..=ny {
                let y = max * j as f64 / ny as f64;
                if y >= width {
                    break;
                }
                for y in [y, -y] {
                    if self.phase(t, y).im < 0.25 * imh * y * y {
                        width = width.min(y.abs() * (j - 1) as f64 / j as f64);
                    }
                }
            }
        }
        width
    }

    pub fn order(&self) -> usize {
        self.coeffs.order
    }

    pub fn delta(&self) -> f64 {
        self.cutoff.delta
    }

    /// Phase value only.
    pub fn phase(&self, t: f64, y: f64) -> C {
        let mut acc = C::default();
        for c in self.coeffs.phase.iter().rev() {
            acc = (acc + c.fast.eval(t)) * y;
        }
        t + acc * y
    }

    pub fn phase_jet(&self, t: f64, y: f64) -> PhaseJet {
        let mut j = PhaseJet { theta: C::from(t), theta_t: C::from(1.0), theta_y: C::default(), theta_tt: C::default(), theta_yy: C::default() };
        for (k, c) in self.coeffs.phase.iter().enumerate() {
            let m = (k + 2) as i32;
            let [f, df, ddf] = c.eval(t);
            let ym = y.powi(m);
            j.theta += f * ym;
            j.theta_t += df * ym;
            j.theta_tt += ddf * ym;
            j.theta_y += f * (m as f64 * y.powi(m - 1));
            j.theta_yy += f * ((m * (m - 1)) as f64 * y.powi(m - 2));
        }
        j
    }

    /// Amplitude A (value only).
    pub fn amplitude(&self, s: C, t: f64, y: f64) -> C {
        let horner = |cs: &[super::CoefJet]| {
            let mut acc = C::default();
            for c in cs.iter().rev() {
                acc = acc * y + c.fast.eval(t);
            }
            acc
        };
        let a = horner(&self.coeffs.amp);
        if self.coeffs.amp1.is_empty() {
            a
        } else {
            a + horner(&self.coeffs.amp1) / s
        }
    }

    pub fn amplitude_jet(&self, s: C, t: f64, y: f64) -> BeamJet {
        let mut out = BeamJet::default();
        let mut add = |cs: &[super::CoefJet], w: C| {
            for (m, c) in cs.iter().enumerate() {
                let [f, df, ddf] = c.eval(t);
                let mi = m as i32;
                let ym = y.powi(mi);
                out.u += w * f * ym;
                out.u_t += w * df * ym;
                out.u_tt += w * ddf * ym;
                if m >= 1 {
                    out.u_y += w * f * (m as f64 * y.powi(mi - 1));
                }
                if m >= 2 {
                    out.u_yy += w * f * ((m * (m - 1)) as f64 * y.powi(mi - 2));
                }
            }
        };
        add(&self.coeffs.amp, C::from(1.0));
        add(&self.coeffs.amp1, 1.0 / s);
        out
    }

    fn prefactor(s: C) -> f64 {
        s.re.max(0.0).powf(0.25)
    }

    /// Beam value at Fermi coordinates (t, y).
    pub fn eval_fermi(&self, s: C, t: f64, y: f64) -> C {
        let (chi, _, _) = self.cutoff.eval(y);
        if chi == 0.0 {
            return C::default();
        }
        let e = (C::i() * s * self.phase(t, y)).exp();
        Self::prefactor(s) * chi * self.amplitude(s, t, y) * e
    }

    /// Beam value and (t, y)-derivatives.
    pub fn jet_fermi(&self, s: C, t: f64, y: f64) -> BeamJet {
        let (chi, chi_y, chi_yy) = self.cutoff.eval(y);
        if chi == 0.0 {
            return BeamJet::default();
        }
        let p = self.phase_jet(t, y);
        let a = self.amplitude_jet(s, t, y);
        let is = C::i() * s;
        let e = (is * p.theta).exp() * Self::prefactor(s);
        // w = A e^{i s Theta}
        let w = a.u;
        let w_t = a.u_t + is * p.theta_t * a.u;
        let w_y = a.u_y + is * p.theta_y * a.u;
        let w_tt = a.u_tt + 2.0 * is * p.theta_t * a.u_t + (is * p.theta_tt + is * is * p.theta_t * p.theta_t) * a.u;
        let w_yy = a.u_yy + 2.0 * is * p.theta_y * a.u_y + (is * p.theta_yy + is * is * p.theta_y * p.theta_y) * a.u;
        BeamJet {
            u: e * chi * w,
            u_t: e * chi * w_t,
            u_y: e * (chi * w_y + chi_y * w),
            u_tt: e * chi * w_tt,
            u_yy: e * (chi * w_yy + 2.0 * chi_y * w_y + chi_yy * w),
        }
    }

    /// Value and (Delta + s^2) v_s at a Fermi point.
    pub fn value_at(&self, s: C, t: f64, y: f64, p: &FermiPoint) -> BeamValue {
        let j = self.jet_fermi(s, t, y);
        BeamValue { value: j.u, residual: j.laplacian(p) + s * s * j.u }
    }

    /// Beam value at a chart point; `guess` seeds the inverse Fermi map and
    /// the returned coordinates can seed the next call.
    pub fn eval(&self, s: C, x: Vec2, guess: Option<(f64, f64)>) -> Result<(C, (f64, f64)), BeamError> {
        let (t, y) = self.fermi.inverse(x, guess)?;
        if y.abs() >= self.delta() {
            return Ok((C::default(), (t, y)));
        }
        Ok((self.eval_fermi(s, t, y), (t, y)))
    }
}
