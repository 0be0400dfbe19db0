use serde::{Deserialize, Serialize};

fn psi(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let p = (-1.0 / x).exp();
    let x2 = x * x;
    (p, p / x2, p * (1.0 - 2.0 * x) / (x2 * x2))
}

/// Smooth plateau: 1 on |r| <= 1/2, 0 on |r| >= 1, C-infinity in between.
/// Returns (chi, chi', chi'').
pub fn plateau_cutoff(r: f64) -> (f64, f64, f64) {
    let a = r.abs();
    if a <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if a >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 2.0 * a - 1.0;
    let (pa, dpa, ddpa) = psi(1.0 - u);
    let (pb, dpb, ddpb) = psi(u);
    let (a0, a1, a2) = (pa, -dpa, ddpa);
    let (b0, b1, b2) = (pb, dpb, ddpb);
    let d = a0 + b0;
    let dd = a1 + b1;
    let n = a1 * b0 - a0 * b1;
    let dn = a2 * b0 - a0 * b2;
    let chi = a0 / d;
    let chi_u = n / (d * d);
    let chi_uu = dn / (d * d) - 2.0 * n * dd / (d * d * d);
    let sgn = r.signum();
    (chi, 2.0 * sgn * chi_u, 4.0 * chi_uu)
}

/// Tube cutoff chi(y / delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub delta: f64,
}

impl Cutoff {
    /// (chi, d chi/dy, d^2 chi/dy^2).
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        let (c, d, dd) = plateau_cutoff(y / self.delta);
        (c, d / self.delta, dd / (self.delta * self.delta))
    }
}
