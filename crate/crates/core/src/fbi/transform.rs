use super::{FbiError, ProbePoint, ScalarField};
use crate::cheb::{lobatto_nodes, Chebyshev, Chebyshev2};
use crate::linalg::{self, Vec2};
use crate::quad::{CompensatedSum, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformOptions {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Largest phase increment (radians) across one panel.
    pub phase_per_panel: f64,
    /// Largest panel width in units of tau^{-1/2} (the Gaussian scale).
    pub envelope_per_panel: f64,
    /// The integration box stops where tau Im(Phi) reaches this value.
    pub decay_exponent: f64,
    /// Target relative tail of the Fermi inverse interpolants.
    pub interp_tol: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { nodes: 14, phase_per_panel: 6.0, envelope_per_panel: 3.0, decay_exponent: 36.0, interp_tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformValue {
    pub tau: f64,
    pub value: C,
    /// int |f k_tau| dV, the scale of cancellation in `value`.
    pub l1: f64,
    /// Half-size of the integration box.
    pub radius: f64,
    pub warnings: Vec<String>,
}

/// Interpolants of both Fermi inverse maps on a square box around the
/// base point, in coordinates x = z + p e_p + q e_q.
#[derive(Debug, Clone)]
pub struct TransformMaps {
    pub center: Vec2,
    pub e_p: Vec2,
    pub e_q: Vec2,
    /// Box half-size.
    pub radius: f64,
    /// [beam][t or y].
    maps: [[Chebyshev2; 2]; 2],
    /// Half-size of the box needed for the smallest tau requested.
    pub wanted: f64,
}

struct Lines {
    t: [Chebyshev<f64>; 2],
    y: [Chebyshev<f64>; 2],
}

impl TransformMaps {
    /// Box sized for `tau_min`, shrunk until both inverse maps are smooth
    /// and convergent on it.
    pub fn build(point: &ProbePoint, tau_min: f64, opts: &TransformOptions) -> Result<Self, FbiError> {
        Self::build_along(point, tau_min, None, opts)
    }

    /// As `build`, with the box p-axis along `axis` when given (otherwise
    /// along the oscillation direction, xi raised).
    pub fn build_along(point: &ProbePoint, tau_min: f64, axis: Option<Vec2>, opts: &TransformOptions) -> Result<Self, FbiError> {
        let chart = point.beams[0].fermi.chart;
        let z = point.xi.z;
        let v = match axis {
            Some(a) if linalg::norm(a) > 0.0 => a,
            _ => chart.raise(z, point.xi.xi)?,
        };
        let e_p = linalg::scale(1.0 / linalg::norm(v), v);
        let e_q = [-e_p[1], e_p[0]];
        let wanted = support_radius(point, z, e_p, e_q, tau_min, opts.decay_exponent, 4.0 * chart.radius);
        let mut radius = wanted;
        let mut last = String::new();
        for _ in 0..12 {
            match Self::fit(point, z, e_p, e_q, radius, opts.interp_tol) {
                Ok(maps) => return Ok(TransformMaps { center: z, e_p, e_q, radius, maps, wanted }),
                Err(e) => {
                    last = e;
                    radius *= 0.85;
                }
            }
        }
        Err(FbiError::Interpolation(last))
    }

    fn fit(point: &ProbePoint, z: Vec2, e_p: Vec2, e_q: Vec2, r: f64, tol: f64) -> Result<[[Chebyshev2; 2]; 2], String> {
        let mut n = 16;
        loop {
            let pn = lobatto_nodes(n, -r, r);
            let qn = lobatto_nodes(n, -r, r);
            let mut out = Vec::with_capacity(2);
            let mut tail = 0.0f64;
            for beam in &point.beams {
                let mut tv = vec![vec![0.0; n + 1]; n + 1];
                let mut yv = vec![vec![0.0; n + 1]; n + 1];
                let mut guess = None;
                for (i, &p) in pn.iter().enumerate() {
                    // Serpentine order keeps consecutive nodes adjacent.
                    let order: Vec<usize> = if i % 2 == 0 { (0..=n).collect() } else { (0..=n).rev().collect() };
                    for k in order {
                        let x = linalg::add(z, linalg::add(linalg::scale(p, e_p), linalg::scale(qn[k], e_q)));
                        let (t, y) =
                            beam.fermi.inverse(x, guess).or_else(|_| beam.fermi.inverse(x, None)).map_err(|e| format!("box radius {r}: {e}"))?;
                        tv[i][k] = t;
                        yv[i][k] = y;
                        guess = Some((t, y));
                    }
                }
                let ct = Chebyshev2::from_values((-r, r), (-r, r), &tv);
                let cy = Chebyshev2::from_values((-r, r), (-r, r), &yv);
                tail = tail.max(ct.relative_tail()).max(cy.relative_tail());
                out.push([ct, cy]);
            }
            if tail < tol {
                let b = out.pop().unwrap();
                let a = out.pop().unwrap();
                return Ok([a, b]);
            }
            if n >= 128 {
                return Err(format!("box radius {r}: interpolation tail {tail:e} above {tol:e}"));
            }
            n *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.maps[0][0].degree()
    }

    fn lines(&self, q: f64) -> Lines {
        Lines { t: [self.maps[0][0].line(q), self.maps[1][0].line(q)], y: [self.maps[0][1].line(q), self.maps[1][1].line(q)] }
    }

    pub fn point(&self, p: f64, q: f64) -> Vec2 {
        linalg::add(self.center, linalg::add(linalg::scale(p, self.e_p), linalg::scale(q, self.e_q)))
    }

    /// Interpolated Fermi coordinates of the box point (p, q).
    pub fn coords(&self, p: f64, q: f64) -> [(f64, f64); 2] {
        [(self.maps[0][0].eval(p, q), self.maps[0][1].eval(p, q)), (self.maps[1][0].eval(p, q), self.maps[1][1].eval(p, q))]
    }
}

/// Smallest box half-size outside which tau Im Phi >= `exponent` (or the
/// probe vanishes) along 32 rays from z, capped at `cap`.
fn support_radius(point: &ProbePoint, z: Vec2, e_p: Vec2, e_q: Vec2, tau: f64, exponent: f64, cap: f64) -> f64 {
    let chart = point.beams[0].fermi.chart;
    let step = 0.01 * chart.radius;
    let mut r_all: f64 = 0.0;
    for k in 0..32 {
        let a = std::f64::consts::PI * k as f64 / 16.0;
        let d = linalg::add(linalg::scale(a.cos(), e_p), linalg::scale(a.sin(), e_q));
        let mut r = 0.0;
        let mut guess: [Option<(f64, f64)>; 2] = [None, None];
        let mut last_alive = 0.0;
        while r < cap {
            r += step;
            let x = linalg::axpy(r, d, z);
            if !chart.contains(x) {
                // Keep going only while the ray can re-enter M (it cannot
                // for a disk once it has left it moving outward).
                if linalg::dot(x, d) > 0.0 {
                    break;
                }
                continue;
            }
            let mut c = [(0.0, 0.0); 2];
            let mut ok = true;
            for j in 0..2 {
                match point.beams[j].fermi.inverse(x, guess[j]) {
                    Ok(v) => {
                        c[j] = v;
                        guess[j] = Some(v);
                    }
                    Err(_) => ok = false,
                }
            }
            if !ok {
                last_alive = r;
                continue;
            }
            if !point.in_support(&c) {
                continue;
            }
            if tau * point.phase_from(&c).im < exponent {
                last_alive = r;
            }
        }
        r_all = r_all.max(last_alive + step);
    }
    r_all.min(cap)
}

/// Largest |dp/dq| of the field's breakpoints inside the box, capped at
/// `MAX_BREAK_SLOPE`.
fn breakpoint_slope(maps: &TransformMaps, f: &dyn ScalarField, r: f64) -> f64 {
    let mut slope = 0.0f64;
    let n = 8;
    for i in 0..n {
        let q0 = -r + 2.0 * r * i as f64 / n as f64;
        let q1 = q0 + 2.0 * r / n as f64;
        let b0 = f.breakpoints(maps.point(0.0, q0), maps.e_p);
        let b1 = f.breakpoints(maps.point(0.0, q1), maps.e_p);
        if b0.len() == b1.len() {
            for (a, b) in b0.iter().zip(&b1) {
                if a.abs() <= r && b.abs() <= r {
                    slope = slope.max((b - a).abs() / (q1 - q0));
                }
            }
        }
    }
    slope.min(MAX_BREAK_SLOPE)
}

const MAX_BREAK_SLOPE: f64 = 8.0;

/// T(tau, xi) = int_M f k_tau(xi, .) dV_g on the box of `maps`.
pub fn transform(point: &ProbePoint, maps: &TransformMaps, f: &dyn ScalarField, tau: f64, opts: &TransformOptions) -> TransformValue {
    let chart = point.beams[0].fermi.chart;
    let mut warnings = Vec::new();
    let needed = support_radius(point, maps.center, maps.e_p, maps.e_q, tau, opts.decay_exponent, maps.wanted.max(maps.radius));
    let r = if needed > maps.radius {
        warnings.push(format!("tau = {tau}: integration box truncated from {needed:.4} to {:.4}", maps.radius));
        maps.radius
    } else {
        needed
    };

    // Panel sizes from the phase gradient and the Gaussian width.
    let (mut gp, mut gq) = (0.0f64, 0.0f64);
    let h = 1e-6 * r.max(1e-3);
    for i in 0..=8 {
        for k in 0..=8 {
            let p = -r + 2.0 * r * i as f64 / 8.0;
            let q = -r + 2.0 * r * k as f64 / 8.0;
            if !chart.contains(maps.point(p, q)) {
                continue;
            }
            let re = |p: f64, q: f64| point.phase_from(&maps.coords(p, q)).re;
            gp = gp.max(((re(p + h, q) - re(p - h, q)) / (2.0 * h)).abs());
            gq = gq.max(((re(p, q + h) - re(p, q - h)) / (2.0 * h)).abs());
        }
    }
    // A breakpoint that moves along p as q varies makes the line integrals
    // oscillate in q as well.
    let slope = breakpoint_slope(maps, f, r);
    let gq = gq.max(gp * slope);
    let width = opts.envelope_per_panel / tau.sqrt();
    let wp = (opts.phase_per_panel / (tau * gp).max(1e-300)).min(width);
    let wq = (opts.phase_per_panel / (tau * gq).max(1e-300)).min(width);
    let gl = GaussLegendre::new(opts.nodes);
    let radius = chart.radius;
    // Lines tangent to the boundary circle: the chord length behaves like a
    // square root there.
    let c_q = linalg::dot(maps.center, maps.e_q);
    let tangents = [-radius - c_q, radius - c_q];
    let mut q_breaks = vec![-r];
    q_breaks.extend(f.breakpoints(maps.center, maps.e_q).into_iter().chain(tangents).filter(|&q| q > -r && q < r));
    q_breaks.push(r);
    q_breaks.sort_by(f64::total_cmp);
    q_breaks.dedup();
    let is_tangent = |q: f64| tangents.iter().any(|&t| (q - t).abs() <= 1e-14 * radius);
    let mut q_nodes: Vec<(f64, f64)> = Vec::new();
    for w in q_breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (is_tangent(a), is_tangent(b)) {
            (false, false) => q_nodes.extend(gl.composite(a, b, ((b - a) / wq).ceil().max(1.0) as usize)),
            (ta, tb) => {
                let m = 0.5 * (a + b);
                let halves = match (ta, tb) {
                    (true, true) => vec![(a, m, true), (m, b, false)],
                    (true, false) => vec![(a, b, true)],
                    _ => vec![(a, b, false)],
                };
                for (lo, hi, at_lo) in halves {
                    // q = edge -/+ (hi - lo) u^2 with the tangent point at u = 0.
                    let len = hi - lo;
                    let panels = (2.0 * len / wq).ceil().max(1.0) as usize;
                    for (u, wu) in gl.composite(0.0, 1.0, panels) {
                        let q = if at_lo { lo + len * u * u } else { hi - len * u * u };
                        q_nodes.push((q, 2.0 * len * u * wu));
                    }
                }
            }
        }
    }

    let mut sum = CompensatedSum::default();
    let mut l1 = 0.0;
    for &(q, wq_) in &q_nodes {
        // The line x(p) = z + q e_q + p e_p meets the disk in [p_lo, p_hi].
        let o = maps.point(0.0, q);
        let b = linalg::dot(o, maps.e_p);
        let disc = b * b - (linalg::dot(o, o) - radius * radius);
        if disc <= 0.0 {
            continue;
        }
        let (p_lo, p_hi) = ((-b - disc.sqrt()).max(-r), (-b + disc.sqrt()).min(r));
        if p_lo >= p_hi {
            continue;
        }
        let mut breaks = vec![p_lo];
        breaks.extend(f.breakpoints(o, maps.e_p).into_iter().filter(|&p| p > p_lo && p < p_hi));
        breaks.push(p_hi);
        let lines = maps.lines(q);
        for seg in breaks.windows(2) {
            let panels = ((seg[1] - seg[0]) / wp).ceil().max(1.0) as usize;
            for (p, wp_) in gl.composite(seg[0], seg[1], panels) {
                let c = [(lines.t[0].eval(p), lines.y[0].eval(p)), (lines.t[1].eval(p), lines.y[1].eval(p))];
                if !point.in_support(&c) {
                    continue;
                }
                let x = maps.point(p, q);
                let fx = f.eval(x);
                if fx == 0.0 {
                    continue;
                }
                let dv = chart.sqrt_det(x).unwrap_or(0.0);
                let k = point.kernel_from(tau, &c);
                let w = wq_ * wp_ * dv * fx;
                sum.add(k * w);
                l1 += (k * w).norm();
            }
        }
    }
    TransformValue { tau, value: sum.value(), l1, radius: r, warnings }
}
