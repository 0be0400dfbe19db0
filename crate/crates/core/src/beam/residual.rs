use super::{BeamError, FermiChart, FermiPoint, GaussianBeam};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualOptions {
    /// Gauss-Legendre nodes per t panel.
    pub t_nodes: usize,
    /// Gauss-Legendre nodes per y panel.
    pub y_nodes: usize,
    /// The y-window stops where tau Im(H) y^2 exceeds this value.
    pub exponent_cut: f64,
    /// Relative difference (coarse vs refined) above which a warning is issued.
    pub warn_rel: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions { t_nodes: 8, y_nodes: 10, exponent_cut: 80.0, warn_rel: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub tau: f64,
    /// ||(Delta + s^2) v_s||_{L^2(M)}.
    pub residual: f64,
    /// ||v_s||_{L^2(M)}.
    pub norm: f64,
    /// Relative change of the residual under refinement.
    pub rel_error: f64,
    pub warnings: Vec<String>,
}

/// Sub-intervals of [-cap, cap] on which the ray at t lies in M.
fn m_intervals(fc: &FermiChart, t: f64, cap: f64) -> Vec<(f64, f64)> {
    let inside = |y: f64| fc.forward(t, y).map(|(x, _)| fc.chart.contains(x)).unwrap_or(false);
    let n = 48;
    let ys: Vec<f64> = (0..=n).map(|k| -cap + 2.0 * cap * k as f64 / n as f64).collect();
    let flags: Vec<bool> = ys.iter().map(|&y| inside(y)).collect();
    let refine = |mut a: f64, mut b: f64| {
        // a inside, b outside
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if inside(m) {
                a = m;
            } else {
                b = m;
            }
            if (b - a).abs() < 1e-14 {
                break;
            }
        }
        a
    };
    let mut out = Vec::new();
    let mut start = if flags[0] { Some(ys[0]) } else { None };
    for k in 1..=n {
        match (flags[k - 1], flags[k]) {
            (false, true) => start = Some(refine(ys[k], ys[k - 1])),
            (true, false) => {
                let end = refine(ys[k - 1], ys[k]);
                if let Some(s) = start.take() {
                    out.push((s, end));
                }
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, ys[n]));
    }
    out
}

/// L2(M) norms over the Fermi tube of the pair (u, r) returned by `f`,
/// integrated with dV = h dt dy. `width(t)` bounds the y-window.
#[allow(clippy::too_many_arguments)]
fn tube_quadrature<F, W>(
    fc: &FermiChart,
    t_breaks: &[f64],
    t_panel: f64,
    n_t: usize,
    py: f64,
    n_y: usize,
    width: &W,
    f: &F,
) -> Result<(f64, f64), BeamError>
where
    F: Fn(f64, f64, &FermiPoint) -> (C, C),
    W: Fn(f64) -> f64,
{
    let gt = GaussLegendre::new(n_t);
    let gy = GaussLegendre::new(n_y);
    let (mut su, mut sr) = (0.0, 0.0);
    for seg in t_breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) / t_panel).ceil().max(1.0) as usize;
        for (t, wt) in gt.composite(seg[0], seg[1], panels) {
            let cap = width(t);
            for (a, b) in m_intervals(fc, t, cap) {
                let panels_y = ((b - a) / py).ceil().max(1.0) as usize;
                let nodes = gy.composite(a, b, panels_y);
                let mut pos: Vec<(f64, f64)> = nodes.iter().copied().filter(|n| n.0 >= 0.0).collect();
                let mut neg: Vec<(f64, f64)> = nodes.iter().copied().filter(|n| n.0 < 0.0).collect();
                pos.sort_by(|p, q| p.0.total_cmp(&q.0));
                neg.sort_by(|p, q| q.0.total_cmp(&p.0));
                for side in [pos, neg] {
                    if side.is_empty() {
                        continue;
                    }
                    let ys: Vec<f64> = side.iter().map(|n| n.0).collect();
                    let pts = fc.ray_samples(t, &ys)?;
                    for ((y, wy), p) in side.iter().zip(&pts) {
                        let (u, r) = f(t, *y, p);
                        let w = wt * wy * p.h;
                        su += w * u.norm_sqr();
                        sr += w * r.norm_sqr();
                    }
                }
            }
        }
    }
    Ok((su.sqrt(), sr.sqrt()))
}

/// L2(M) norms of u and r over the tube around the chart axis, where
/// `f(t, y, point)` returns (u, r). The y-window at t is `width(t)`;
/// `scale` is the Gaussian length scale used to size panels. Returns
/// (||u||, ||r||, relative change of ||r|| under refinement).
pub fn tube_norms<F, W>(fc: &FermiChart, scale: f64, width: W, f: F, opts: &ResidualOptions) -> Result<(f64, f64, f64), BeamError>
where
    F: Fn(f64, f64, &FermiPoint) -> (C, C),
    W: Fn(f64) -> f64,
{
    let t0 = (-fc.path.t_in - fc.delta).max(fc.t_lo);
    let t1 = (fc.path.t_out + fc.delta).min(fc.t_hi);
    let mut breaks = vec![t0, -fc.path.t_in, 0.0, fc.path.t_out, t1];
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let t_panel = (4.0 * scale).min(0.25);
    let (u1, r1) = tube_quadrature(fc, &breaks, t_panel, opts.t_nodes, 1.5 * scale, opts.y_nodes, &width, &f)?;
    let (_, r2) = tube_quadrature(fc, &breaks, 0.5 * t_panel, opts.t_nodes, 0.75 * scale, opts.y_nodes, &width, &f)?;
    let rel = if r2 > 0.0 { (r1 - r2).abs() / r2 } else { (r1 - r2).abs() };
    Ok((u1, r2, rel))
}

/// ||(Delta + s^2) v_s|| and ||v_s|| over M for a beam at s = tau.
pub fn residual_norm(beam: &GaussianBeam, tau: f64, opts: &ResidualOptions) -> Result<ResidualReport, BeamError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(BeamError::Precondition(format!("tau must be positive, got {tau}")));
    }
    let s = C::from(tau);
    let fc = &beam.fermi;
    let imh_min = beam.riccati.min_im_h(400);
    let scale = 1.0 / (tau * imh_min).sqrt();
    let cut = opts.exponent_cut;
    let width = |t: f64| {
        let imh = beam.riccati.h_at(t).im.max(imh_min);
        (cut / (tau * imh)).sqrt().min(beam.delta())
    };
    let f = |t: f64, y: f64, p: &FermiPoint| {
        let v = beam.value_at(s, t, y, p);
        (v.value, v.residual)
    };
    let (norm, residual, rel) = tube_norms(fc, scale, width, f, opts)?;
    let mut warnings = Vec::new();
    if rel > opts.warn_rel {
        warnings.push(format!("residual quadrature at tau = {tau} changed by {:.2}% under refinement", 100.0 * rel));
    }
    Ok(ResidualReport { tau, residual, norm, rel_error: rel, warnings })
}
