//! Geodesic shooting to the boundary, transversality, Jacobi fields and the
//! regularity verdict used to decide whether a covector can be probed.

use crate::linalg::{self, Vec2};
use crate::manifold::{contract, ChartMetric, GeometryError};
use crate::ode::{self, AdaptiveOptions, OdeError, StepControl};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("start point ({0}, {1}) is not in the interior of M")]
    NotInterior(f64, f64),
    #[error("covector is not unit length (|xi|_g = {0})")]
    NotUnit(f64),
    #[error("geodesic trapped: no boundary exit within T_max = {0}")]
    Trapped(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step; also the sample spacing of the dense output.
    pub h_max: f64,
    /// Defaults to 10 times the metric diameter of M.
    pub t_max: Option<f64>,
    pub angle_min: f64,
    pub eps_x: f64,
    pub t_sep: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions { rtol: 1e-10, atol: 1e-12, h_max: 0.02, t_max: None, angle_min: 0.1, eps_x: 1e-6, t_sep: 1e-2 }
    }
}

impl GeodesicOptions {
    fn ode(&self) -> AdaptiveOptions {
        AdaptiveOptions { rtol: self.rtol, atol: self.atol, h_max: self.h_max, h_init: 1e-3, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub x: Vec2,
    pub v: Vec2,
    pub a: Vec2,
}

/// Unit-speed geodesic on [-t_in, t_out] with endpoints on the boundary.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    samples: Vec<PathSample>,
    pub t_in: f64,
    pub t_out: f64,
    /// Angle between the velocity and the boundary tangent at -t_in.
    pub entry_angle: f64,
    /// Same at t_out.
    pub exit_angle: f64,
    pub rtol: f64,
}

fn geodesic_rhs(chart: &ChartMetric) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |_t, y| {
        let x = [y[0], y[1]];
        if !chart.in_chart(x) {
            return [f64::NAN; 4];
        }
        let gam = chart.christoffel_at(x).expect("checked chart domain");
        let acc = contract(&gam, [y[2], y[3]], [y[2], y[3]]);
        [y[2], y[3], -acc[0], -acc[1]]
    }
}

fn acceleration(chart: &ChartMetric, x: Vec2, v: Vec2) -> Vec2 {
    match chart.christoffel_at(x) {
        Ok(gam) => linalg::scale(-1.0, contract(&gam, v, v)),
        Err(_) => [f64::NAN; 2],
    }
}

/// Angle between the vector `v` at boundary point `x` and the boundary tangent.
pub fn boundary_angle(chart: &ChartMetric, x: Vec2, v: Vec2) -> Result<f64, GeometryError> {
    let db = chart.boundary_grad(x);
    let s = linalg::dot(db, v).abs() / (chart.covector_norm(x, db)? * chart.vector_norm(x, v)?);
    Ok(s.min(1.0).asin())
}

/// Integrate forward in time until the boundary is crossed. Returns the
/// accepted samples (starting with the initial state) and the exit state.
fn run_to_boundary(chart: &ChartMetric, z: Vec2, v0: Vec2, opts: &GeodesicOptions, t_max: f64) -> Result<Vec<PathSample>, GeodesicError> {
    let f = geodesic_rhs(chart);
    let y0 = [z[0], z[1], v0[0], v0[1]];
    let mut samples = vec![PathSample { t: 0.0, x: z, v: v0, a: acceleration(chart, z, v0) }];
    let mut crossing: Option<(f64, [f64; 4], f64)> = None;
    let out = ode::integrate(&f, 0.0, y0, t_max, &[], &opts.ode(), |t0, y_prev, t1, y| {
        let x = [y[0], y[1]];
        if chart.boundary(x) > 0.0 {
            crossing = Some((t0, *y_prev, t1 - t0));
            StepControl::Stop
        } else {
            samples.push(PathSample { t: t1, x, v: [y[2], y[3]], a: acceleration(chart, x, [y[2], y[3]]) });
            StepControl::Continue
        }
    })?;
    let Some((t_prev, y_prev, h)) = crossing else {
        debug_assert!(!out.stopped);
        return Err(GeodesicError::Trapped(t_max));
    };
    // Bisection on the step length using genuine single RK steps.
    let b_at = |s: f64| {
        let (y, _) = ode::dopri5_step(&f, t_prev, &y_prev, s);
        (chart.boundary([y[0], y[1]]), y)
    };
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if b_at(mid).0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let (_, y) = b_at(s);
    let x = [y[0], y[1]];
    let t_exit = t_prev + s;
    if let Some(last) = samples.last() {
        if t_exit - last.t < 1e-12 {
            samples.pop();
        }
    }
    samples.push(PathSample { t: t_exit, x, v: [y[2], y[3]], a: acceleration(chart, x, [y[2], y[3]]) });
    Ok(samples)
}

/// Shoot the geodesic through `z` with initial codirection `xi_hat` (unit
/// covector) forward and backward to the boundary.
pub fn shoot(chart: &ChartMetric, z: Vec2, xi_hat: Vec2, opts: &GeodesicOptions) -> Result<GeodesicPath, GeodesicError> {
    if !chart.in_chart(z) || chart.boundary(z) >= 0.0 {
        return Err(GeodesicError::NotInterior(z[0], z[1]));
    }
    let n = chart.covector_norm(z, xi_hat)?;
    if (n - 1.0).abs() > 1e-9 {
        return Err(GeodesicError::NotUnit(n));
    }
    let v0 = chart.raise(z, xi_hat)?;
    let t_max = opts.t_max.unwrap_or_else(|| 10.0 * chart.diameter_estimate());
    let fwd = run_to_boundary(chart, z, v0, opts, t_max)?;
    let bwd = run_to_boundary(chart, z, linalg::scale(-1.0, v0), opts, t_max)?;
    let mut samples: Vec<PathSample> =
        bwd.iter().skip(1).rev().map(|s| PathSample { t: -s.t, x: s.x, v: linalg::scale(-1.0, s.v), a: s.a }).collect();
    samples.extend(fwd.iter().copied());
    let first = samples[0];
    let last = *samples.last().unwrap();
    Ok(GeodesicPath {
        t_in: -first.t,
        t_out: last.t,
        entry_angle: boundary_angle(chart, first.x, first.v)?,
        exit_angle: boundary_angle(chart, last.x, last.v)?,
        samples,
        rtol: opts.rtol,
    })
}

impl GeodesicPath {
    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    pub fn start(&self) -> Vec2 {
        self.state_at(0.0).0
    }

    /// Position and velocity at time `t` (quintic Hermite interpolation of
    /// the dense samples, clamped to the path domain).
    pub fn state_at(&self, t: f64) -> (Vec2, Vec2) {
        let t = t.clamp(-self.t_in, self.t_out);
        let s = &self.samples;
        let k = match s.binary_search_by(|p| p.t.partial_cmp(&t).unwrap()) {
            Ok(i) => return (s[i].x, s[i].v),
            Err(i) => i.clamp(1, s.len() - 1),
        };
        let (p0, p1) = (&s[k - 1], &s[k]);
        let h = p1.t - p0.t;
        let u = (t - p0.t) / h;
        let mut x = [0.0; 2];
        let mut v = [0.0; 2];
        let (b, db) = quintic_hermite_basis(u);
        for i in 0..2 {
            let coeffs = [p0.x[i], h * p0.v[i], h * h * p0.a[i], p1.x[i], h * p1.v[i], h * h * p1.a[i]];
            x[i] = (0..6).map(|j| b[j] * coeffs[j]).sum();
            v[i] = (0..6).map(|j| db[j] * coeffs[j]).sum::<f64>() / h;
        }
        (x, v)
    }

    /// Largest |speed - 1| over the samples.
    pub fn speed_drift(&self, chart: &ChartMetric) -> f64 {
        self.samples.iter().map(|p| chart.vector_norm(p.x, p.v).map(|n| (n - 1.0).abs()).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }
}

/// Basis values and derivatives (w.r.t. u) for quintic Hermite data
/// (f0, f0', f0''/..., f1, f1', f1'') where derivative data are pre-scaled by h.
fn quintic_hermite_basis(u: f64) -> ([f64; 6], [f64; 6]) {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let b = [
        1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
        u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
        0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5,
        10.0 * u3 - 15.0 * u4 + 6.0 * u5,
        -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
        0.5 * u3 - u4 + 0.5 * u5,
    ];
    let db = [
        -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
        1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
        u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4,
        30.0 * u2 - 60.0 * u3 + 30.0 * u4,
        -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
        1.5 * u2 - 4.0 * u3 + 2.5 * u4,
    ];
    (b, db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transversality {
    pub entry_angle: f64,
    pub exit_angle: f64,
    pub nontangential: bool,
}

/// Boundary angles of the path; nontangential iff both are >= `angle_min`.
pub fn nontangential_check(path: &GeodesicPath, angle_min: f64) -> Transversality {
    Transversality {
        entry_angle: path.entry_angle,
        exit_angle: path.exit_angle,
        nontangential: path.entry_angle >= angle_min && path.exit_angle >= angle_min,
    }
}

/// Zeros (t != 0) of the normal Jacobi field j'' + K(gamma(t)) j = 0 with
/// j(0) = 0, j'(0) = 1 on [-t_in, t_out], sorted by t.
pub fn jacobi_scan(chart: &ChartMetric, path: &GeodesicPath) -> Result<Vec<f64>, GeodesicError> {
    let f = |t: f64, y: &[f64; 2]| {
        let (x, _) = path.state_at(t);
        [y[1], -chart.curvature_unchecked(x) * y[0]]
    };
    let opts = AdaptiveOptions { rtol: 1e-12, atol: 1e-14, h_max: 0.05, h_init: 1e-3, max_steps: 5_000_000 };
    let mut roots = Vec::new();
    for (t_end, sign) in [(path.t_out, 1.0), (-path.t_in, -1.0)] {
        if t_end == 0.0 {
            continue;
        }
        let mut brackets = Vec::new();
        ode::integrate(&f, 0.0, [0.0, sign], t_end, &[], &opts, |t0, y0, _t1, y1| {
            if t0 != 0.0 && ((y0[0] != 0.0 && y0[0].signum() != y1[0].signum()) || y1[0] == 0.0) {
                brackets.push((t0, *y0, _t1 - t0));
            }
            StepControl::Continue
        })?;
        for (t0, y0, h) in brackets {
            let val = |s: f64| ode::dopri5_step(&f, t0, &y0, s).0[0];
            let s0 = y0[0].signum();
            let (mut lo, mut hi) = (0.0f64, h);
            for _ in 0..200 {
                if (hi - lo).abs() <= 1e-14 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if val(mid).signum() == s0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(t0 + 0.5 * (lo + hi));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub t_a: f64,
    pub t_b: f64,
    pub distance: f64,
}

fn segment_distance(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> (f64, f64, f64) {
    // Closest points between two segments; returns (distance, s, u) with
    // parameters in [0, 1].
    let d1 = linalg::sub(p1, p0);
    let d2 = linalg::sub(q1, q0);
    let r = linalg::sub(p0, q0);
    let a = linalg::dot(d1, d1);
    let e = linalg::dot(d2, d2);
    let f = linalg::dot(d2, r);
    let (mut s, mut u);
    if a <= 1e-300 && e <= 1e-300 {
        return (linalg::norm(r), 0.0, 0.0);
    }
    if a <= 1e-300 {
        s = 0.0;
        u = (f / e).clamp(0.0, 1.0);
    } else {
        let c = linalg::dot(d1, r);
        if e <= 1e-300 {
            u = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = linalg::dot(d1, d2);
            let denom = a * e - b * b;
            s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            u = (b * s + f) / e;
            if u < 0.0 {
                u = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if u > 1.0 {
                u = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let cp = linalg::axpy(s, d1, p0);
    let cq = linalg::axpy(u, d2, q0);
    (linalg::norm(linalg::sub(cp, cq)), s, u)
}

/// Local minimizer of |a(t) - b(u)|, starting from (t, u).
fn refine_crossing(chart: &ChartMetric, a: &GeodesicPath, b: &GeodesicPath, mut t: f64, mut u: f64) -> (f64, f64, f64) {
    let clamp_a = |t: f64| t.clamp(-a.t_in, a.t_out);
    let clamp_b = |u: f64| u.clamp(-b.t_in, b.t_out);
    for _ in 0..50 {
        let (xa, va) = a.state_at(t);
        let (xb, vb) = b.state_at(u);
        let r = linalg::sub(xa, xb);
        let jac = [[va[0], -vb[0]], [va[1], -vb[1]]];
        let d = linalg::det(&jac);
        let (dt, du) = if d.abs() > 1e-10 * linalg::norm(va) * linalg::norm(vb) {
            let inv = linalg::inverse(&jac).unwrap();
            let step = linalg::mat_vec(&inv, r);
            (step[0], step[1])
        } else {
            // Nearly parallel: Gauss-Newton on the squared distance.
            let ga = linalg::dot(r, va);
            let gb = -linalg::dot(r, vb);
            (ga / linalg::dot(va, va).max(1e-300) * 0.5, gb / linalg::dot(vb, vb).max(1e-300) * 0.5)
        };
        let (t_new, u_new) = (clamp_a(t - dt), clamp_b(u - du));
        let moved = (t_new - t).abs() + (u_new - u).abs();
        t = t_new;
        u = u_new;
        if moved < 1e-15 {
            break;
        }
    }
    let (xa, _) = a.state_at(t);
    let (xb, _) = b.state_at(u);
    let dist = chart.vector_norm(xa, linalg::sub(xa, xb)).unwrap_or(f64::INFINITY);
    (t, u, dist)
}

fn scan_pairs(chart: &ChartMetric, a: &GeodesicPath, b: &GeodesicPath, same: bool, eps_x: f64, t_sep: f64) -> Vec<Crossing> {
    let sa = a.samples();
    let sb = b.samples();
    let mut found: Vec<Crossing> = Vec::new();
    for i in 0..sa.len() - 1 {
        let (p0, p1) = (sa[i].x, sa[i + 1].x);
        let la = linalg::norm(linalg::sub(p1, p0));
        let j_start = if same { i + 2 } else { 0 };
        for j in j_start..sb.len().saturating_sub(1) {
            if same && sb[j + 1].t - sa[i].t <= t_sep {
                continue;
            }
            let (q0, q1) = (sb[j].x, sb[j + 1].x);
            let lb = linalg::norm(linalg::sub(q1, q0));
            let tol = eps_x + 0.5 * (la + lb);
            // Cheap bounding-box rejection.
            if p0[0].min(p1[0]) > q0[0].max(q1[0]) + tol
                || q0[0].min(q1[0]) > p0[0].max(p1[0]) + tol
                || p0[1].min(p1[1]) > q0[1].max(q1[1]) + tol
                || q0[1].min(q1[1]) > p0[1].max(p1[1]) + tol
            {
                continue;
            }
            let (d, s, u) = segment_distance(p0, p1, q0, q1);
            if d >= tol {
                continue;
            }
            let t0 = sa[i].t + s * (sa[i + 1].t - sa[i].t);
            let u0 = sb[j].t + u * (sb[j + 1].t - sb[j].t);
            let (t, u, dist) = refine_crossing(chart, a, b, t0, u0);
            if dist >= eps_x {
                continue;
            }
            if same && (t - u).abs() <= t_sep {
                continue;
            }
            let (t, u) = if same && t > u { (u, t) } else { (t, u) };
            if !found.iter().any(|c| (c.t_a - t).abs() < 1e-7 && (c.t_b - u).abs() < 1e-7) {
                found.push(Crossing { t_a: t, t_b: u, distance: dist });
            }
        }
    }
    found.sort_by(|x, y| x.t_a.partial_cmp(&y.t_a).unwrap().then(x.t_b.partial_cmp(&y.t_b).unwrap()));
    found
}

/// Self-crossings (t, t') of a path with |t - t'| > t_sep.
pub fn self_intersection_scan(chart: &ChartMetric, path: &GeodesicPath, eps_x: f64, t_sep: f64) -> Vec<Crossing> {
    scan_pairs(chart, path, path, true, eps_x, t_sep)
}

/// All crossings between two different paths.
pub fn cross_scan(chart: &ChartMetric, a: &GeodesicPath, b: &GeodesicPath, eps_x: f64) -> Vec<Crossing> {
    scan_pairs(chart, a, b, false, eps_x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuFailure {
    Tangential,
    ConjugatePoint,
    SelfIntersection,
}

impl SuFailure {
    pub fn label(&self) -> &'static str {
        match self {
            SuFailure::Tangential => "tangential",
            SuFailure::ConjugatePoint => "conjugate-point",
            SuFailure::SelfIntersection => "self-intersection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    pub xi: Vec2,
    pub failures: Vec<SuFailure>,
    pub trapped: bool,
    pub conjugate_times: Vec<f64>,
    pub crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuVerdict {
    pub pass: bool,
    pub witness: Option<Vec2>,
    pub reasons: Vec<SuFailure>,
    pub conjugate_times: Vec<f64>,
    pub candidates: Vec<CandidateReport>,
}

/// Unit covector g*-orthogonal to `eta` at `z`, positively oriented.
pub fn orthogonal_covector(chart: &ChartMetric, z: Vec2, eta: Vec2) -> Result<Vec2, GeometryError> {
    let w = chart.raise(z, eta)?;
    let xi = [-w[1], w[0]];
    let n = chart.covector_norm(z, xi)?;
    Ok(linalg::scale(1.0 / n, xi))
}

/// Run the regularity checks on a single codirection.
pub fn check_candidate(chart: &ChartMetric, z: Vec2, xi: Vec2, opts: &GeodesicOptions) -> Result<CandidateReport, GeodesicError> {
    let mut report = CandidateReport { xi, failures: Vec::new(), trapped: false, conjugate_times: Vec::new(), crossings: Vec::new() };
    let path = match shoot(chart, z, xi, opts) {
        Ok(p) => p,
        Err(GeodesicError::Trapped(_)) | Err(GeodesicError::Integration(_)) => {
            report.trapped = true;
            report.failures.push(SuFailure::Tangential);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    if !nontangential_check(&path, opts.angle_min).nontangential {
        report.failures.push(SuFailure::Tangential);
    }
    report.conjugate_times = jacobi_scan(chart, &path)?;
    if !report.conjugate_times.is_empty() {
        report.failures.push(SuFailure::ConjugatePoint);
    }
    report.crossings = self_intersection_scan(chart, &path, opts.eps_x, opts.t_sep);
    if !report.crossings.is_empty() {
        report.failures.push(SuFailure::SelfIntersection);
    }
    Ok(report)
}

/// Regularity verdict at (z, eta): passes iff one of the covectors
/// orthogonal to `eta` gives a nontangential geodesic without points
/// conjugate to z and without self-intersections. `n_dir` = 1 tests only
/// the positively oriented orthogonal covector, otherwise both signs.
pub fn su_check(chart: &ChartMetric, z: Vec2, eta: Vec2, n_dir: usize, opts: &GeodesicOptions) -> Result<SuVerdict, GeodesicError> {
    if !chart.in_chart(z) || chart.boundary(z) >= 0.0 {
        return Err(GeodesicError::NotInterior(z[0], z[1]));
    }
    let n = chart.covector_norm(z, eta)?;
    if (n - 1.0).abs() > 1e-9 {
        return Err(GeodesicError::NotUnit(n));
    }
    let perp = orthogonal_covector(chart, z, eta)?;
    let mut candidates = Vec::new();
    for sign in [1.0, -1.0].iter().take(n_dir.clamp(1, 2)) {
        candidates.push(check_candidate(chart, z, linalg::scale(*sign, perp), opts)?);
    }
    let witness = candidates.iter().find(|c| c.failures.is_empty()).map(|c| c.xi);
    let mut reasons: Vec<SuFailure> = Vec::new();
    let mut conjugate_times = Vec::new();
    if witness.is_none() {
        for c in &candidates {
            for f in &c.failures {
                if !reasons.contains(f) {
                    reasons.push(*f);
                }
            }
        }
        reasons.sort();
    }
    for c in &candidates {
        for &t in &c.conjugate_times {
            conjugate_times.push(t);
        }
    }
    conjugate_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SuVerdict { pass: witness.is_some(), witness, reasons, conjugate_times, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::MetricFamily;

    #[test]
    fn chord_through_center() {
        let c = ChartMetric::euclidean(1.0);
        let p = shoot(&c, [0.0, 0.0], [1.0, 0.0], &GeodesicOptions::default()).unwrap();
        assert!((p.t_in - 1.0).abs() < 1e-12 && (p.t_out - 1.0).abs() < 1e-12);
        assert!((p.entry_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn off_center_chord() {
        let c = ChartMetric::euclidean(1.0);
        let p = shoot(&c, [0.5, 0.0], [1.0, 0.0], &GeodesicOptions::default()).unwrap();
        assert!((p.t_out - 0.5).abs() < 1e-12 && (p.t_in - 1.5).abs() < 1e-12);
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: 1.0 }, 1.0).unwrap();
        let p = shoot(&c, [0.0, 0.0], [1.0, 0.0], &GeodesicOptions::default()).unwrap();
        // Radial geodesic of the stereographic chart: x(t) = 2 tan(t/2).
        for t in [-0.6, -0.1234, 0.3, 0.8] {
            let (x, v) = p.state_at(t);
            assert!((x[0] - 2.0 * (0.5 * t).tan()).abs() < 1e-10);
            assert!((v[0] - 1.0 / (0.5 * t).cos().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn non_unit_covector_rejected() {
        let c = ChartMetric::euclidean(1.0);
        assert!(matches!(shoot(&c, [0.0, 0.0], [2.0, 0.0], &GeodesicOptions::default()), Err(GeodesicError::NotUnit(_))));
        assert!(matches!(shoot(&c, [1.0, 0.0], [1.0, 0.0], &GeodesicOptions::default()), Err(GeodesicError::NotInterior(..))));
    }

    #[test]
    fn segment_distance_basic() {
        let (d, _, _) = segment_distance([0.0, 0.0], [1.0, 0.0], [0.5, -1.0], [0.5, 1.0]);
        assert!(d.abs() < 1e-15);
        let (d, _, _) = segment_distance([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]);
        assert!((d - 1.0).abs() < 1e-15);
    }
}
