use super::BeamError;
use crate::cheb::{lobatto_nodes, Chebyshev};
use crate::geodesic::GeodesicPath;
use crate::linalg::{self, Mat2, Vec2};
use crate::manifold::{contract, ChartMetric};
use crate::ode::{self, AdaptiveOptions};
use crate::pairing::Coframe;

/// Point of the Fermi chart with the data needed to differentiate there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiPoint {
    pub x: Vec2,
    /// Columns d x / d t and d x / d y.
    pub jac: Mat2,
    /// h = |d x / d t|_g and its partial derivatives.
    pub h: f64,
    pub h_t: f64,
    pub h_y: f64,
}

/// Pullback metric and its first derivatives on the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: Mat2,
    pub dg_dt: Mat2,
    pub dg_dy: Mat2,
}

/// Tubular coordinates (t, y) -> exp_{gamma(t)}(y E2(t)) along a geodesic.
#[derive(Debug, Clone)]
pub struct FermiChart {
    pub chart: ChartMetric,
    pub path: GeodesicPath,
    pub frame: Coframe,
    /// Tube half-width.
    pub delta: f64,
    /// Parameter range of the stored axis (path domain plus extension).
    pub t_lo: f64,
    pub t_hi: f64,
    orientation: f64,
    gx: [Chebyshev<f64>; 2],
    gv: [Chebyshev<f64>; 2],
    map_steps: usize,
    coarse: Vec<(f64, Vec2)>,
}

/// Oriented unit normal N(v) with g(N, v) = 0, |N|_g = |v|_g, det[v, N] > 0.
fn normal(chart: &ChartMetric, x: Vec2, v: Vec2) -> Vec2 {
    let g = chart.metric_at(x).expect("axis inside chart");
    let w = linalg::mat_vec(&g, v);
    linalg::scale(1.0 / linalg::det(&g).sqrt(), [-w[1], w[0]])
}

const AXIS_TAIL_TOL: f64 = 1e-13;
/// Tube points farther than this multiple of the disk radius are not checked.
const TUBE_CHECK_RADIUS: f64 = 1.02;

impl FermiChart {
    pub fn new(chart: &ChartMetric, path: &GeodesicPath, frame: &Coframe, delta: f64) -> Result<Self, BeamError> {
        let fc = Self::build_unchecked(chart, path, frame, delta)?;
        fc.validate_tube()?;
        Ok(fc)
    }

    /// Tube of half the largest working width, searching from 4R down.
    pub fn default_tube(chart: &ChartMetric, path: &GeodesicPath, frame: &Coframe) -> Result<Self, BeamError> {
        let largest = Self::with_largest_tube(chart, path, frame, 4.0 * chart.radius)?.delta;
        Self::new(chart, path, frame, 0.5 * largest)
    }

    /// Same as `new` with the tube half-width reduced (factor 0.8 per try)
    /// until the inverse map converges.
    pub fn with_largest_tube(chart: &ChartMetric, path: &GeodesicPath, frame: &Coframe, max_delta: f64) -> Result<Self, BeamError> {
        let mut delta = max_delta;
        for _ in 0..40 {
            match Self::new(chart, path, frame, delta) {
                Ok(fc) => return Ok(fc),
                Err(BeamError::ShrinkTube { largest }) if largest > 0.0 && largest < delta => delta = largest,
                Err(BeamError::ShrinkTube { .. }) => delta *= 0.8,
                Err(e) => return Err(e),
            }
        }
        Err(BeamError::ShrinkTube { largest: 0.0 })
    }

    fn build_unchecked(chart: &ChartMetric, path: &GeodesicPath, frame: &Coframe, delta: f64) -> Result<Self, BeamError> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(BeamError::Precondition(format!("tube half-width must be positive, got {delta}")));
        }
        let (z, v0) = path.state_at(0.0);
        if linalg::norm(linalg::sub(z, frame.base)) > 1e-10 {
            return Err(BeamError::Precondition("frame is not based at the path start".into()));
        }
        let co = chart.lower(z, v0)?;
        if chart.covector_norm(z, linalg::sub(co, frame.f1))? > 1e-8 {
            return Err(BeamError::Precondition("first frame covector differs from the path codirection".into()));
        }
        let orientation = if linalg::dot(frame.f2, normal(chart, z, v0)) >= 0.0 { 1.0 } else { -1.0 };
        let mut ext = 1.05 * delta;
        let mut last_err = None;
        for _ in 0..20 {
            let (t_lo, t_hi) = (-path.t_in - ext, path.t_out + ext);
            match fit_axis(chart, z, v0, t_lo, t_hi) {
                Ok((gx, gv)) => {
                    let mut fc = FermiChart {
                        chart: *chart,
                        path: path.clone(),
                        frame: *frame,
                        delta,
                        t_lo,
                        t_hi,
                        orientation,
                        gx,
                        gv,
                        map_steps: ((delta / 0.02).ceil() as usize).max(8),
                        coarse: Vec::new(),
                    };
                    let m = 400;
                    fc.coarse = (0..=m)
                        .map(|k| {
                            let t = t_lo + (t_hi - t_lo) * k as f64 / m as f64;
                            (t, fc.axis(t).0)
                        })
                        .collect();
                    return Ok(fc);
                }
                Err(e) => {
                    last_err = Some(e);
                    ext *= 0.5;
                }
            }
        }
        Err(last_err.unwrap())
    }

    fn validate_tube(&self) -> Result<(), BeamError> {
        let nt = 21;
        let ny = 5;
        let mut worst_ok = self.delta;
        let mut failed = false;
        for i in 0..nt {
            let t = -self.path.t_in + (self.path.t_in + self.path.t_out) * i as f64 / (nt - 1) as f64;
            for j in 1..=ny {
                for sgn in [-1.0, 1.0] {
                    let y = sgn * self.delta * j as f64 / ny as f64;
                    let image = self.forward(t, y);
                    // Only the part of the tube near M is ever evaluated.
                    if let Ok((x, _)) = image {
                        if linalg::norm(x) > TUBE_CHECK_RADIUS * self.chart.radius {
                            continue;
                        }
                    }
                    let ok = match image {
                        Ok((x, jac)) if linalg::det(&jac) * self.orientation > 0.0 => match self.inverse(x, None) {
                            Ok((t2, y2)) => (t2 - t).abs() < 1e-9 && (y2 - y).abs() < 1e-9,
                            Err(_) => false,
                        },
                        _ => false,
                    };
                    if !ok {
                        failed = true;
                        worst_ok = worst_ok.min(self.delta * (j - 1) as f64 / ny as f64);
                    }
                }
            }
        }
        if failed {
            return Err(BeamError::ShrinkTube { largest: worst_ok });
        }
        Ok(())
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Axis position, unit velocity and unit normal E2 at t.
    pub fn axis(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let x = [self.gx[0].eval(t), self.gx[1].eval(t)];
        let v = [self.gv[0].eval(t), self.gv[1].eval(t)];
        let e2 = linalg::scale(self.orientation, normal(&self.chart, x, v));
        (x, v, e2)
    }

    /// Degree of the axis interpolant.
    pub fn axis_degree(&self) -> usize {
        self.gx[0].degree()
    }

    fn initial_state(&self, t: f64) -> [f64; 12] {
        let (x, v, e2) = self.axis(t);
        let gam = self.chart.christoffel_at(x).expect("axis inside chart");
        let jd = linalg::scale(-1.0, contract(&gam, v, e2));
        [x[0], x[1], e2[0], e2[1], v[0], v[1], jd[0], jd[1], 1.0, 0.0, 0.0, 0.0]
    }

    fn ray_rhs(&self) -> impl Fn(f64, &[f64; 12]) -> [f64; 12] + '_ {
        let chart = &self.chart;
        move |_r, st| {
            let x = [st[0], st[1]];
            if !chart.in_chart(x) {
                return [f64::NAN; 12];
            }
            let v = [st[2], st[3]];
            let jv = [st[4], st[5]];
            let jd = [st[6], st[7]];
            let (gam, dgam) = chart.christoffel_with_derivative(x);
            let acc = contract(&gam, v, v);
            let a1 = contract(&dgam[0], v, v);
            let a2 = contract(&dgam[1], v, v);
            let a3 = contract(&gam, v, jd);
            let k = chart.curvature_unchecked(x);
            let dk = linalg::dot(chart.curvature_gradient(x), jv);
            [
                v[0],
                v[1],
                -acc[0],
                -acc[1],
                jd[0],
                jd[1],
                -(a1[0] * jv[0] + a2[0] * jv[1]) - 2.0 * a3[0],
                -(a1[1] * jv[0] + a2[1] * jv[1]) - 2.0 * a3[1],
                st[9],
                -k * st[8],
                st[11],
                -k * st[10] - st[8] * dk,
            ]
        }
    }

    fn point_from_state(st: &[f64; 12]) -> FermiPoint {
        FermiPoint { x: [st[0], st[1]], jac: [[st[4], st[2]], [st[5], st[3]]], h: st[8], h_y: st[9], h_t: st[10] }
    }

    fn flat_point(&self, t: f64, y: f64) -> FermiPoint {
        let (x, v, e2) = self.axis(t);
        FermiPoint { x: linalg::axpy(y, e2, x), jac: [[v[0], e2[0]], [v[1], e2[1]]], h: 1.0, h_t: 0.0, h_y: 0.0 }
    }

    fn check_t(&self, t: f64) -> Result<(), BeamError> {
        if t < self.t_lo - 1e-12 || t > self.t_hi + 1e-12 || !t.is_finite() {
            return Err(BeamError::Precondition(format!("t = {t} outside the axis range [{}, {}]", self.t_lo, self.t_hi)));
        }
        Ok(())
    }

    /// Forward map with the scalar Jacobi data, fixed-step RK4 (smooth in t, y).
    pub fn forward_full(&self, t: f64, y: f64) -> Result<FermiPoint, BeamError> {
        self.check_t(t)?;
        if self.chart.is_flat() {
            return Ok(self.flat_point(t, y));
        }
        let st = ode::rk4(&self.ray_rhs(), 0.0, self.initial_state(t), y, self.map_steps);
        if st.iter().any(|v| !v.is_finite()) {
            return Err(BeamError::InverseFailed(t, y));
        }
        Ok(Self::point_from_state(&st))
    }

    /// Forward map x(t, y) and its Jacobian.
    pub fn forward(&self, t: f64, y: f64) -> Result<(Vec2, Mat2), BeamError> {
        self.check_t(t)?;
        if self.chart.is_flat() {
            let p = self.flat_point(t, y);
            return Ok((p.x, p.jac));
        }
        let chart = &self.chart;
        let f = |_r: f64, st: &[f64; 8]| -> [f64; 8] {
            let x = [st[0], st[1]];
            if !chart.in_chart(x) {
                return [f64::NAN; 8];
            }
            let v = [st[2], st[3]];
            let jv = [st[4], st[5]];
            let jd = [st[6], st[7]];
            let (gam, dgam) = chart.christoffel_with_derivative(x);
            let acc = contract(&gam, v, v);
            let a1 = contract(&dgam[0], v, v);
            let a2 = contract(&dgam[1], v, v);
            let a3 = contract(&gam, v, jd);
            [
                v[0],
                v[1],
                -acc[0],
                -acc[1],
                jd[0],
                jd[1],
                -(a1[0] * jv[0] + a2[0] * jv[1]) - 2.0 * a3[0],
                -(a1[1] * jv[0] + a2[1] * jv[1]) - 2.0 * a3[1],
            ]
        };
        let s = self.initial_state(t);
        let y0 = [s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]];
        let st = ode::rk4(&f, 0.0, y0, y, self.map_steps);
        if st.iter().any(|v| !v.is_finite()) {
            return Err(BeamError::InverseFailed(t, y));
        }
        Ok(([st[0], st[1]], [[st[4], st[2]], [st[5], st[3]]]))
    }

    /// Accurate (adaptive) samples along the ray at fixed t for the given
    /// y values, which must be sorted moving away from 0 on one side.
    pub fn ray_samples(&self, t: f64, ys: &[f64]) -> Result<Vec<FermiPoint>, BeamError> {
        self.check_t(t)?;
        if self.chart.is_flat() {
            return Ok(ys.iter().map(|&y| self.flat_point(t, y)).collect());
        }
        let opts = AdaptiveOptions { rtol: 1e-13, atol: 1e-15, h_max: 0.05, h_init: 1e-3, max_steps: 1_000_000 };
        let states = ode::integrate_to_targets(&self.ray_rhs(), 0.0, self.initial_state(t), ys, &opts)?;
        Ok(states.iter().map(Self::point_from_state).collect())
    }

    /// Inverse map by Newton iteration; `guess` speeds up nearby queries.
    pub fn inverse(&self, x: Vec2, guess: Option<(f64, f64)>) -> Result<(f64, f64), BeamError> {
        let (mut t, mut y) = match guess {
            Some(g) => g,
            None => self.initial_guess(x),
        };
        let limit = 10.0 * self.delta;
        for _ in 0..40 {
            let (xf, jac) = self.forward(t, y).map_err(|_| BeamError::InverseFailed(x[0], x[1]))?;
            let inv = linalg::inverse(&jac).ok_or(BeamError::InverseFailed(x[0], x[1]))?;
            let step = linalg::mat_vec(&inv, linalg::sub(xf, x));
            let (tn, yn) = (t - step[0], y - step[1]);
            if !(tn.is_finite() && yn.is_finite()) || yn.abs() > limit {
                return Err(BeamError::InverseFailed(x[0], x[1]));
            }
            t = tn.clamp(self.t_lo, self.t_hi);
            y = yn;
            if step[0].abs() + step[1].abs() <= 1e-14 * (1.0 + t.abs() + y.abs()) {
                if tn != t {
                    return Err(BeamError::InverseFailed(x[0], x[1]));
                }
                return Ok((t, y));
            }
        }
        Err(BeamError::InverseFailed(x[0], x[1]))
    }

    fn initial_guess(&self, x: Vec2) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for &(t, p) in &self.coarse {
            let d = linalg::norm(linalg::sub(p, x));
            if d < best.0 {
                best = (d, t);
            }
        }
        let mut t = best.1;
        for _ in 0..8 {
            let (p, v, _) = self.axis(t);
            let dt = linalg::dot(linalg::sub(x, p), v) / linalg::dot(v, v);
            t = (t + dt).clamp(self.t_lo, self.t_hi);
            if dt.abs() < 1e-14 {
                break;
            }
        }
        let (p, _, e2) = self.axis(t);
        let g = self.chart.metric_at(p).expect("axis inside chart");
        (t, linalg::quad_form(&g, linalg::sub(x, p), e2))
    }

    /// Pullback metric J^T g J at (t, y).
    pub fn pullback_metric(&self, t: f64, y: f64) -> Result<Mat2, BeamError> {
        let (x, jac) = self.forward(t, y)?;
        let g = self.chart.metric_at(x)?;
        Ok(linalg::mat_mul(&linalg::transpose(&jac), &linalg::mat_mul(&g, &jac)))
    }

    /// Pullback metric and its first derivatives on the axis, by central
    /// differences of the forward map (Richardson-extrapolated).
    pub fn metric_jet(&self, t: f64) -> Result<MetricJet, BeamError> {
        let g = self.pullback_metric(t, 0.0)?;
        let d = |dt: f64, dy: f64, h: f64| -> Result<Mat2, BeamError> {
            let p = self.pullback_metric(t + dt * h, dy * h)?;
            let m = self.pullback_metric(t - dt * h, -dy * h)?;
            let mut out = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = (p[i][j] - m[i][j]) / (2.0 * h);
                }
            }
            Ok(out)
        };
        let rich = |dt: f64, dy: f64| -> Result<Mat2, BeamError> {
            let a = d(dt, dy, 1e-4)?;
            let b = d(dt, dy, 5e-5)?;
            let mut out = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = (4.0 * b[i][j] - a[i][j]) / 3.0;
                }
            }
            Ok(out)
        };
        Ok(MetricJet { g, dg_dt: rich(1.0, 0.0)?, dg_dy: rich(0.0, 1.0)? })
    }

    /// y-range [lo, hi] within `[-cap, cap]` of the ray at t that stays in M
    /// (the component containing y = 0, or None when gamma(t) is outside M).
    pub fn ray_extent_in_m(&self, t: f64, cap: f64) -> Result<Option<(f64, f64)>, BeamError> {
        let inside = |y: f64| -> Result<bool, BeamError> { Ok(self.chart.contains(self.forward(t, y)?.0)) };
        if !inside(0.0)? {
            return Ok(None);
        }
        let mut ends = [0.0; 2];
        for (k, sgn) in [-1.0f64, 1.0].iter().enumerate() {
            // March outward, then bisect the first exit.
            let n = 32;
            let mut prev = 0.0;
            let mut exit = None;
            for i in 1..=n {
                let y = sgn * cap * i as f64 / n as f64;
                match inside(y) {
                    Ok(true) => prev = y,
                    _ => {
                        exit = Some(y);
                        break;
                    }
                }
            }
            ends[k] = match exit {
                None => sgn * cap,
                Some(mut out) => {
                    let mut inn = prev;
                    for _ in 0..60 {
                        let mid = 0.5 * (inn + out);
                        if inside(mid).unwrap_or(false) {
                            inn = mid;
                        } else {
                            out = mid;
                        }
                    }
                    inn
                }
            };
        }
        Ok(Some((ends[0], ends[1])))
    }
}

/// Position and velocity of the axis, one series per coordinate.
type AxisFit = ([Chebyshev<f64>; 2], [Chebyshev<f64>; 2]);

fn fit_axis(chart: &ChartMetric, z: Vec2, v0: Vec2, t_lo: f64, t_hi: f64) -> Result<AxisFit, BeamError> {
    let f = |_t: f64, y: &[f64; 4]| -> [f64; 4] {
        let x = [y[0], y[1]];
        if !chart.in_chart(x) {
            return [f64::NAN; 4];
        }
        let gam = chart.christoffel_at(x).expect("checked");
        let a = contract(&gam, [y[2], y[3]], [y[2], y[3]]);
        [y[2], y[3], -a[0], -a[1]]
    };
    let opts = AdaptiveOptions { rtol: 1e-13, atol: 1e-15, h_max: 0.05, h_init: 1e-3, max_steps: 1_000_000 };
    let y0 = [z[0], z[1], v0[0], v0[1]];
    let mut n = 32;
    loop {
        let nodes = lobatto_nodes(n, t_lo, t_hi);
        // Nodes are descending; split into t >= 0 (ascending) and t < 0.
        let pos: Vec<f64> = nodes.iter().rev().copied().filter(|&t| t >= 0.0).collect();
        let neg: Vec<f64> = nodes.iter().copied().filter(|&t| t < 0.0).collect();
        let sp = ode::integrate_to_targets(&f, 0.0, y0, &pos, &opts)?;
        let sn = ode::integrate_to_targets(&f, 0.0, y0, &neg, &opts)?;
        let mut vals = vec![[0.0; 4]; n + 1];
        for (t, s) in pos.iter().zip(&sp) {
            let idx = nodes.iter().position(|u| u == t).unwrap();
            vals[idx] = *s;
        }
        for (t, s) in neg.iter().zip(&sn) {
            let idx = nodes.iter().position(|u| u == t).unwrap();
            vals[idx] = *s;
        }
        let comp = |i: usize| -> Chebyshev<f64> {
            let v: Vec<f64> = vals.iter().map(|s| s[i]).collect();
            Chebyshev::from_values(t_lo, t_hi, &v)
        };
        let gx = [comp(0), comp(1)];
        let gv = [comp(2), comp(3)];
        let tail = gx.iter().chain(gv.iter()).map(|c| c.relative_tail()).fold(0.0, f64::max);
        if tail < AXIS_TAIL_TOL || n >= 1024 {
            if tail >= 1e-10 {
                return Err(BeamError::Unresolved(tail));
            }
            return Ok((gx, gv));
        }
        n *= 2;
    }
}
