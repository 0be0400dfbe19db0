//! Admissible geodesic pairs: the reflection of a covector through the
//! probe direction, the two parametrizations of the pair map
//! xi -> (omega_1, omega_2) with omega_1 + omega_2 = t_0 xi_hat (normal
//! coordinates and parallel transport), and the transported frame map.

use crate::geodesic::{self, Crossing, GeodesicError, GeodesicOptions, Transversality};
use crate::linalg::{self, Mat2, Vec2};
use crate::manifold::{contract, ChartMetric, GeometryError, PointedCovector};
use crate::ode;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("<zeta_1, xi_0> = {0} is outside (0, 1)")]
    Admissibility(f64),
    #[error("covector outside the valid neighborhood: {0}")]
    OutOfNeighborhood(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

/// Orthonormal coframe (F1, F2) at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coframe {
    pub base: Vec2,
    pub f1: Vec2,
    pub f2: Vec2,
}

impl Coframe {
    /// Positively oriented coframe whose first covector is `f1` (normalized).
    pub fn from_first(chart: &ChartMetric, base: Vec2, f1: Vec2) -> Result<Self, GeometryError> {
        let f1 = linalg::scale(1.0 / chart.covector_norm(base, f1)?, f1);
        let f2 = geodesic::orthogonal_covector(chart, base, f1)?;
        let f2 = if linalg::cross(f1, f2) > 0.0 { f2 } else { linalg::scale(-1.0, f2) };
        Ok(Coframe { base, f1, f2 })
    }

    /// max |g*(F_i, F_j) - delta_ij|.
    pub fn orthonormality_defect(&self, chart: &ChartMetric) -> Result<f64, GeometryError> {
        let d11 = chart.covector_dot(self.base, self.f1, self.f1)? - 1.0;
        let d22 = chart.covector_dot(self.base, self.f2, self.f2)? - 1.0;
        let d12 = chart.covector_dot(self.base, self.f1, self.f2)?;
        Ok(d11.abs().max(d22.abs()).max(d12.abs()))
    }

    pub fn is_positive(&self) -> bool {
        linalg::cross(self.f1, self.f2) > 0.0
    }
}

/// Reflection of the unit covector `zeta1` through `xi0` at `z`:
/// zeta2 = 2 <zeta1, xi0> xi0 - zeta1.
pub fn reflect_cov(chart: &ChartMetric, z: Vec2, zeta1: Vec2, xi0: Vec2) -> Result<Vec2, PairingError> {
    let q = chart.covector_dot(z, zeta1, xi0)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(PairingError::Admissibility(q));
    }
    Ok(linalg::sub(linalg::scale(2.0 * q, xi0), zeta1))
}

/// Exponential map at `z0` in the coordinates of an orthonormal frame,
/// evaluated with fixed-step RK4 so that it is smooth in its argument.
#[derive(Debug, Clone, Copy)]
pub struct ExpChart {
    pub chart: ChartMetric,
    pub z0: Vec2,
    /// Columns are the orthonormal frame vectors e_1, e_2 at z0.
    pub frame: Mat2,
    /// Inverse of `frame`; its rows form the dual coframe.
    pub coframe: Mat2,
    pub steps: usize,
}

impl ExpChart {
    pub fn new(chart: &ChartMetric, z0: Vec2) -> Result<Self, GeometryError> {
        let g = chart.metric_at(z0)?;
        let frame = linalg::sym_inv_sqrt(&g);
        let coframe = linalg::inverse(&frame).ok_or(GeometryError::SingularMetric(z0[0], z0[1]))?;
        Ok(ExpChart { chart: *chart, z0, frame, coframe, steps: 128 })
    }

    /// Chart covector -> components in the orthonormal coframe at z0.
    pub fn to_orthonormal(&self, c: Vec2) -> Vec2 {
        linalg::vec_mat(c, &self.frame)
    }

    pub fn from_orthonormal(&self, c: Vec2) -> Vec2 {
        linalg::vec_mat(c, &self.coframe)
    }

    /// exp_{z0}(y^j e_j) and its Jacobian d x / d y.
    pub fn exp(&self, y: Vec2) -> Result<(Vec2, Mat2), GeometryError> {
        let v0 = linalg::mat_vec(&self.frame, y);
        let chart = &self.chart;
        // State: x, v, then d x/d y_j and d v/d y_j for j = 0, 1.
        let f = |_s: f64, st: &[f64; 12]| -> [f64; 12] {
            let x = [st[0], st[1]];
            if !chart.in_chart(x) {
                return [f64::NAN; 12];
            }
            let v = [st[2], st[3]];
            let (gam, dgam) = chart.christoffel_with_derivative(x);
            let acc = contract(&gam, v, v);
            let mut out = [0.0; 12];
            out[0] = v[0];
            out[1] = v[1];
            out[2] = -acc[0];
            out[3] = -acc[1];
            for j in 0..2 {
                let dx = [st[4 + 4 * j], st[5 + 4 * j]];
                let dv = [st[6 + 4 * j], st[7 + 4 * j]];
                let a1 = contract(&dgam[0], v, v);
                let a2 = contract(&dgam[1], v, v);
                let a3 = contract(&gam, v, dv);
                for k in 0..2 {
                    out[4 + 4 * j + k] = dv[k];
                    out[6 + 4 * j + k] = -(a1[k] * dx[0] + a2[k] * dx[1]) - 2.0 * a3[k];
                }
            }
            out
        };
        let mut y0 = [0.0; 12];
        y0[0] = self.z0[0];
        y0[1] = self.z0[1];
        y0[2] = v0[0];
        y0[3] = v0[1];
        for j in 0..2 {
            y0[6 + 4 * j] = self.frame[0][j];
            y0[7 + 4 * j] = self.frame[1][j];
        }
        let st = ode::rk4(&f, 0.0, y0, 1.0, self.steps);
        if st.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::OutsideChart(f64::NAN, f64::NAN));
        }
        Ok(([st[0], st[1]], [[st[4], st[8]], [st[5], st[9]]]))
    }

    /// Normal coordinates of `z` (inverse exponential map) and the Jacobian
    /// d x / d y there. Fails outside the exp-chart.
    pub fn inverse(&self, z: Vec2) -> Result<(Vec2, Mat2), PairingError> {
        let mut y = linalg::mat_vec(&self.coframe, linalg::sub(z, self.z0));
        for _ in 0..60 {
            let (x, jac) = self.exp(y)?;
            let r = linalg::sub(x, z);
            let inv = linalg::inverse(&jac)
                .filter(|_| linalg::det(&jac) > 1e-8 * linalg::det(&self.frame))
                .ok_or_else(|| PairingError::OutOfNeighborhood("exponential map is singular".into()))?;
            let step = linalg::mat_vec(&inv, r);
            y = linalg::sub(y, step);
            if linalg::norm(step) <= 1e-15 * (1.0 + linalg::norm(y)) {
                let (_, jac) = self.exp(y)?;
                return Ok((y, jac));
            }
        }
        Err(PairingError::OutOfNeighborhood(format!("inverse exponential map did not converge at ({}, {})", z[0], z[1])))
    }

    /// Matrix of covector parallel transport from z0 to exp(y) along
    /// s -> exp(s y): covector components c at z0 map to `P c`.
    pub fn transport(&self, y: Vec2) -> Result<Mat2, GeometryError> {
        let v0 = linalg::mat_vec(&self.frame, y);
        let chart = &self.chart;
        let f = |_s: f64, st: &[f64; 8]| -> [f64; 8] {
            let x = [st[0], st[1]];
            if !chart.in_chart(x) {
                return [f64::NAN; 8];
            }
            let v = [st[2], st[3]];
            let gam = chart.christoffel_at(x).expect("checked");
            let acc = contract(&gam, v, v);
            let mut out = [v[0], v[1], -acc[0], -acc[1], 0.0, 0.0, 0.0, 0.0];
            for col in 0..2 {
                let c = [st[4 + 2 * col], st[5 + 2 * col]];
                for k in 0..2 {
                    // dc_k/ds = Gamma^i_{jk} v^j c_i
                    let mut s = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            s += gam[i][j][k] * v[j] * c[i];
                        }
                    }
                    out[4 + 2 * col + k] = s;
                }
            }
            out
        };
        let y0 = [self.z0[0], self.z0[1], v0[0], v0[1], 1.0, 0.0, 0.0, 1.0];
        let st = ode::rk4(&f, 0.0, y0, 1.0, self.steps);
        if st.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::OutsideChart(f64::NAN, f64::NAN));
        }
        Ok([[st[4], st[6]], [st[5], st[7]]])
    }
}

/// Covector parallel transport along a stored geodesic from `t_from` to `t_to`.
pub fn parallel_transport(chart: &ChartMetric, path: &geodesic::GeodesicPath, t_from: f64, t_to: f64, c: Vec2) -> Result<Vec2, GeodesicError> {
    let f = |t: f64, st: &[f64; 2]| -> [f64; 2] {
        let (x, v) = path.state_at(t);
        let gam = match chart.christoffel_at(x) {
            Ok(g) => g,
            Err(_) => return [f64::NAN; 2],
        };
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *o += gam[i][j][k] * v[j] * st[i];
                }
            }
        }
        out
    };
    let opts = ode::AdaptiveOptions { rtol: 1e-12, atol: 1e-14, h_max: 0.02, ..Default::default() };
    let out = ode::integrate(&f, t_from, c, t_to, &[], &opts, |_, _, _, _| ode::StepControl::Continue)?;
    Ok(out.y)
}

/// Anchor data of the pair map around (z0, xi0).
#[derive(Debug, Clone)]
pub struct PairField {
    pub chart: ChartMetric,
    pub z0: Vec2,
    pub xi0: Vec2,
    pub zeta1: Vec2,
    pub zeta2: Vec2,
    pub t0: f64,
    pub exp_chart: ExpChart,
    /// zeta1 in the orthonormal coframe at z0 (the constants a_j).
    a: Vec2,
    /// Orientation of (zeta_1, xi_0); omega_1 stays on this side of xi.
    side: f64,
    /// Radius of the validated neighborhood in S*M (base distance and
    /// fiber angle combined in quadrature).
    pub radius: f64,
}

/// Smallest allowed 1 - <gamma, omega>^2 before declaring degeneracy.
const DEGENERACY_MARGIN: f64 = 1e-6;

impl PairField {
    pub fn build(chart: &ChartMetric, z0: Vec2, xi0: Vec2, zeta1: Vec2) -> Result<Self, PairingError> {
        if !chart.contains(z0) || !chart.in_chart(z0) {
            return Err(PairingError::Precondition(format!("anchor ({}, {}) is not in M", z0[0], z0[1])));
        }
        let xi0 = linalg::scale(1.0 / chart.covector_norm(z0, xi0)?, xi0);
        let zeta1 = linalg::scale(1.0 / chart.covector_norm(z0, zeta1)?, zeta1);
        let zeta2 = reflect_cov(chart, z0, zeta1, xi0)?;
        let t0 = 2.0 * chart.covector_dot(z0, zeta1, xi0)?;
        let exp_chart = ExpChart::new(chart, z0)?;
        let a = exp_chart.to_orthonormal(zeta1);
        let side = linalg::cross(xi0, zeta1).signum();
        let mut field = PairField { chart: *chart, z0, xi0, zeta1, zeta2, t0, exp_chart, a, side, radius: 0.0 };
        field.radius = field.estimate_radius();
        Ok(field)
    }

    /// Covector at normal coordinates `y` obtained by transporting xi0
    /// rotated by `angle`; a chart of the neighborhood for sampling.
    pub fn covector_at(&self, y: Vec2, angle: f64) -> Result<PointedCovector, PairingError> {
        let (z, _) = self.exp_chart.exp(y)?;
        let rotated = linalg::mat_vec(&linalg::rotation(angle), self.exp_chart.to_orthonormal(self.xi0));
        let p = self.exp_chart.transport(y)?;
        let xi = linalg::mat_vec(&p, self.exp_chart.from_orthonormal(rotated));
        Ok(PointedCovector::new(&self.chart, z, xi)?)
    }

    /// gamma(z) = normalized a_j dy^j at z.
    fn gamma_at(&self, z: Vec2) -> Result<Vec2, PairingError> {
        let (_, jac) = self.exp_chart.inverse(z)?;
        let jinv = linalg::inverse(&jac).ok_or_else(|| PairingError::OutOfNeighborhood("singular normal chart".into()))?;
        let g = linalg::vec_mat(self.a, &jinv);
        Ok(linalg::scale(1.0 / self.chart.covector_norm(z, g)?, g))
    }

    fn check_base(&self, z: Vec2) -> Result<(), PairingError> {
        if !self.chart.in_chart(z) || !self.chart.contains(z) {
            return Err(PairingError::OutOfNeighborhood(format!("base point ({}, {}) outside M", z[0], z[1])));
        }
        Ok(())
    }

    /// Normal-coordinate construction of (omega_1, omega_2) at xi.
    pub fn pair_map(&self, xi: &PointedCovector) -> Result<(Vec2, Vec2), PairingError> {
        self.check_base(xi.z)?;
        let chart = &self.chart;
        let z = xi.z;
        let w = xi.unit().xi;
        let gamma = self.gamma_at(z)?;
        let p = chart.covector_dot(z, gamma, w)?;
        if 1.0 - p * p < DEGENERACY_MARGIN {
            return Err(PairingError::OutOfNeighborhood(format!("<gamma(z), omega>^2 = {} is degenerate", p * p)));
        }
        if linalg::cross(w, gamma) * self.side <= 0.0 {
            return Err(PairingError::OutOfNeighborhood("omega has crossed gamma(z)".into()));
        }
        let q = 0.5 * self.t0;
        let c = q * ((1.0 - p * p) / (1.0 - q * q)).sqrt();
        let num = linalg::add(linalg::sub(gamma, linalg::scale(p, w)), linalg::scale(c, w));
        let omega1 = linalg::scale(1.0 / (1.0 - p * p + c * c).sqrt(), num);
        let s = chart.covector_dot(z, omega1, w)?;
        let omega2 = linalg::sub(linalg::scale(2.0 * s, w), omega1);
        Ok((omega1, omega2))
    }

    /// Rotation angle (orthonormal components at z0) taking xi0 to the
    /// transported direction, and the transport matrix.
    fn transported_rotation(&self, xi: &PointedCovector) -> Result<(f64, Mat2), PairingError> {
        self.check_base(xi.z)?;
        let (y, _) = self.exp_chart.inverse(xi.z)?;
        let p = self.exp_chart.transport(y)?;
        let pinv = linalg::inverse(&p).ok_or_else(|| PairingError::OutOfNeighborhood("singular transport".into()))?;
        let back = self.exp_chart.to_orthonormal(linalg::mat_vec(&pinv, xi.unit().xi));
        let x0 = self.exp_chart.to_orthonormal(self.xi0);
        let angle = linalg::cross(x0, back).atan2(linalg::dot(x0, back));
        if angle.abs() > PI - 1e-9 {
            return Err(PairingError::OutOfNeighborhood("transported covector is antipodal to xi0".into()));
        }
        Ok((angle, p))
    }

    /// Parallel-transport construction of (omega_1, omega_2) at xi. In two
    /// dimensions span(zeta_1, zeta_2) is the whole cotangent plane, so the
    /// orthogonal part vanishes and the map is a transported rotation.
    pub fn pair_map_pt(&self, xi: &PointedCovector) -> Result<(Vec2, Vec2), PairingError> {
        let (angle, p) = self.transported_rotation(xi)?;
        let rot = linalg::rotation(angle);
        let map = |zeta: Vec2| {
            let r = linalg::mat_vec(&rot, self.exp_chart.to_orthonormal(zeta));
            linalg::mat_vec(&p, self.exp_chart.from_orthonormal(r))
        };
        Ok((map(self.zeta1), map(self.zeta2)))
    }

    /// Whether both constructions are well defined at `xi`.
    pub fn is_valid(&self, xi: &PointedCovector) -> bool {
        self.pair_map(xi).is_ok() && self.transported_rotation(xi).is_ok()
    }

    /// Bisection on the largest radius r such that every probe covector on
    /// the sphere of radius r (base distance and fiber angle) is valid.
    fn estimate_radius(&self) -> f64 {
        let z_norm = linalg::norm(self.z0);
        let scale = self.chart.conformal_factor(self.z0).sqrt();
        let r_max = ((self.chart.radius - z_norm) * scale).clamp(0.0, PI / 2.0);
        let valid_at = |r: f64| -> bool {
            let splits = [(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (FRAC_1_SQRT_2, FRAC_1_SQRT_2), (FRAC_1_SQRT_2, -FRAC_1_SQRT_2)];
            for k in 0..8 {
                let beta = PI * k as f64 / 4.0;
                for (rb, ra) in splits {
                    if rb == 0.0 && k > 0 {
                        continue;
                    }
                    let y = [r * rb * beta.cos(), r * rb * beta.sin()];
                    match self.covector_at(y, r * ra) {
                        Ok(xi) if self.is_valid(&xi) => {}
                        _ => return false,
                    }
                }
            }
            true
        };
        if valid_at(r_max) {
            return r_max;
        }
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if valid_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Transported frame: xi is moved to the base of `f0`, `f0` is rotated so
/// that its first covector matches, and the frame is moved back.
pub fn frame_map(chart: &ChartMetric, f0: &Coframe, xi: &PointedCovector) -> Result<Coframe, PairingError> {
    let ec = ExpChart::new(chart, f0.base)?;
    let (y, _) = ec.inverse(xi.z)?;
    let p = ec.transport(y)?;
    let pinv = linalg::inverse(&p).ok_or_else(|| PairingError::OutOfNeighborhood("singular transport".into()))?;
    let back = ec.to_orthonormal(linalg::mat_vec(&pinv, xi.unit().xi));
    let first = ec.to_orthonormal(f0.f1);
    let angle = linalg::cross(first, back).atan2(linalg::dot(first, back));
    if angle.abs() > PI - 1e-9 {
        return Err(PairingError::OutOfNeighborhood("transported covector is antipodal to F0_1".into()));
    }
    let rot = linalg::rotation(angle);
    let map = |c: Vec2| linalg::mat_vec(&p, ec.from_orthonormal(linalg::mat_vec(&rot, ec.to_orthonormal(c))));
    Ok(Coframe { base: xi.z, f1: map(f0.f1), f2: map(f0.f2) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleVerdict {
    pub admissible: bool,
    pub transversality: [Transversality; 2],
    /// All crossings found between the two geodesics (including the base point).
    pub crossings: Vec<Crossing>,
}

/// Both geodesics through `z` (codirections omega_1, omega_2) must be
/// nontangential and meet only at z.
pub fn admissible_check(chart: &ChartMetric, z: Vec2, omega1: Vec2, omega2: Vec2, opts: &GeodesicOptions) -> Result<AdmissibleVerdict, PairingError> {
    let n1 = chart.covector_norm(z, omega1)?;
    let n2 = chart.covector_norm(z, omega2)?;
    let w1 = linalg::scale(1.0 / n1, omega1);
    let w2 = linalg::scale(1.0 / n2, omega2);
    if chart.covector_norm(z, linalg::sub(w1, w2))? < 1e-9 {
        return Err(PairingError::Precondition("omega_1 and omega_2 coincide".into()));
    }
    let p1 = geodesic::shoot(chart, z, w1, opts)?;
    let p2 = geodesic::shoot(chart, z, w2, opts)?;
    let tr = [geodesic::nontangential_check(&p1, opts.angle_min), geodesic::nontangential_check(&p2, opts.angle_min)];
    let crossings = geodesic::cross_scan(chart, &p1, &p2, opts.eps_x);
    let only_base = crossings.len() == 1 && crossings[0].t_a.abs() < 1e-6 && crossings[0].t_b.abs() < 1e-6;
    Ok(AdmissibleVerdict { admissible: tr[0].nontangential && tr[1].nontangential && only_base, transversality: tr, crossings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::MetricFamily;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn reflection_example() {
        let c = ChartMetric::euclidean(1.0);
        let z2 = reflect_cov(&c, [0.0, 0.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2], [1.0, 0.0]).unwrap();
        assert!((z2[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (z2[1] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(reflect_cov(&c, [0.0, 0.0], [0.0, 1.0], [1.0, 0.0]).is_err());
    }

    #[test]
    fn exp_chart_round_trip_on_bump() {
        let c = ChartMetric::new(MetricFamily::ConformalBump { amplitude: 0.3, center: [0.2, 0.1], width: 0.4 }, 1.0).unwrap();
        let ec = ExpChart::new(&c, [0.1, -0.2]).unwrap();
        let (x, jac) = ec.exp([0.3, 0.2]).unwrap();
        let (y, _) = ec.inverse(x).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-12 && (y[1] - 0.2).abs() < 1e-12);
        let h = 1e-6;
        let (xp, _) = ec.exp([0.3 + h, 0.2]).unwrap();
        let (xm, _) = ec.exp([0.3 - h, 0.2]).unwrap();
        assert!(((xp[0] - xm[0]) / (2.0 * h) - jac[0][0]).abs() < 1e-8);
        assert!(((xp[1] - xm[1]) / (2.0 * h) - jac[1][0]).abs() < 1e-8);
    }

    #[test]
    fn anchor_maps_to_seed_pair() {
        let c = ChartMetric::euclidean(1.0);
        let f = PairField::build(&c, [0.0, 0.0], [1.0, 0.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert!((f.t0 - 2f64.sqrt()).abs() < 1e-15);
        let xi = PointedCovector::new(&c, [0.0, 0.0], [1.0, 0.0]).unwrap();
        let (w1, w2) = f.pair_map(&xi).unwrap();
        assert!(linalg::norm(linalg::sub(w1, f.zeta1)) < 1e-14);
        assert!(linalg::norm(linalg::sub(w2, f.zeta2)) < 1e-14);
        assert!(f.radius > 0.3);
    }
}
