//! Planar charts carrying a Riemannian metric and a disk boundary.
//!
//! Every built-in family is conformally flat, `g = e^{2 phi} I`, so metric
//! jets, Christoffel symbols and the Gauss curvature have closed forms.
//! Finite-difference versions are kept for cross-checks.

use crate::linalg::{self, Mat2, Vec2};
use crate::quad::{CompensatedSum, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({0}, {1}) lies outside the chart domain")]
    OutsideChart(f64, f64),
    #[error("metric is singular at ({0}, {1})")]
    SingularMetric(f64, f64),
    #[error("invalid metric parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricFamily {
    Euclidean,
    /// Stereographic chart `phi = -ln(1 + K r^2 / 4)`: curvature K, g(0) = I.
    ConstantCurvature {
        curvature: f64,
    },
    /// `phi = amplitude * exp(-|x - center|^2 / width^2)`.
    ConformalBump {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
}

/// Conformal factor exponent with derivatives up to order 2.
#[derive(Debug, Clone, Copy)]
pub struct PhiJet {
    pub phi: f64,
    pub grad: Vec2,
    pub hess: Mat2,
}

/// `Gamma[k][i][j]`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartMetric {
    pub family: MetricFamily,
    /// Boundary `b(x) = |x|^2 - R^2`.
    pub radius: f64,
}

/// A covector `xi` based at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointedCovector {
    pub z: Vec2,
    pub xi: Vec2,
    pub norm: f64,
}

impl PointedCovector {
    pub fn new(chart: &ChartMetric, z: Vec2, xi: Vec2) -> Result<Self, GeometryError> {
        let norm = chart.covector_norm(z, xi)?;
        Ok(PointedCovector { z, xi, norm })
    }

    /// Unit covector `xi / |xi|_g` at the same base point.
    pub fn unit(&self) -> PointedCovector {
        PointedCovector { z: self.z, xi: linalg::scale(1.0 / self.norm, self.xi), norm: 1.0 }
    }
}

/// Integration region in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Vec2, radius: f64 },
    Rect { lo: Vec2, hi: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// |I(2n) - I(n)| from one refinement step.
    pub error: f64,
    pub converged: bool,
}

impl ChartMetric {
    pub fn new(family: MetricFamily, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidParameters(format!("disk radius must be positive, got {radius}")));
        }
        match family {
            MetricFamily::Euclidean => {}
            MetricFamily::ConstantCurvature { curvature } => {
                if !curvature.is_finite() {
                    return Err(GeometryError::InvalidParameters("curvature must be finite".into()));
                }
                if curvature < 0.0 && radius >= 2.0 / (-curvature).sqrt() {
                    return Err(GeometryError::InvalidParameters(format!(
                        "disk radius {radius} exceeds the chart radius {} for K = {curvature}",
                        2.0 / (-curvature).sqrt()
                    )));
                }
            }
            MetricFamily::ConformalBump { amplitude, center, width } => {
                if !(amplitude.is_finite() && center.iter().all(|c| c.is_finite()) && width.is_finite() && width > 0.0) {
                    return Err(GeometryError::InvalidParameters("bump needs finite amplitude/center and width > 0".into()));
                }
            }
        }
        Ok(ChartMetric { family, radius })
    }

    pub fn euclidean(radius: f64) -> Self {
        ChartMetric { family: MetricFamily::Euclidean, radius }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.family, MetricFamily::Euclidean)
            || matches!(self.family, MetricFamily::ConstantCurvature { curvature } if curvature == 0.0)
            || matches!(self.family, MetricFamily::ConformalBump { amplitude, .. } if amplitude == 0.0)
    }

    /// Chart domain: the plane, except the open disk of radius 2/sqrt(-K)
    /// for negative constant curvature.
    pub fn in_chart(&self, x: Vec2) -> bool {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return false;
        }
        match self.family {
            MetricFamily::ConstantCurvature { curvature } if curvature < 0.0 => linalg::dot(x, x) < 4.0 / (-curvature),
            _ => true,
        }
    }

    fn check(&self, x: Vec2) -> Result<(), GeometryError> {
        if self.in_chart(x) {
            Ok(())
        } else {
            Err(GeometryError::OutsideChart(x[0], x[1]))
        }
    }

    /// Boundary defining function; M = {b <= 0}.
    pub fn boundary(&self, x: Vec2) -> f64 {
        linalg::dot(x, x) - self.radius * self.radius
    }

    pub fn boundary_grad(&self, x: Vec2) -> Vec2 {
        linalg::scale(2.0, x)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.boundary(x) <= 0.0
    }

    /// phi and its first two derivatives; caller guarantees `x` is in the chart.
    pub fn phi_jet(&self, x: Vec2) -> PhiJet {
        match self.family {
            MetricFamily::Euclidean => PhiJet { phi: 0.0, grad: [0.0; 2], hess: [[0.0; 2]; 2] },
            MetricFamily::ConstantCurvature { curvature: k } => {
                let q = 1.0 + 0.25 * k * linalg::dot(x, x);
                let qi = [0.5 * k * x[0], 0.5 * k * x[1]];
                let mut hess = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let qij = if i == j { 0.5 * k } else { 0.0 };
                        hess[i][j] = -qij / q + qi[i] * qi[j] / (q * q);
                    }
                }
                PhiJet { phi: -q.ln(), grad: [-qi[0] / q, -qi[1] / q], hess }
            }
            MetricFamily::ConformalBump { amplitude, center, width } => {
                let d = linalg::sub(x, center);
                let w2 = width * width;
                let phi = amplitude * (-linalg::dot(d, d) / w2).exp();
                let grad = [-2.0 * phi * d[0] / w2, -2.0 * phi * d[1] / w2];
                let mut hess = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        hess[i][j] = phi * (4.0 * d[i] * d[j] / (w2 * w2) - 2.0 * delta / w2);
                    }
                }
                PhiJet { phi, grad, hess }
            }
        }
    }

    /// Conformal factor e^{2 phi}.
    pub fn conformal_factor(&self, x: Vec2) -> f64 {
        (2.0 * self.phi_jet(x).phi).exp()
    }

    pub fn metric_at(&self, x: Vec2) -> Result<Mat2, GeometryError> {
        self.check(x)?;
        let e = (2.0 * self.phi_jet(x).phi).exp();
        if !(e.is_finite() && e > 0.0) {
            return Err(GeometryError::SingularMetric(x[0], x[1]));
        }
        Ok([[e, 0.0], [0.0, e]])
    }

    pub fn inverse_metric_at(&self, x: Vec2) -> Result<Mat2, GeometryError> {
        let g = self.metric_at(x)?;
        linalg::inverse(&g).ok_or(GeometryError::SingularMetric(x[0], x[1]))
    }

    pub fn sqrt_det(&self, x: Vec2) -> Result<f64, GeometryError> {
        Ok(linalg::det(&self.metric_at(x)?).sqrt())
    }

    /// g*(a, b) for covectors at x.
    pub fn covector_dot(&self, x: Vec2, a: Vec2, b: Vec2) -> Result<f64, GeometryError> {
        Ok(linalg::quad_form(&self.inverse_metric_at(x)?, a, b))
    }

    pub fn covector_norm(&self, x: Vec2, a: Vec2) -> Result<f64, GeometryError> {
        Ok(self.covector_dot(x, a, a)?.sqrt())
    }

    pub fn vector_norm(&self, x: Vec2, v: Vec2) -> Result<f64, GeometryError> {
        Ok(linalg::quad_form(&self.metric_at(x)?, v, v).sqrt())
    }

    /// Raise an index: covector to vector.
    pub fn raise(&self, x: Vec2, a: Vec2) -> Result<Vec2, GeometryError> {
        Ok(linalg::mat_vec(&self.inverse_metric_at(x)?, a))
    }

    /// Lower an index: vector to covector.
    pub fn lower(&self, x: Vec2, v: Vec2) -> Result<Vec2, GeometryError> {
        Ok(linalg::mat_vec(&self.metric_at(x)?, v))
    }

    /// Analytic Christoffel symbols: for g = e^{2 phi} I,
    /// Gamma^k_ij = delta_ik phi_j + delta_jk phi_i - delta_ij phi_k.
    pub fn christoffel_at(&self, x: Vec2) -> Result<Christoffel, GeometryError> {
        self.check(x)?;
        Ok(conformal_christoffel(self.phi_jet(x).grad))
    }

    /// Christoffel symbols and their first derivatives `dgam[l][k][i][j] = d_l Gamma^k_ij`.
    pub fn christoffel_with_derivative(&self, x: Vec2) -> (Christoffel, [Christoffel; 2]) {
        let jet = self.phi_jet(x);
        let gam = conformal_christoffel(jet.grad);
        let dgam = [conformal_christoffel(jet.hess[0]), conformal_christoffel(jet.hess[1])];
        (gam, dgam)
    }

    /// Christoffel symbols from central differences of the metric with step
    /// `h`, Richardson-extrapolated between h and h/2.
    pub fn christoffel_fd(&self, x: Vec2, h: f64) -> Result<Christoffel, GeometryError> {
        let a = self.christoffel_fd_raw(x, h)?;
        let b = self.christoffel_fd_raw(x, 0.5 * h)?;
        let mut out = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[k][i][j] = (4.0 * b[k][i][j] - a[k][i][j]) / 3.0;
                }
            }
        }
        Ok(out)
    }

    fn christoffel_fd_raw(&self, x: Vec2, h: f64) -> Result<Christoffel, GeometryError> {
        let ginv = self.inverse_metric_at(x)?;
        let mut dg = [[[0.0; 2]; 2]; 2];
        for (l, dgl) in dg.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[l] += h;
            xm[l] -= h;
            let gp = self.metric_at(xp)?;
            let gm = self.metric_at(xm)?;
            for i in 0..2 {
                for j in 0..2 {
                    dgl[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                }
            }
        }
        let mut out = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    out[k][i][j] = 0.5 * s;
                }
            }
        }
        Ok(out)
    }

    /// Gauss curvature K = -e^{-2 phi} Laplacian(phi).
    pub fn curvature_at(&self, x: Vec2) -> Result<f64, GeometryError> {
        self.check(x)?;
        Ok(self.curvature_unchecked(x))
    }

    pub(crate) fn curvature_unchecked(&self, x: Vec2) -> f64 {
        match self.family {
            MetricFamily::Euclidean => 0.0,
            MetricFamily::ConstantCurvature { curvature } => curvature,
            MetricFamily::ConformalBump { .. } => {
                let jet = self.phi_jet(x);
                -(-2.0 * jet.phi).exp() * (jet.hess[0][0] + jet.hess[1][1])
            }
        }
    }

    /// Chart gradient dK of the Gauss curvature.
    pub fn curvature_gradient(&self, x: Vec2) -> Vec2 {
        match self.family {
            MetricFamily::Euclidean | MetricFamily::ConstantCurvature { .. } => [0.0, 0.0],
            MetricFamily::ConformalBump { center, width, .. } => {
                let jet = self.phi_jet(x);
                let d = linalg::sub(x, center);
                let w2 = width * width;
                let lap = jet.hess[0][0] + jet.hess[1][1];
                let e = (-2.0 * jet.phi).exp();
                let mut out = [0.0; 2];
                for i in 0..2 {
                    let dlap = jet.grad[i] * (4.0 * linalg::dot(d, d) / (w2 * w2) - 4.0 / w2) + jet.phi * 8.0 * d[i] / (w2 * w2);
                    out[i] = -e * (dlap - 2.0 * jet.grad[i] * lap);
                }
                out
            }
        }
    }

    /// Gauss curvature from finite-difference Christoffel symbols:
    /// K = g_{1m} R^m_{212} / det g.
    pub fn curvature_fd(&self, x: Vec2, h: f64) -> Result<f64, GeometryError> {
        let g = self.metric_at(x)?;
        let gam = self.christoffel_fd(x, h)?;
        let mut dgam = [[[[0.0; 2]; 2]; 2]; 2];
        for (l, d) in dgam.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[l] += h;
            xm[l] -= h;
            let gp = self.christoffel_fd(xp, h)?;
            let gm = self.christoffel_fd(xm, h)?;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        d[k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
                    }
                }
            }
        }
        let mut r = [0.0; 2];
        for (m, rm) in r.iter_mut().enumerate() {
            let mut s = dgam[0][m][1][1] - dgam[1][m][0][1];
            for (l, gl) in gam.iter().enumerate() {
                s += gam[m][0][l] * gl[1][1] - gam[m][1][l] * gl[0][1];
            }
            *rm = s;
        }
        Ok((g[0][0] * r[0] + g[0][1] * r[1]) / linalg::det(&g))
    }

    /// Rough metric diameter of M: 2R times the largest conformal scale on a grid.
    pub fn diameter_estimate(&self) -> f64 {
        let mut scale: f64 = 0.0;
        let n = 40;
        for i in 0..=n {
            for j in 0..=n {
                let x = [self.radius * (2.0 * i as f64 / n as f64 - 1.0), self.radius * (2.0 * j as f64 / n as f64 - 1.0)];
                if self.contains(x) && self.in_chart(x) {
                    scale = scale.max(self.phi_jet(x).phi.exp());
                }
            }
        }
        2.0 * self.radius * scale.max(1e-12)
    }

    /// `integral of f dV_g` over `region` with tensor Gauss-Legendre nodes
    /// (`n` per direction, polar for disks), refined once to `2n` for the
    /// error estimate.
    pub fn integrate<F>(&self, region: &Region, integrand: F, n: usize, tol: f64) -> Result<Integral, GeometryError>
    where
        F: Fn(Vec2) -> Complex64,
    {
        let coarse = self.integrate_fixed(region, &integrand, n)?;
        let fine = self.integrate_fixed(region, &integrand, 2 * n)?;
        let error = (fine - coarse).norm();
        Ok(Integral { value: fine, error, converged: error <= tol.max(1e-15 * fine.norm()) })
    }

    fn integrate_fixed<F>(&self, region: &Region, integrand: &F, n: usize) -> Result<Complex64, GeometryError>
    where
        F: Fn(Vec2) -> Complex64,
    {
        let rule = GaussLegendre::new(n);
        let mut acc = CompensatedSum::default();
        match *region {
            Region::Disk { center, radius } => {
                // Trapezoid in angle (periodic), Gauss-Legendre in radius.
                let m = 2 * n;
                for k in 0..m {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    let dir = [th.cos(), th.sin()];
                    for (r, w) in rule.mapped(0.0, radius) {
                        let x = linalg::axpy(r, dir, center);
                        let vol = self.sqrt_det(x)?;
                        acc.add(integrand(x) * (w * r * vol * 2.0 * PI / m as f64));
                    }
                }
            }
            Region::Rect { lo, hi } => {
                for (x0, w0) in rule.mapped(lo[0], hi[0]) {
                    for (x1, w1) in rule.mapped(lo[1], hi[1]) {
                        let x = [x0, x1];
                        let vol = self.sqrt_det(x)?;
                        acc.add(integrand(x) * (w0 * w1 * vol));
                    }
                }
            }
        }
        Ok(acc.value())
    }
}

fn conformal_christoffel(dphi: Vec2) -> Christoffel {
    let mut gam = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                gam[k][i][j] = dik * dphi[j] + djk * dphi[i] - dij * dphi[k];
            }
        }
    }
    gam
}

/// `Gamma(a, b)^k = Gamma^k_ij a^i b^j`.
#[inline]
pub fn contract(gam: &Christoffel, a: Vec2, b: Vec2) -> Vec2 {
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        *o = gam[k][0][0] * a[0] * b[0] + gam[k][0][1] * a[0] * b[1] + gam[k][1][0] * a[1] * b[0] + gam[k][1][1] * a[1] * b[1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> ChartMetric {
        ChartMetric::new(MetricFamily::ConformalBump { amplitude: 0.4, center: [0.2, -0.1], width: 0.5 }, 1.0).unwrap()
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let c = ChartMetric::euclidean(1.0);
        assert_eq!(c.metric_at([0.3, -0.1]).unwrap(), linalg::IDENTITY);
        assert_eq!(c.christoffel_at([0.3, -0.1]).unwrap(), [[[0.0; 2]; 2]; 2]);
        assert_eq!(c.curvature_at([0.3, -0.1]).unwrap(), 0.0);
    }

    #[test]
    fn sphere_chart_is_normalized_at_origin() {
        let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: 1.0 }, 1.5).unwrap();
        let g = c.metric_at([0.0, 0.0]).unwrap();
        assert!((g[0][0] - 1.0).abs() < 1e-15 && g[0][1] == 0.0 && (g[1][1] - 1.0).abs() < 1e-15);
        for x in [[0.0, 0.0], [0.7, -0.4], [1.2, 0.9]] {
            assert!((c.curvature_at(x).unwrap() - 1.0).abs() < 1e-6);
            assert!((c.curvature_fd(x, 1e-4).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn hyperbolic_chart_domain() {
        assert!(ChartMetric::new(MetricFamily::ConstantCurvature { curvature: -1.0 }, 2.5).is_err());
        let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: -1.0 }, 1.5).unwrap();
        assert!(c.metric_at([2.1, 0.0]).is_err());
        assert!((c.curvature_fd([0.5, 0.3], 1e-4).unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn bump_christoffels_match_conformal_formula_and_fd() {
        let c = bump();
        let x = [0.35, 0.1];
        let jet = c.phi_jet(x);
        let gam = c.christoffel_at(x).unwrap();
        assert!((gam[0][0][0] - jet.grad[0]).abs() < 1e-15);
        assert!((gam[0][1][1] + jet.grad[0]).abs() < 1e-15);
        assert!((gam[0][0][1] - jet.grad[1]).abs() < 1e-15);
        let fd = c.christoffel_fd(x, 1e-4).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((gam[k][i][j] - fd[k][i][j]).abs() < 1e-9);
                    assert!((gam[k][i][j] - gam[k][j][i]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn bump_curvature_matches_fd_and_gradient() {
        let c = bump();
        for x in [[0.0, 0.0], [0.35, 0.1], [-0.5, 0.6]] {
            let k = c.curvature_at(x).unwrap();
            let kfd = c.curvature_fd(x, 1e-4).unwrap();
            assert!((k - kfd).abs() < 1e-6, "at {x:?}: {k} vs {kfd}");
            let h = 1e-5;
            let gk = c.curvature_gradient(x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (c.curvature_at(xp).unwrap() - c.curvature_at(xm).unwrap()) / (2.0 * h);
                assert!((gk[i] - fd).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn christoffel_derivative_matches_fd() {
        let c = bump();
        let x = [0.1, 0.25];
        let (_, dgam) = c.christoffel_with_derivative(x);
        let h = 1e-6;
        for l in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[l] += h;
            xm[l] -= h;
            let gp = c.christoffel_at(xp).unwrap();
            let gm = c.christoffel_at(xm).unwrap();
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((dgam[l][k][i][j] - (gp[k][i][j] - gm[k][i][j]) / (2.0 * h)).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_disk_area() {
        let c = ChartMetric::euclidean(1.0);
        let r = c.integrate(&Region::Disk { center: [0.0, 0.0], radius: 1.0 }, |_| Complex64::new(1.0, 0.0), 8, 1e-10).unwrap();
        assert!((r.value.re - PI).abs() < 1e-8 && r.converged);
    }
}
