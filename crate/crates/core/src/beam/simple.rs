use super::BeamError;
use crate::geodesic::{self, GeodesicOptions};
use crate::linalg::{self, Vec2};
use crate::manifold::{ChartMetric, MetricFamily};
use crate::pairing::ExpChart;

/// Distance phase psi(x; z, xi) = dist(x, p(z, xi)), where p is the point
/// where the geodesic through (z, xi) enters the disk inflated by 10%.
/// The distance comes from two-point shooting out of p.
pub fn simple_phase(chart: &ChartMetric, z: Vec2, xi: Vec2, x: Vec2) -> Result<f64, BeamError> {
    let mut radius = 1.1 * chart.radius;
    if let MetricFamily::ConstantCurvature { curvature } = chart.family {
        if curvature < 0.0 {
            radius = radius.min(0.5 * (chart.radius + 2.0 / (-curvature).sqrt()));
        }
    }
    let big = ChartMetric::new(chart.family, radius)?;
    let n = big.covector_norm(z, xi)?;
    if n.is_nan() || n <= 0.0 {
        return Err(BeamError::Precondition("covector must be nonzero".into()));
    }
    let path = geodesic::shoot(&big, z, linalg::scale(1.0 / n, xi), &GeodesicOptions::default())?;
    let p = path.samples()[0].x;
    if linalg::norm(linalg::sub(x, p)) < 1e-12 {
        return Err(BeamError::Precondition("x coincides with the entry point".into()));
    }
    let mut exp = ExpChart::new(&big, p)?;
    exp.steps = 256;
    let (w, _) = exp.inverse(x).map_err(|e| BeamError::NonSimple(e.to_string()))?;
    Ok(linalg::norm(w))
}
