use super::{decay_fit, transform, Classification, DecayFit, FbiError, FbiProbe, ProbeParams, ScalarField, TransformMaps, TransformOptions};
use crate::geodesic::GeodesicOptions;
use crate::linalg::Vec2;
use crate::manifold::{ChartMetric, PointedCovector};
use crate::pairing::ExpChart;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Base point and direction angle of xi_hat in an orthonormal coframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub z: Vec2,
    pub angle: f64,
}

impl Direction {
    /// Unit covector with the given angle.
    pub fn covector(&self, chart: &ChartMetric) -> Result<Vec2, FbiError> {
        let ec = ExpChart::new(chart, self.z)?;
        Ok(ec.from_orthonormal([self.angle.cos(), self.angle.sin()]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    pub probe: ProbeParams,
    pub taus: Vec<f64>,
    /// Slopes at or below -s_smooth classify SMOOTH.
    pub s_smooth: f64,
    /// Slopes at or above -s_sing classify SINGULAR.
    pub s_sing: f64,
    /// Noise floor relative to int |f k_tau| dV.
    pub floor_rel: f64,
    pub transform: TransformOptions,
    pub geodesic: GeodesicOptions,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            probe: ProbeParams::default(),
            taus: vec![25.0, 35.0, 50.0, 71.0, 100.0, 141.0, 200.0, 283.0, 400.0],
            s_smooth: 5.0,
            s_sing: 2.5,
            floor_rel: 1e-11,
            transform: TransformOptions::default(),
            geodesic: GeodesicOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionRecord {
    pub index: usize,
    pub direction: Direction,
    /// Chart components of xi_hat.
    pub xi: Vec2,
    pub magnitudes: Vec<f64>,
    pub floors: Vec<f64>,
    pub fit: DecayFit,
    pub reason: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub taus: Vec<f64>,
    pub s_smooth: f64,
    pub s_sing: f64,
    pub records: Vec<DirectionRecord>,
}

fn untestable(index: usize, direction: Direction, xi: Vec2, reason: String) -> DirectionRecord {
    DirectionRecord {
        index,
        direction,
        xi,
        magnitudes: Vec::new(),
        floors: Vec::new(),
        fit: DecayFit { slope: f64::NAN, r2: f64::NAN, classification: Classification::Untestable, flag: None },
        reason: Some(reason),
        warnings: Vec::new(),
    }
}

/// |T(tau, xi_hat)| over the tau grid for one direction.
pub fn scan_direction(chart: &ChartMetric, f: &dyn ScalarField, index: usize, direction: Direction, params: &ScanParams) -> DirectionRecord {
    let xi = match direction.covector(chart) {
        Ok(v) => v,
        Err(e) => return untestable(index, direction, [f64::NAN; 2], e.to_string()),
    };
    let run = || -> Result<DirectionRecord, FbiError> {
        let probe = FbiProbe::build(chart, direction.z, xi, params.probe, params.geodesic)?;
        let point = probe.at(&PointedCovector::new(chart, direction.z, xi)?)?;
        let tau_min = params.taus.iter().cloned().fold(f64::INFINITY, f64::min);
        let maps = TransformMaps::build_along(&point, tau_min, f.line_direction(), &params.transform)?;
        let mut magnitudes = Vec::with_capacity(params.taus.len());
        let mut floors = Vec::with_capacity(params.taus.len());
        let mut warnings = Vec::new();
        for &tau in &params.taus {
            let tv = transform(&point, &maps, f, tau, &params.transform);
            magnitudes.push(tv.value.norm());
            floors.push(params.floor_rel * tv.l1);
            warnings.extend(tv.warnings);
        }
        let fit = decay_fit(&params.taus, &magnitudes, &floors, params.s_smooth, params.s_sing);
        Ok(DirectionRecord { index, direction, xi, magnitudes, floors, fit, reason: None, warnings })
    };
    run().unwrap_or_else(|e| untestable(index, direction, xi, e.to_string()))
}

/// Decay scan over `directions`; per-direction failures are recorded as
/// UNTESTABLE. Records come back in input order.
pub fn wf_scan(chart: &ChartMetric, f: &dyn ScalarField, directions: &[Direction], params: &ScanParams) -> DecayReport {
    let records = directions.par_iter().enumerate().map(|(i, d)| scan_direction(chart, f, i, *d, params)).collect();
    DecayReport { taus: params.taus.clone(), s_smooth: params.s_smooth, s_sing: params.s_sing, records }
}

/// `count` equally spaced direction angles at z, starting at 0.
pub fn fan(z: Vec2, count: usize) -> Vec<Direction> {
    (0..count).map(|k| Direction { z, angle: 2.0 * std::f64::consts::PI * k as f64 / count as f64 }).collect()
}
