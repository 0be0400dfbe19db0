//! Scenario configuration (JSON, schema version 1).

use serde::{Deserialize, Serialize};
use wfbeam::beam::ResidualOptions;
use wfbeam::fbi::{Direction, ProbeParams, ScanParams, TestFunction, TransformOptions};
use wfbeam::geodesic::GeodesicOptions;
use wfbeam::{ChartMetric, MetricFamily};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricFamily,
    pub domain: Domain,
    #[serde(default = "zero_function")]
    pub function: TestFunction,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub directions: DirectionGrid,
    #[serde(default)]
    pub geodesic: GeodesicOptions,
    #[serde(default)]
    pub su_audit: SuAuditConfig,
    #[serde(default)]
    pub pair_audit: PairAuditConfig,
    #[serde(default)]
    pub beam_residual: BeamResidualConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn zero_function() -> TestFunction {
    TestFunction::Zero
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    /// Disk radius R; M = {|x| <= R} in the chart.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Angle between zeta_1 and xi_hat_0 in degrees, in (0, 90).
    pub zeta_angle_deg: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub order: usize,
    pub tube_half_width: Option<f64>,
    pub taus: Vec<f64>,
    /// Smallest admissible tau.
    pub tau0: f64,
    pub s_smooth: f64,
    pub s_sing: f64,
    pub floor_rel: f64,
    pub transform: TransformOptions,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        let scan = ScanParams::default();
        ProbeConfig {
            zeta_angle_deg: 45.0,
            lambda1: 0.0,
            lambda2: 0.0,
            order: 1,
            tube_half_width: None,
            taus: scan.taus,
            tau0: 25.0,
            s_smooth: scan.s_smooth,
            s_sing: scan.s_sing,
            floor_rel: scan.floor_rel,
            transform: scan.transform,
        }
    }
}

/// Directions at one base point: either `count` equally spaced angles
/// starting at `offset_deg`, or an explicit list `angles_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectionGrid {
    pub base: [f64; 2],
    pub count: usize,
    pub offset_deg: f64,
    pub angles_deg: Option<Vec<f64>>,
}

impl Default for DirectionGrid {
    fn default() -> Self {
        DirectionGrid { base: [0.0, 0.0], count: 16, offset_deg: 0.0, angles_deg: None }
    }
}

impl DirectionGrid {
    pub fn angles_deg(&self) -> Vec<f64> {
        match &self.angles_deg {
            Some(a) => a.clone(),
            None => (0..self.count).map(|k| self.offset_deg + 360.0 * k as f64 / self.count as f64).collect(),
        }
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.angles_deg().into_iter().map(|a| Direction { z: self.base, angle: a.to_radians() }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuAuditConfig {
    /// Number of base points, drawn uniformly from the disk of radius
    /// `radius_frac * R` with the run seed.
    pub points: usize,
    /// Equally spaced covector directions eta per base point.
    pub directions: usize,
    pub radius_frac: f64,
    /// 1 tests only the positively oriented orthogonal covector, 2 both.
    pub n_dir: usize,
}

impl Default for SuAuditConfig {
    fn default() -> Self {
        SuAuditConfig { points: 20, directions: 16, radius_frac: 0.9, n_dir: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairAuditConfig {
    /// Covectors sampled in the probe neighborhood of the first direction.
    pub samples: usize,
    /// Fraction of the validated neighborhood radius that is sampled.
    pub radius_frac: f64,
    /// Also run the admissibility check (two geodesic shots per sample).
    pub admissibility: bool,
}

impl Default for PairAuditConfig {
    fn default() -> Self {
        PairAuditConfig { samples: 500, radius_frac: 0.9, admissibility: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamResidualConfig {
    pub base: [f64; 2],
    /// Direction of the beam axis in an orthonormal frame at `base`.
    pub angle_deg: f64,
    pub orders: Vec<usize>,
    pub taus: Vec<f64>,
    pub tube_half_width: Option<f64>,
    pub quadrature: ResidualOptions,
}

impl Default for BeamResidualConfig {
    fn default() -> Self {
        BeamResidualConfig {
            base: [0.0, 0.0],
            angle_deg: 0.0,
            orders: vec![0, 1],
            taus: vec![25.0, 50.0, 100.0, 200.0, 400.0],
            tube_half_width: None,
            quadrature: ResidualOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory used when `--out` is not given.
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "wfbeam-out".into() }
    }
}

fn finite(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be finite"))
    }
}

fn increasing_grid(name: &str, taus: &[f64], tau0: f64) -> Result<(), String> {
    if taus.len() < 2 {
        return Err(format!("{name} needs at least two values"));
    }
    for w in taus.windows(2) {
        if w[1].is_nan() || w[0].is_nan() || w[1] <= w[0] {
            return Err(format!("{name} must be strictly increasing"));
        }
    }
    for &t in taus {
        finite(name, t)?;
        if t < tau0 {
            return Err(format!("{name}: {t} is below tau0 = {tau0}"));
        }
    }
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chart(&self) -> Result<ChartMetric, String> {
        ChartMetric::new(self.metric, self.domain.radius).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let chart = self.chart()?;
        self.function.validate()?;

        let p = &self.probe;
        for (n, v) in [("probe.lambda1", p.lambda1), ("probe.lambda2", p.lambda2), ("probe.floor_rel", p.floor_rel)] {
            finite(n, v)?;
        }
        if !(p.zeta_angle_deg > 0.0 && p.zeta_angle_deg < 90.0) {
            return Err("probe.zeta_angle_deg must lie in (0, 90)".into());
        }
        if p.order > 1 {
            return Err(format!("probe.order must be 0 or 1, got {}", p.order));
        }
        if let Some(d) = p.tube_half_width {
            if !(d.is_finite() && d > 0.0) {
                return Err("probe.tube_half_width must be positive".into());
            }
        }
        if !(p.tau0.is_finite() && p.tau0 > 0.0) {
            return Err("probe.tau0 must be positive".into());
        }
        increasing_grid("probe.taus", &p.taus, p.tau0)?;
        if !(p.s_sing > 0.0 && p.s_smooth > p.s_sing && p.s_smooth.is_finite()) {
            return Err("thresholds need 0 < s_sing < s_smooth".into());
        }
        if p.floor_rel.is_nan() || p.floor_rel < 0.0 {
            return Err("probe.floor_rel must be non-negative".into());
        }
        let t = &p.transform;
        if t.nodes < 2 || !(t.phase_per_panel > 0.0 && t.envelope_per_panel > 0.0 && t.decay_exponent > 0.0 && t.interp_tol > 0.0) {
            return Err("probe.transform: nodes >= 2 and positive tolerances required".into());
        }

        let d = &self.directions;
        if !chart.contains(d.base) || chart.boundary(d.base) >= 0.0 {
            return Err("directions.base must be an interior point of M".into());
        }
        let angles = d.angles_deg();
        if angles.is_empty() {
            return Err("directions: no directions requested".into());
        }
        for a in angles {
            finite("directions angle", a)?;
        }

        let g = &self.geodesic;
        if !(g.rtol > 0.0 && g.atol > 0.0 && g.h_max > 0.0 && g.angle_min >= 0.0 && g.eps_x > 0.0 && g.t_sep > 0.0) {
            return Err("geodesic tolerances must be positive".into());
        }
        if let Some(t) = g.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err("geodesic.t_max must be positive".into());
            }
        }

        let s = &self.su_audit;
        if s.points == 0 || s.directions == 0 || !(s.radius_frac > 0.0 && s.radius_frac < 1.0) || !(1..=2).contains(&s.n_dir) {
            return Err("su_audit: points, directions > 0, radius_frac in (0, 1), n_dir in {1, 2}".into());
        }
        let pa = &self.pair_audit;
        if pa.samples == 0 || !(pa.radius_frac > 0.0 && pa.radius_frac <= 1.0) {
            return Err("pair_audit: samples > 0 and radius_frac in (0, 1]".into());
        }

        let b = &self.beam_residual;
        if !chart.contains(b.base) || chart.boundary(b.base) >= 0.0 {
            return Err("beam_residual.base must be an interior point of M".into());
        }
        finite("beam_residual.angle_deg", b.angle_deg)?;
        if b.orders.is_empty() || b.orders.iter().any(|&n| n > 1) {
            return Err("beam_residual.orders must list orders 0 and/or 1".into());
        }
        increasing_grid("beam_residual.taus", &b.taus, 0.0)?;
        if b.taus[0] <= 0.0 {
            return Err("beam_residual.taus must be positive".into());
        }
        if let Some(d) = b.tube_half_width {
            if !(d.is_finite() && d > 0.0) {
                return Err("beam_residual.tube_half_width must be positive".into());
            }
        }
        let q = &b.quadrature;
        if q.t_nodes < 2 || q.y_nodes < 2 || q.exponent_cut.is_nan() || q.exponent_cut <= 0.0 {
            return Err("beam_residual.quadrature: nodes >= 2 and exponent_cut > 0".into());
        }
        if self.output.dir.is_empty() {
            return Err("output.dir must not be empty".into());
        }
        Ok(())
    }

    pub fn probe_params(&self) -> ProbeParams {
        let p = &self.probe;
        ProbeParams {
            zeta_angle: p.zeta_angle_deg.to_radians(),
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            order: p.order,
            tube_half_width: p.tube_half_width,
        }
    }

    pub fn scan_params(&self) -> ScanParams {
        let p = &self.probe;
        ScanParams {
            probe: self.probe_params(),
            taus: p.taus.clone(),
            s_smooth: p.s_smooth,
            s_sing: p.s_sing,
            floor_rel: p.floor_rel,
            transform: p.transform,
            geodesic: self.geodesic,
        }
    }
}
