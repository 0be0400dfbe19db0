//! Subcommand implementations and the scenario runner.

use crate::config::Config;
use crate::output::{self, float_list, Cell, RunManifest, Stage, Table};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;
use wfbeam::beam::{residual_norm, FermiChart, GaussianBeam};
use wfbeam::fbi::{self, linear_fit, phase_audit, Classification, Direction, FbiProbe, ScalarField};
use wfbeam::geodesic::{self, su_check};
use wfbeam::pairing::{admissible_check, Coframe};
use wfbeam::{linalg, ChartMetric, PointedCovector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SuAudit,
    PairAudit,
    BeamResidual,
    PhaseAudit,
    WfScan,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] =
        [Subcommand::SuAudit, Subcommand::PairAudit, Subcommand::BeamResidual, Subcommand::PhaseAudit, Subcommand::WfScan];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::SuAudit => "su-audit",
            Subcommand::PairAudit => "pair-audit",
            Subcommand::BeamResidual => "beam-residual",
            Subcommand::PhaseAudit => "phase-audit",
            Subcommand::WfScan => "wf-scan",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Unreadable or invalid configuration; nothing is written.
    Config(String),
    /// A computation failed; artifacts describing the failure are written.
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Tables and summary produced by one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
    pub warnings: Vec<String>,
    /// Set when the run completed but a computation failed.
    pub failure: Option<String>,
}

#[derive(Debug, Default)]
pub struct Stages(pub Vec<Stage>);

impl Stages {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(Stage { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }
}

/// Options from the command line.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Files written by a successful (or numerically failed) run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub outcome: Outcome,
}

fn env_threads() -> Result<Option<usize>, RunError> {
    for var in ["WFBEAM_THREADS", "TOOL_THREADS"] {
        if let Ok(v) = std::env::var(var) {
            return v.trim().parse::<usize>().map(Some).map_err(|_| RunError::Config(format!("{var} must be a positive integer, got {v:?}")));
        }
    }
    Ok(None)
}

/// Load and validate a config, applying the seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<Config, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = Config::parse(&text).map_err(RunError::Config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Parse, execute and write artifacts. Config errors return before
/// anything touches the output directory.
pub fn run(cmd: Subcommand, inv: &Invocation) -> Result<RunResult, RunError> {
    let mut stages = Stages::default();
    let cfg = stages.time("config", || load_config(&inv.config, inv.seed))?;
    let threads = match inv.threads {
        Some(0) => return Err(RunError::Config("--threads must be positive".into())),
        Some(n) => n,
        None => match env_threads()? {
            Some(0) => return Err(RunError::Config("thread count must be positive".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    let out_dir = inv.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| RunError::Io(e.to_string()))?;
    let outcome = pool.install(|| execute(cmd, &cfg, &mut stages))?;

    let canonical = serde_json::to_string(&cfg).map_err(|e| RunError::Io(e.to_string()))?;
    let mut manifest = RunManifest {
        tool: "wfbeam",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cmd.name().to_string(),
        config_hash: output::config_hash(&canonical),
        seed: cfg.seed,
        threads,
        stages: stages.0,
        warnings: outcome.warnings.clone(),
        status: match &outcome.failure {
            None => "ok".into(),
            Some(m) => format!("numerical failure: {m}"),
        },
        artifacts: Vec::new(),
        config: serde_json::to_value(&cfg).map_err(|e| RunError::Io(e.to_string()))?,
    };
    output::write_artifacts(&out_dir, &outcome.tables, &outcome.summary, &mut manifest).map_err(|e| RunError::Io(e.to_string()))?;
    if let Some(m) = &outcome.failure {
        return Err(RunError::Numerical(m.clone()));
    }
    Ok(RunResult { out_dir, manifest, outcome })
}

/// Run one subcommand on a validated config without writing anything.
pub fn execute(cmd: Subcommand, cfg: &Config, stages: &mut Stages) -> Result<Outcome, RunError> {
    let chart = cfg.chart().map_err(RunError::Config)?;
    match cmd {
        Subcommand::SuAudit => Ok(stages.time("su-audit", || su_audit(cfg, &chart))),
        Subcommand::PairAudit => stages.time("pair-audit", || pair_audit(cfg, &chart)),
        Subcommand::BeamResidual => beam_residual(cfg, &chart, stages),
        Subcommand::PhaseAudit => Ok(stages.time("phase-audit", || phase_audit_cmd(cfg, &chart))),
        Subcommand::WfScan => Ok(stages.time("wf-scan", || wf_scan_cmd(cfg, &chart))),
    }
}

/// Unit covector at z with the given angle in an orthonormal frame (the
/// metrics are conformal, so chart angles are metric angles).
fn unit_covector(chart: &ChartMetric, z: [f64; 2], angle: f64) -> Result<[f64; 2], String> {
    let e = [angle.cos(), angle.sin()];
    let n = chart.covector_norm(z, e).map_err(|e| e.to_string())?;
    Ok(linalg::scale(1.0 / n, e))
}

/// Uniform points in the disk |x| < r (rejection sampling).
pub fn sample_disk(rng: &mut ChaCha8Rng, r: f64, count: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = [rng.gen_range(-r..r), rng.gen_range(-r..r)];
        if x[0] * x[0] + x[1] * x[1] < r * r {
            out.push(x);
        }
    }
    out
}

fn su_audit(cfg: &Config, chart: &ChartMetric) -> Outcome {
    let s = cfg.su_audit;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = sample_disk(&mut rng, s.radius_frac * chart.radius, s.points);
    let tasks: Vec<(usize, [f64; 2], f64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, &z)| (0..s.directions).map(move |k| (i * s.directions + k, z, 360.0 * k as f64 / s.directions as f64)))
        .collect();
    let results: Vec<_> = tasks
        .par_iter()
        .map(|&(_, z, a)| {
            let eta = unit_covector(chart, z, a.to_radians())?;
            su_check(chart, z, eta, s.n_dir, &cfg.geodesic).map(|v| (eta, v)).map_err(|e| e.to_string())
        })
        .collect();

    let mut table = Table::new(
        "su_audit",
        &["index", "z1", "z2", "eta_angle_deg", "eta1", "eta2", "pass", "reasons", "witness1", "witness2", "conjugate_times", "error"],
    );
    let (mut passed, mut errors) = (0usize, Vec::new());
    let mut conjugate: Vec<f64> = Vec::new();
    for (&(i, z, a), r) in tasks.iter().zip(&results) {
        match r {
            Ok((eta, v)) => {
                passed += v.pass as usize;
                conjugate.extend(&v.conjugate_times);
                let reasons: Vec<&str> = v.reasons.iter().map(|f| f.label()).collect();
                let w = v.witness.unwrap_or([f64::NAN; 2]);
                table.push(vec![
                    i.into(),
                    z[0].into(),
                    z[1].into(),
                    a.into(),
                    eta[0].into(),
                    eta[1].into(),
                    v.pass.into(),
                    reasons.join(";").into(),
                    w[0].into(),
                    w[1].into(),
                    float_list(&v.conjugate_times).into(),
                    "".into(),
                ]);
            }
            Err(e) => {
                errors.push(format!("row {i}: {e}"));
                let nan = Cell::Float(f64::NAN);
                table.push(vec![
                    i.into(),
                    z[0].into(),
                    z[1].into(),
                    a.into(),
                    nan.clone(),
                    nan.clone(),
                    false.into(),
                    "".into(),
                    nan.clone(),
                    nan,
                    "".into(),
                    e.clone().into(),
                ]);
            }
        }
    }
    let total = tasks.len();
    let min_conjugate = conjugate.iter().map(|t| t.abs()).fold(f64::INFINITY, f64::min);
    let summary = json!({
        "subcommand": "su-audit",
        "points": s.points,
        "directions": s.directions,
        "rows": total,
        "passed": passed,
        "failed": total - passed - errors.len(),
        "errors": errors.len(),
        "min_conjugate_time": min_conjugate.is_finite().then_some(min_conjugate),
        "angle_min": cfg.geodesic.angle_min,
    });
    let failure = (!errors.is_empty()).then(|| format!("{} of {total} checks failed to run", errors.len()));
    Outcome { tables: vec![table], summary, warnings: errors, failure }
}

fn pair_audit(cfg: &Config, chart: &ChartMetric) -> Result<Outcome, RunError> {
    let p = cfg.pair_audit;
    let dir = cfg.directions.directions()[0];
    let xi0 = dir.covector(chart).map_err(|e| RunError::Numerical(e.to_string()))?;
    let probe = FbiProbe::build(chart, dir.z, xi0, cfg.probe_params(), cfg.geodesic).map_err(|e| RunError::Numerical(e.to_string()))?;
    let pair = &probe.pair;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = p.radius_frac * pair.radius;
    let mut samples = Vec::with_capacity(p.samples);
    while samples.len() < p.samples {
        let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if u[0] * u[0] + u[1] * u[1] + u[2] * u[2] < 1.0 {
            samples.push([r * u[0], r * u[1], r * u[2]]);
        }
    }
    let results: Vec<Result<_, String>> = samples
        .par_iter()
        .map(|u| {
            let xi = pair.covector_at([u[0], u[1]], u[2]).map_err(|e| e.to_string())?;
            let (w1, w2) = pair.pair_map(&xi).map_err(|e| e.to_string())?;
            let (v1, v2) = pair.pair_map_pt(&xi).map_err(|e| e.to_string())?;
            let z = xi.z;
            let unit = xi.unit().xi;
            let norm = |c: [f64; 2]| chart.covector_norm(z, c).map_err(|e| e.to_string());
            let defect = norm(linalg::sub(linalg::add(w1, w2), linalg::scale(pair.t0, unit)))?;
            let diff = norm(linalg::sub(w1, v1))?.max(norm(linalg::sub(w2, v2))?);
            let admissible =
                if p.admissibility { Some(admissible_check(chart, z, w1, w2, &cfg.geodesic).map_err(|e| e.to_string())?.admissible) } else { None };
            Ok((xi, w1, w2, defect, diff, admissible))
        })
        .collect();

    let mut table = Table::new(
        "pair_audit",
        &["index", "z1", "z2", "xi1", "xi2", "omega1_1", "omega1_2", "omega2_1", "omega2_2", "sum_defect", "backend_diff", "admissible", "error"],
    );
    let (mut max_defect, mut max_diff, mut admissible, mut errors) = (0.0f64, 0.0f64, 0usize, Vec::new());
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok((xi, w1, w2, d, b, a)) => {
                max_defect = max_defect.max(*d);
                max_diff = max_diff.max(*b);
                admissible += (*a == Some(true)) as usize;
                let a = match a {
                    Some(v) => v.to_string(),
                    None => "unchecked".into(),
                };
                let u = xi.unit().xi;
                table.push(vec![
                    i.into(),
                    xi.z[0].into(),
                    xi.z[1].into(),
                    u[0].into(),
                    u[1].into(),
                    w1[0].into(),
                    w1[1].into(),
                    w2[0].into(),
                    w2[1].into(),
                    (*d).into(),
                    (*b).into(),
                    a.into(),
                    "".into(),
                ]);
            }
            Err(e) => {
                errors.push(format!("sample {i}: {e}"));
                let mut row: Vec<Cell> = vec![i.into()];
                row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 10));
                row.push("false".into());
                row.push(e.clone().into());
                table.push(row);
            }
        }
    }
    let summary = json!({
        "subcommand": "pair-audit",
        "anchor": dir.z,
        "anchor_angle_deg": dir.angle.to_degrees(),
        "t0": pair.t0,
        "neighborhood_radius": pair.radius,
        "samples": p.samples,
        "max_sum_defect": max_defect,
        "max_backend_diff": max_diff,
        "admissible": if p.admissibility { Some(admissible) } else { None },
        "errors": errors.len(),
    });
    let failure = (!errors.is_empty()).then(|| format!("{} of {} samples failed", errors.len(), p.samples));
    Ok(Outcome { tables: vec![table], summary, warnings: errors, failure })
}

fn beam_residual(cfg: &Config, chart: &ChartMetric, stages: &mut Stages) -> Result<Outcome, RunError> {
    let b = &cfg.beam_residual;
    let num = |e: &dyn std::fmt::Display| RunError::Numerical(e.to_string());
    let fermi = stages.time("fermi-chart", || -> Result<FermiChart, RunError> {
        let xi = unit_covector(chart, b.base, b.angle_deg.to_radians()).map_err(|e| num(&e))?;
        let path = geodesic::shoot(chart, b.base, xi, &cfg.geodesic).map_err(|e| num(&e))?;
        let frame = Coframe::from_first(chart, b.base, xi).map_err(|e| num(&e))?;
        match b.tube_half_width {
            Some(d) => FermiChart::new(chart, &path, &frame, d),
            None => FermiChart::default_tube(chart, &path, &frame),
        }
        .map_err(|e| num(&e))
    })?;
    let mut table = Table::new("beam_residual", &["tau", "order", "residual", "l2_norm", "rel_error"]);
    let mut fits = Vec::new();
    let mut warnings = Vec::new();
    for &order in &b.orders {
        let beam =
            stages.time(&format!("beam-build-{order}"), || GaussianBeam::from_fermi(fermi.clone(), order, Complex64::i())).map_err(|e| num(&e))?;
        let reports = stages.time(&format!("residual-{order}"), || {
            b.taus.par_iter().map(|&tau| residual_norm(&beam, tau, &b.quadrature)).collect::<Result<Vec<_>, _>>()
        });
        let reports = reports.map_err(|e| num(&e))?;
        for r in &reports {
            table.push(vec![r.tau.into(), order.into(), r.residual.into(), r.norm.into(), r.rel_error.into()]);
            warnings.extend(r.warnings.iter().map(|w| format!("order {order}: {w}")));
        }
        let lx: Vec<f64> = reports.iter().map(|r| r.tau.ln()).collect();
        let ly: Vec<f64> = reports.iter().map(|r| r.residual.ln()).collect();
        let (slope, r2) = linear_fit(&lx, &ly);
        let norms: Vec<f64> = reports.iter().map(|r| r.norm).collect();
        let band = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
        fits.push(json!({"order": order, "slope": slope, "r2": r2, "norm_band": band, "cutoff_half_width": beam.delta()}));
    }
    let summary = json!({
        "subcommand": "beam-residual",
        "base": b.base,
        "angle_deg": b.angle_deg,
        "tube_half_width": fermi.delta,
        "taus": b.taus,
        "fits": fits,
    });
    let failure = table.rows.iter().any(|r| matches!(r[2], Cell::Float(v) if !v.is_finite())).then(|| "non-finite residual".to_string());
    Ok(Outcome { tables: vec![table], summary, warnings, failure })
}

fn phase_audit_cmd(cfg: &Config, chart: &ChartMetric) -> Outcome {
    let dirs = cfg.directions.directions();
    let params = cfg.probe_params();
    let results: Vec<Result<(f64, fbi::PhaseAudit), String>> = dirs
        .par_iter()
        .map(|d| {
            let xi = d.covector(chart).map_err(|e| e.to_string())?;
            let probe = FbiProbe::build(chart, d.z, xi, params, cfg.geodesic).map_err(|e| e.to_string())?;
            let pc = PointedCovector::new(chart, d.z, xi).map_err(|e| e.to_string())?;
            let point = probe.at(&pc).map_err(|e| e.to_string())?;
            phase_audit(&probe, &point).map(|a| (pc.norm, a)).map_err(|e| e.to_string())
        })
        .collect();
    let mut table = Table::new(
        "phase_audit",
        &[
            "index",
            "z1",
            "z2",
            "angle_deg",
            "diagonal",
            "differential_defect",
            "hessian_min_eig",
            "min_im_phase",
            "homogeneity_defect",
            "pass",
            "error",
        ],
    );
    let (mut passed, mut errors) = (0usize, Vec::new());
    for (i, (d, r)) in dirs.iter().zip(&results).enumerate() {
        let head: Vec<Cell> = vec![i.into(), d.z[0].into(), d.z[1].into(), d.angle.to_degrees().into()];
        let mut row = head;
        match r {
            Ok((n, a)) => {
                let ok = a.passes(*n);
                passed += ok as usize;
                row.extend([
                    a.diagonal.into(),
                    a.differential_defect.into(),
                    a.hessian_min_eig.into(),
                    a.min_im_phase.into(),
                    a.homogeneity_defect.into(),
                    ok.into(),
                    "".into(),
                ]);
            }
            Err(e) => {
                errors.push(format!("direction {i}: {e}"));
                row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 5));
                row.push(false.into());
                row.push(e.clone().into());
            }
        }
        table.push(row);
    }
    let summary = json!({
        "subcommand": "phase-audit",
        "directions": dirs.len(),
        "passed": passed,
        "errors": errors.len(),
        "thresholds": {
            "diagonal": 1e-8,
            "differential_defect_per_xi": 1e-6,
            "hessian_min_eig_per_xi": 0.1,
            "min_im_phase": -1e-9,
            "homogeneity_defect": 1e-9,
        },
    });
    let failure = (!errors.is_empty()).then(|| format!("{} of {} probes could not be built", errors.len(), dirs.len()));
    Outcome { tables: vec![table], summary, warnings: errors, failure }
}

fn wf_scan_cmd(cfg: &Config, chart: &ChartMetric) -> Outcome {
    let dirs: Vec<Direction> = cfg.directions.directions();
    let params = cfg.scan_params();
    let f: &dyn ScalarField = &cfg.function;
    let report = fbi::wf_scan(chart, f, &dirs, &params);
    let wf = cfg.function.wave_front();

    let mut table =
        Table::new("wf_scan", &["index", "z1", "z2", "angle_deg", "xi1", "xi2", "slope", "r2", "classification", "flag", "reason", "in_wave_front"]);
    let mut samples = Table::new("wf_scan_samples", &["index", "tau", "magnitude", "floor"]);
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    let mut warnings = Vec::new();
    for r in &report.records {
        let d = r.direction;
        *counts.entry(r.fit.classification.label()).or_default() += 1;
        let in_wf = r.xi[0].is_finite() && wf.contains(d.z, r.xi, 1e-9);
        table.push(vec![
            r.index.into(),
            d.z[0].into(),
            d.z[1].into(),
            d.angle.to_degrees().into(),
            r.xi[0].into(),
            r.xi[1].into(),
            r.fit.slope.into(),
            r.fit.r2.into(),
            r.fit.classification.label().into(),
            r.fit.flag.clone().unwrap_or_default().into(),
            r.reason.clone().unwrap_or_default().into(),
            in_wf.into(),
        ]);
        for (k, &tau) in report.taus.iter().enumerate().take(r.magnitudes.len()) {
            samples.push(vec![r.index.into(), tau.into(), r.magnitudes[k].into(), r.floors[k].into()]);
        }
        warnings.extend(r.warnings.iter().map(|w| format!("direction {}: {w}", r.index)));
    }
    let untestable = report.records.iter().filter(|r| r.fit.classification == Classification::Untestable).count();
    let summary = json!({
        "subcommand": "wf-scan",
        "function": cfg.function,
        "wave_front": wf,
        "probe": cfg.probe,
        "thresholds": {"s_smooth": report.s_smooth, "s_sing": report.s_sing},
        "taus": report.taus,
        "directions": report.records.len(),
        "counts": counts,
    });
    let failure = (untestable == report.records.len()).then(|| "every direction is untestable".to_string());
    Outcome { tables: vec![table, samples], summary, warnings, failure }
}
