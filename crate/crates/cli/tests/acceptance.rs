use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use wfbeam::beam::{plateau_cutoff, residual_norm, FermiChart, GaussianBeam, ResidualOptions, RiccatiSolution};
use wfbeam::fbi::{linear_fit, transform, Direction, FbiProbe, ProbeParams, ProbePoint, ScalarField, TestFunction, TransformMaps, TransformOptions};
use wfbeam::geodesic::{self, jacobi_scan, su_check, GeodesicOptions, SuFailure};
use wfbeam::linalg;
use wfbeam::pairing::Coframe;
use wfbeam::quad::GaussLegendre;
use wfbeam::{ChartMetric, MetricFamily, PointedCovector};
use wfbeam_cli::{run, Invocation, Subcommand};

const PAIR_TOL: f64 = 1e-10;
const BACKEND_TOL: f64 = 1e-9;
const RICCATI_TOL: f64 = 1e-8;
const SLOPE_GAIN: f64 = 1.0;
const MIN_R2: f64 = 0.98;
const NORM_BAND: f64 = 3.0;
const SEPARATION: f64 = 3.0;
const ORACLE_REL: f64 = 1e-8;
const SQRT_PI_TOL: f64 = 0.02;
const CONJUGATE_TOL: f64 = 1e-4;
const JACOBI_TOL: f64 = 1e-6;

type Verdict = Result<String, String>;

fn bump() -> ChartMetric {
    ChartMetric::new(MetricFamily::ConformalBump { amplitude: 0.2, center: [0.35, 0.25], width: 0.8 }, 1.0).unwrap()
}

fn unit(chart: &ChartMetric, z: [f64; 2], angle: f64) -> [f64; 2] {
    let e = [angle.cos(), angle.sin()];
    let n = chart.covector_norm(z, e).unwrap();
    [e[0] / n, e[1] / n]
}

fn check(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Scenario runs shared between criteria, keyed by (subcommand, config).
struct Suite {
    root: PathBuf,
    configs: PathBuf,
    runs: BTreeMap<(String, String), PathBuf>,
}

impl Suite {
    fn run_into(&self, dir: &Path, sub: Subcommand, config: &str, threads: Option<usize>) -> Result<PathBuf, String> {
        let out = dir.join(format!("{}-{config}", sub.name()));
        let inv = Invocation { config: self.configs.join(format!("{config}.json")), out: Some(out.clone()), threads, seed: None };
        run(sub, &inv).map_err(|e| format!("{} {config}: {e}", sub.name()))?;
        Ok(out)
    }

    fn get(&mut self, sub: Subcommand, config: &str) -> Result<PathBuf, String> {
        let key = (sub.name().to_string(), config.to_string());
        if let Some(p) = self.runs.get(&key) {
            return Ok(p.clone());
        }
        let out = self.run_into(&self.root.join("a"), sub, config, None)?;
        self.runs.insert(key, out.clone());
        Ok(out)
    }
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let head: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(head.iter().cloned().zip(rec.iter().map(String::from)).collect())
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or(f64::NAN)
}

fn pair_identity() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, chart) in [("euclidean", ChartMetric::euclidean(1.0)), ("bump", bump())] {
        let z0 = [0.0, 0.0];
        let probe =
            FbiProbe::build(&chart, z0, unit(&chart, z0, 0.0), ProbeParams::default(), GeodesicOptions::default()).map_err(|e| e.to_string())?;
        let pair = &probe.pair;
        let mut rng = ChaCha8Rng::seed_from_u64(20240611);
        let r = 0.9 * pair.radius;
        let (mut defect, mut backend, mut n) = (0.0f64, 0.0f64, 0);
        while n < 500 {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if v.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
                continue;
            }
            n += 1;
            let xi = pair.covector_at([r * v[0], r * v[1]], r * v[2]).map_err(|e| e.to_string())?;
            let (w1, w2) = pair.pair_map(&xi).map_err(|e| e.to_string())?;
            let miss = linalg::sub(linalg::add(w1, w2), linalg::scale(pair.t0, xi.unit().xi));
            defect = defect.max(chart.covector_norm(xi.z, miss).map_err(|e| e.to_string())?);
            if name == "euclidean" {
                let (v1, v2) = pair.pair_map_pt(&xi).map_err(|e| e.to_string())?;
                backend = backend.max(linalg::norm(linalg::sub(w1, v1)).max(linalg::norm(linalg::sub(w2, v2))));
            }
        }
        ok &= defect <= PAIR_TOL && backend <= BACKEND_TOL;
        parts.push(format!("{name}: max defect {defect:.1e}, backend diff {backend:.1e}"));
    }
    check(ok, parts.join("; "))
}

fn riccati() -> Verdict {
    let grid = |lo: f64, hi: f64| (0..=400).map(move |k| lo + (hi - lo) * k as f64 / 400.0);
    let flat = RiccatiSolution::solve_with(|_| 0.0, C::i(), -3.0, 3.0).map_err(|e| e.to_string())?;
    let e0 = grid(-3.0, 3.0).map(|t| (flat.h_at(t) - C::new(t, 1.0) / (1.0 + t * t)).norm()).fold(0.0, f64::max);
    // F = -1 (K = 1): Y = cos t + H0 sin t.
    let mut e1 = 0.0f64;
    for h0 in [C::i(), C::new(0.3, 0.8), C::new(-0.5, 2.0)] {
        let s = RiccatiSolution::solve_with(|_| 1.0, h0, -2.5, 2.5).map_err(|e| e.to_string())?;
        for t in grid(-2.5, 2.5) {
            let (sn, cs) = t.sin_cos();
            let h = (h0 * cs - sn) / (h0 * sn + cs);
            e1 = e1.max((s.h_at(t) - h).norm());
        }
    }
    let mut min_im = f64::INFINITY;
    let mut beams = 0;
    for chart in [ChartMetric::euclidean(1.0), bump()] {
        for k in 0..4 {
            let d = Direction { z: [0.0, 0.0], angle: FRAC_PI_2 * k as f64 + 0.2 };
            let xi = d.covector(&chart).map_err(|e| e.to_string())?;
            let probe = FbiProbe::build(&chart, d.z, xi, ProbeParams::default(), GeodesicOptions::default()).map_err(|e| e.to_string())?;
            let point = probe.at(&PointedCovector::new(&chart, d.z, xi).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            for b in &point.beams {
                min_im = min_im.min(b.riccati.min_im_h(2000));
                beams += 1;
            }
        }
    }
    check(
        e0 <= RICCATI_TOL && e1 <= RICCATI_TOL && min_im > 0.0,
        format!("flat error {e0:.1e}, K=1 error {e1:.1e}, min Im H {min_im:.3} over {beams} probe beams"),
    )
}

fn residual_slopes() -> Verdict {
    let chart = ChartMetric::euclidean(1.0);
    let taus = [25.0, 50.0, 100.0, 200.0, 400.0];
    let z = [0.0, 0.0];
    let xi = unit(&chart, z, 0.0);
    let path = geodesic::shoot(&chart, z, xi, &GeodesicOptions::default()).map_err(|e| e.to_string())?;
    let frame = Coframe::from_first(&chart, z, xi).map_err(|e| e.to_string())?;
    let fc = FermiChart::default_tube(&chart, &path, &frame).map_err(|e| e.to_string())?;
    let mut fits = Vec::new();
    for order in [0, 1] {
        let beam = GaussianBeam::from_fermi(fc.clone(), order, C::i()).map_err(|e| e.to_string())?;
        let reps =
            taus.iter().map(|&t| residual_norm(&beam, t, &ResidualOptions::default())).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = reps.iter().map(|r| r.residual.ln()).collect();
        let (slope, r2) = linear_fit(&lx, &ly);
        let (mx, my) = (lx.iter().sum::<f64>() / 5.0, ly.iter().sum::<f64>() / 5.0);
        let rms = (lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / 5.0).sqrt();
        let norms: Vec<f64> = reps.iter().map(|r| r.norm).collect();
        let band = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
        fits.push((slope, r2, band, rms));
    }
    let (s0, r0, b0, e0) = fits[0];
    let (s1, r1, b1, e1) = fits[1];
    check(
        s1 <= s0 - SLOPE_GAIN && r0 >= MIN_R2 && r1 >= MIN_R2 && b0 <= NORM_BAND && b1 <= NORM_BAND,
        format!(
            "slope N=0 {s0:.3} (R2 {r0:.4}, fit rms {e0:.1e}, band {b0:.3}), N=1 {s1:.3} (R2 {r1:.4}, fit rms {e1:.1e}, band {b1:.3}), gain {:.3}",
            s0 - s1
        ),
    )
}

fn phase_audit(suite: &mut Suite) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for config in ["euclidean_jump", "bump_jump"] {
        let rows = read_csv(&suite.get(Subcommand::PhaseAudit, config)?.join("phase_audit.csv"))?;
        let passed = rows.iter().filter(|r| r["pass"] == "true").count();
        let worst_diag = rows.iter().map(|r| num(r, "diagonal")).fold(0.0, f64::max);
        let min_hess = rows.iter().map(|r| num(r, "hessian_min_eig")).fold(f64::INFINITY, f64::min);
        ok &= !rows.is_empty() && passed == rows.len();
        parts.push(format!("{config}: {passed}/{} pass (max |Phi| on diagonal {worst_diag:.1e}, min Hessian eig {min_hess:.3})", rows.len()));
    }
    check(ok, parts.join("; "))
}

/// T over the unit disk by polar Gauss-Legendre with both order-0 flat
/// beams written out by hand: beam j runs along omega_j through 0 with
/// Theta = t + H(t) y^2 / 2, H = (t + i) / (1 + t^2), a0 = (1 + i t)^{-1/2}.
fn polar_oracle(point: &ProbePoint, f: &dyn ScalarField, tau: f64, theta: (f64, f64)) -> C {
    let gl = GaussLegendre::new(16);
    let rs = gl.composite(0.0, 1.0, 160);
    let ths = gl.composite(theta.0, theta.1, 320);
    let beam = |j: usize, x: [f64; 2]| {
        let w = point.omega[j];
        let t = x[0] * w[0] + x[1] * w[1];
        let y = -x[0] * w[1] + x[1] * w[0];
        let chi = plateau_cutoff(y / point.beams[j].delta()).0;
        if chi == 0.0 {
            return C::default();
        }
        let h = C::new(t, 1.0) / (1.0 + t * t);
        tau.powf(0.25) * chi * C::new(1.0, t).powf(-0.5) * (C::i() * tau * (t + 0.5 * h * y * y)).exp()
    };
    let mut sum = C::default();
    for &(th, wt) in &ths {
        let (s, c) = th.sin_cos();
        for &(r, wr) in &rs {
            let x = [r * c, r * s];
            let fx = f.eval(x);
            if fx != 0.0 {
                sum += wt * wr * r * fx * tau * beam(0, x) * beam(1, x);
            }
        }
    }
    sum
}

fn oracles() -> Result<String, String> {
    let chart = ChartMetric::euclidean(1.0);
    let d = Direction { z: [0.0, 0.0], angle: 0.0 };
    let xi = d.covector(&chart).map_err(|e| e.to_string())?;
    let params = ProbeParams { order: 0, ..Default::default() };
    let probe = FbiProbe::build(&chart, d.z, xi, params, GeodesicOptions::default()).map_err(|e| e.to_string())?;
    let point = probe.at(&PointedCovector::new(&chart, d.z, xi).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let opts = TransformOptions::default();
    let jump = TestFunction::HalfPlaneJump { point: [0.0, 0.0], normal: [1.0, 0.0] };
    let gauss = TestFunction::Gaussian { center: [0.0, 0.0], sigma: 0.5 };
    let mut worst = 0.0f64;
    for (f, th) in [(&gauss, (0.0, 2.0 * PI)), (&jump, (-FRAC_PI_2, FRAC_PI_2))] {
        let maps = TransformMaps::build_along(&point, 25.0, f.line_direction(), &opts).map_err(|e| e.to_string())?;
        for tau in [25.0, 50.0] {
            let t = transform(&point, &maps, f, tau, &opts);
            let o = polar_oracle(&point, f, tau, th);
            worst = worst.max((t.value - o).norm() / o.norm().max(1e-6 * t.l1));
        }
    }
    if worst <= ORACLE_REL {
        Ok(format!("order-0 polar oracle rel err {worst:.1e}"))
    } else {
        Err(format!("order-0 polar oracle rel err {worst:.1e} > {ORACLE_REL:.0e}"))
    }
}

type Rows = Vec<BTreeMap<String, String>>;

fn scan_rows(suite: &mut Suite, config: &str) -> Result<(Rows, Rows), String> {
    let dir = suite.get(Subcommand::WfScan, config)?;
    Ok((read_csv(&dir.join("wf_scan.csv"))?, read_csv(&dir.join("wf_scan_samples.csv"))?))
}

fn singular_angles(rows: &[BTreeMap<String, String>]) -> Vec<f64> {
    rows.iter().filter(|r| r["classification"] == "SINGULAR").map(|r| num(r, "angle_deg")).collect()
}

fn detection(suite: &mut Suite) -> Verdict {
    let (jump, samples) = scan_rows(suite, "euclidean_jump")?;
    let (gauss, _) = scan_rows(suite, "euclidean_gaussian")?;
    let slope_at = |deg: f64| jump.iter().find(|r| (num(r, "angle_deg") - deg).abs() < 1e-9).map(|r| num(r, "slope")).unwrap_or(f64::NAN);
    let sep = slope_at(0.0) - slope_at(45.0);
    let sing = singular_angles(&jump);
    let smooth_gauss = gauss.iter().filter(|r| r["classification"] == "SMOOTH").count();
    // Stationary phase at the conormal: |T| -> sqrt(pi) with an O(1/tau) gap.
    let mag =
        |tau: f64| samples.iter().find(|r| r["index"] == "0" && (num(r, "tau") - tau).abs() < 1e-9).map(|r| num(r, "magnitude")).unwrap_or(f64::NAN);
    let gaps: Vec<f64> = [100.0, 200.0, 400.0].iter().map(|&t| mag(t) - PI.sqrt()).collect();
    let one_over_tau = gaps.windows(2).all(|w| (1.6..2.4).contains(&(w[0] / w[1])));
    let oracle = oracles();
    let msg = format!(
        "jump: {} rows, SINGULAR at {sing:?}, separation {sep:.3}; gaussian: {smooth_gauss}/{} SMOOTH; |T(400)| - sqrt(pi) = {:.2e}, gap ratios {:.2}/{:.2}; {}",
        jump.len(),
        gauss.len(),
        gaps[2],
        gaps[0] / gaps[1],
        gaps[1] / gaps[2],
        oracle.as_ref().unwrap_or_else(|e| e)
    );
    let ok = jump.len() == 16
        && sing == vec![0.0, 180.0]
        && sep >= SEPARATION
        && gauss.len() == 16
        && smooth_gauss == 16
        && gaps[2].abs() <= SQRT_PI_TOL
        && one_over_tau
        && oracle.is_ok();
    check(ok, msg)
}

fn curved_detection(suite: &mut Suite) -> Verdict {
    let (flat, _) = scan_rows(suite, "euclidean_jump")?;
    let (curved, _) = scan_rows(suite, "bump_jump")?;
    let pattern = |rows: &[BTreeMap<String, String>]| rows.iter().map(|r| r["classification"].clone()).collect::<Vec<_>>();
    let same = pattern(&flat) == pattern(&curved);
    let slopes: Vec<String> = curved.iter().filter(|r| r["classification"] == "SINGULAR").map(|r| format!("{:.3}", num(r, "slope"))).collect();
    check(
        same && curved.len() == 16,
        format!(
            "bump: SINGULAR at {:?} (slopes {}), pattern {} euclidean",
            singular_angles(&curved),
            slopes.join(", "),
            if same { "matches" } else { "differs from" }
        ),
    )
}

fn su_regularity(suite: &mut Suite) -> Verdict {
    let flat = read_csv(&suite.get(Subcommand::SuAudit, "euclidean_jump")?.join("su_audit.csv"))?;
    let flat_pass = flat.iter().filter(|r| r["pass"] == "true").count();
    let cap = read_csv(&suite.get(Subcommand::SuAudit, "cap_su")?.join("su_audit.csv"))?;
    let failing: Vec<_> = cap.iter().filter(|r| r["pass"] == "false").collect();
    let has = |r: &BTreeMap<String, String>, reason: &str| r["reasons"].split(';').any(|x| x == reason);
    let conjugate = failing.iter().filter(|r| has(r, "conjugate-point")).count();
    // The cap is larger than a hemisphere, so its boundary is not convex and
    // chords near the rim can only leave tangentially.
    let tangential_only = failing.iter().filter(|r| r["reasons"] == "tangential").count();
    let times: Vec<f64> = failing
        .iter()
        .flat_map(|r| r["conjugate_times"].split(';').filter(|s| !s.is_empty()).map(|s| s.parse::<f64>().unwrap_or(f64::NAN)))
        .collect();
    let worst = times.iter().map(|t| (t.abs() - PI).abs()).fold(0.0, f64::max);
    // A point deep in the cap with radial candidate geodesics through the pole.
    let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: 1.0 }, 3.0).unwrap();
    let z = [-1.8, 0.0];
    let v = su_check(&c, z, unit(&c, z, FRAC_PI_2), 2, &GeodesicOptions::default()).map_err(|e| e.to_string())?;
    let deep = !v.pass && v.reasons == vec![SuFailure::ConjugatePoint] && v.conjugate_times.iter().all(|t| (t.abs() - PI).abs() <= CONJUGATE_TOL);
    check(
        flat.len() == 320 && flat_pass == 320 && conjugate > 0 && conjugate + tangential_only == failing.len() && !times.is_empty() && worst <= CONJUGATE_TOL && deep,
        format!(
            "euclidean {flat_pass}/{} pass; K=1 cap {} of {} fail ({conjugate} conjugate-point, {tangential_only} tangential only), {} conjugate times within {worst:.1e} of pi; deep point {}",
            flat.len(),
            failing.len(),
            cap.len(),
            times.len(),
            if deep { "fails as expected" } else { "unexpected verdict" }
        ),
    )
}

fn jacobi() -> Verdict {
    let o = GeodesicOptions::default();
    let mut worst = 0.0f64;
    let mut found = Vec::new();
    // (K, chart radius, start, expected roots): j = sin(sqrt(K) t) / sqrt(K).
    for (k, radius, x0, want) in [(1.0, 3.0, -1.8, vec![PI]), (4.0, 4.0, -3.6, vec![FRAC_PI_2]), (0.25, 8.0, -7.2, vec![2.0 * PI])] {
        let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: k }, radius).unwrap();
        let z = [x0, 0.0];
        let p = geodesic::shoot(&c, z, unit(&c, z, 0.0), &o).map_err(|e| e.to_string())?;
        let roots = jacobi_scan(&c, &p).map_err(|e| e.to_string())?;
        if roots.len() != want.len() {
            return Err(format!("K = {k}: roots {roots:?}, expected {want:?}"));
        }
        for (r, w) in roots.iter().zip(&want) {
            worst = worst.max((r - w).abs());
        }
        found.push(roots.len());
    }
    // j = sinh t never vanishes.
    let c = ChartMetric::new(MetricFamily::ConstantCurvature { curvature: -1.0 }, 1.9).unwrap();
    let p = geodesic::shoot(&c, [0.2, 0.1], unit(&c, [0.2, 0.1], 1.0), &o).map_err(|e| e.to_string())?;
    let hyper = jacobi_scan(&c, &p).map_err(|e| e.to_string())?;
    check(worst <= JACOBI_TOL && hyper.is_empty(), format!("sin roots within {worst:.1e} (K = 1, 4, 1/4), {} sinh roots", hyper.len()))
}

const SCENARIOS: [(Subcommand, &str); 10] = [
    (Subcommand::SuAudit, "euclidean_jump"),
    (Subcommand::SuAudit, "cap_su"),
    (Subcommand::PairAudit, "euclidean_jump"),
    (Subcommand::PairAudit, "bump_jump"),
    (Subcommand::BeamResidual, "euclidean_gaussian"),
    (Subcommand::PhaseAudit, "euclidean_jump"),
    (Subcommand::PhaseAudit, "bump_jump"),
    (Subcommand::WfScan, "euclidean_jump"),
    (Subcommand::WfScan, "euclidean_gaussian"),
    (Subcommand::WfScan, "bump_jump"),
];

fn determinism(suite: &mut Suite) -> Verdict {
    let mut compared = 0;
    let mut diffs = Vec::new();
    for (sub, config) in SCENARIOS {
        let a = suite.get(sub, config)?;
        let b = suite.run_into(&suite.root.join("b"), sub, config, Some(2))?;
        let mut names: Vec<_> = std::fs::read_dir(&a).map_err(|e| e.to_string())?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
        names.retain(|n| n.to_string_lossy().ends_with(".csv"));
        names.sort();
        for n in names {
            let (x, y) = (std::fs::read(a.join(&n)), std::fs::read(b.join(&n)));
            compared += 1;
            if x.map_err(|e| e.to_string())? != y.map_err(|e| e.to_string())? {
                diffs.push(format!("{}/{}", a.file_name().unwrap().to_string_lossy(), n.to_string_lossy()));
            }
        }
    }
    check(
        compared > 0 && diffs.is_empty(),
        format!("{compared} CSVs over {} scenarios, second run with 2 threads; differing: {diffs:?}", SCENARIOS.len()),
    )
}

fn main() {
    let root = std::env::temp_dir().join(format!("wfbeam-acceptance-{}", std::process::id()));
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut suite = Suite { root: root.clone(), configs, runs: BTreeMap::new() };
    type Criterion = fn(&mut Suite) -> Verdict;
    let criteria: [(&str, u64, Criterion); 9] = [
        ("pair identity", 10, |_| pair_identity()),
        ("Riccati positivity and closed forms", 5, |_| riccati()),
        ("quasimode residual slopes", 300, |_| residual_slopes()),
        ("phase audit", 60, phase_audit),
        ("detection separation", 900, detection),
        ("curved detection", 1200, curved_detection),
        ("SU regularity", 120, su_regularity),
        ("Jacobi closed forms", 10, |_| jacobi()),
        ("determinism", 0, determinism),
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&mut suite))).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let late = *limit > 0 && took > Duration::from_secs(*limit);
        let (tag, detail) = match (&verdict, late) {
            (Ok(m), false) => ("PASS", m.clone()),
            (Ok(m), true) => ("FAIL", format!("{m}; over the {limit} s limit")),
            (Err(m), _) => ("FAIL", m.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        let limit = if *limit > 0 { format!(" / {limit} s") } else { String::new() };
        println!("{tag} {} {name}: {detail} [{:.1} s{limit}]", i + 1, took.as_secs_f64());
    }
    let _ = std::fs::remove_dir_all(&root);
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
