use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use wfbeam::beam::plateau_cutoff;
use wfbeam::fbi::*;
use wfbeam::quad::GaussLegendre;
use wfbeam::{ChartMetric, MetricFamily, PointedCovector};

const TAUS: [f64; 9] = [25.0, 35.0, 50.0, 71.0, 100.0, 141.0, 200.0, 283.0, 400.0];
const JUMP: TestFunction = TestFunction::HalfPlaneJump { point: [0.0, 0.0], normal: [1.0, 0.0] };
const GAUSS: TestFunction = TestFunction::Gaussian { center: [0.0, 0.0], sigma: 0.5 };

fn probe_point(chart: &ChartMetric, angle: f64, params: ProbeParams) -> ProbePoint {
    let d = Direction { z: [0.0, 0.0], angle };
    let xi = d.covector(chart).unwrap();
    let probe = FbiProbe::build(chart, d.z, xi, params, Default::default()).unwrap();
    probe.at(&PointedCovector::new(chart, d.z, xi).unwrap()).unwrap()
}

fn value(point: &ProbePoint, f: &dyn ScalarField, tau: f64) -> TransformValue {
    let opts = TransformOptions::default();
    let maps = TransformMaps::build_along(point, TAUS[0], f.line_direction(), &opts).unwrap();
    transform(point, &maps, f, tau, &opts)
}

/// T over the disk by polar Gauss-Legendre with both order-0 euclidean
/// beams written out by hand: beam j runs along omega_j through 0 with
/// Theta = t + H(t) y^2 / 2, H = (t + i) / (1 + t^2), a0 = (1 + i t)^{-1/2}.
fn polar_oracle(omega: [[f64; 2]; 2], deltas: [f64; 2], f: &dyn ScalarField, tau: f64, theta: (f64, f64)) -> C {
    let gl = GaussLegendre::new(16);
    let rs = gl.composite(0.0, 1.0, 160);
    let ths = gl.composite(theta.0, theta.1, 320);
    let beam = |w: [f64; 2], delta: f64, x: [f64; 2]| {
        let t = x[0] * w[0] + x[1] * w[1];
        let y = -x[0] * w[1] + x[1] * w[0];
        let chi = plateau_cutoff(y / delta).0;
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
            if fx == 0.0 {
                continue;
            }
            sum += wt * wr * r * fx * tau * beam(omega[0], deltas[0], x) * beam(omega[1], deltas[1], x);
        }
    }
    sum
}

#[test]
fn decay_fit_classifies_synthetic_power_laws() {
    let floors = [0.0; 9];
    let fit = |p: f64| decay_fit(&TAUS, &TAUS.map(|t| 3.0 * t.powf(p)), &floors, 5.0, 2.5);
    let s = fit(-8.0);
    assert!((s.slope + 8.0).abs() < 1e-12 && s.classification == Classification::Smooth && s.flag.is_none());
    let s = fit(-1.0);
    assert!((s.slope + 1.0).abs() < 1e-12 && s.classification == Classification::Singular);
    assert_eq!(fit(-3.5).classification, Classification::Inconclusive);
    let mags = TAUS.map(|t| t.powf(-12.0));
    let s = decay_fit(&TAUS, &mags, &[1e-25; 9], 5.0, 2.5);
    assert_eq!((s.classification, s.flag.as_deref()), (Classification::Smooth, Some("floor")));
    let s = decay_fit(&TAUS, &[0.0; 9], &floors, 5.0, 2.5);
    assert_eq!(s.flag.as_deref(), Some("underflow"));
}

#[test]
fn transform_matches_polar_oracle_at_order_zero() {
    let c = ChartMetric::euclidean(1.0);
    let params = ProbeParams { order: 0, ..Default::default() };
    let point = probe_point(&c, 0.0, params);
    let s = FRAC_1_SQRT_2;
    assert!((point.omega[0][0] - s).abs() < 1e-12 && (point.omega[0][1] - s).abs() < 1e-12);
    assert!((point.t0 - 2.0f64.sqrt()).abs() < 1e-12);
    let deltas = [point.beams[0].delta(), point.beams[1].delta()];
    for tau in [25.0, 50.0] {
        for (f, th) in [(&GAUSS, (0.0, 2.0 * PI)), (&JUMP, (-PI / 2.0, PI / 2.0))] {
            let t = value(&point, f, tau);
            let o = polar_oracle(point.omega, deltas, f, tau, th);
            let err = (t.value - o).norm();
            assert!(err <= 1e-8 * o.norm().max(1e-6 * t.l1), "{f:?} tau {tau}: {} vs {}", t.value, o);
        }
    }
}

#[test]
fn conormal_jump_approaches_stationary_phase_limit() {
    // Near z, Phi = sqrt(2) x1 + i |x|^2 / 2 and the jump leaves a half-line
    // Fresnel integral: |T| -> sqrt(pi) with an O(1/tau) correction.
    let c = ChartMetric::euclidean(1.0);
    let point = probe_point(&c, 0.0, ProbeParams::default());
    let d: Vec<f64> = [100.0, 200.0, 400.0].iter().map(|&t| value(&point, &JUMP, t).value.norm() - PI.sqrt()).collect();
    assert!(d[2].abs() < 0.02, "{d:?}");
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.4).contains(&ratio), "{d:?}");
    }
}

#[test]
fn transform_is_linear() {
    let c = ChartMetric::euclidean(1.0);
    let point = probe_point(&c, 0.4, ProbeParams::default());
    let g2 = TestFunction::Gaussian { center: [0.1, -0.05], sigma: 0.3 };
    let mix = Combination { terms: vec![(2.0, &GAUSS as &dyn ScalarField), (-3.0, &g2)] };
    for tau in [25.0, 71.0] {
        let a = value(&point, &GAUSS, tau);
        let b = value(&point, &g2, tau);
        let m = value(&point, &mix, tau);
        let want = 2.0 * a.value - 3.0 * b.value;
        assert!((m.value - want).norm() <= 1e-12 * (2.0 * a.l1 + 3.0 * b.l1), "tau {tau}");
    }
}

#[test]
fn scaling_f_keeps_the_classification() {
    let c = ChartMetric::euclidean(1.0);
    let params = ScanParams::default();
    let double = Combination { terms: vec![(2.0, &JUMP as &dyn ScalarField)] };
    for angle in [0.0, PI / 2.0] {
        let d = Direction { z: [0.0, 0.0], angle };
        let a = scan_direction(&c, &JUMP, 0, d, &params);
        let b = scan_direction(&c, &double, 0, d, &params);
        assert_eq!(a.fit.classification, b.fit.classification);
        assert!((a.fit.slope - b.fit.slope).abs() < 1e-9, "{} {}", a.fit.slope, b.fit.slope);
        for (x, y) in a.magnitudes.iter().zip(&b.magnitudes) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.max(1.0));
        }
    }
}

#[test]
fn classification_does_not_depend_on_the_seed_covector() {
    // <zeta_1, xi_hat_0> = 0.5 and 0.8.
    let c = ChartMetric::euclidean(1.0);
    for cos in [0.5f64, 0.8] {
        let mut params = ScanParams::default();
        params.probe.zeta_angle = cos.acos();
        let sing = scan_direction(&c, &JUMP, 0, Direction { z: [0.0, 0.0], angle: 0.0 }, &params);
        let smooth = scan_direction(&c, &JUMP, 1, Direction { z: [0.0, 0.0], angle: PI / 2.0 }, &params);
        assert_eq!(sing.fit.classification, Classification::Singular, "cos {cos}: {}", sing.fit.slope);
        assert_eq!(smooth.fit.classification, Classification::Smooth, "cos {cos}: {}", smooth.fit.slope);
    }
}

#[test]
fn phase_audit_passes_on_euclidean_and_bump() {
    let bump = ChartMetric::new(MetricFamily::ConformalBump { amplitude: 0.2, center: [0.35, 0.25], width: 0.8 }, 1.0).unwrap();
    for chart in [ChartMetric::euclidean(1.0), bump] {
        for k in 0..4 {
            let d = Direction { z: [0.0, 0.0], angle: PI * k as f64 / 2.0 + 0.3 };
            let xi = d.covector(&chart).unwrap();
            let probe = FbiProbe::build(&chart, d.z, xi, ProbeParams::default(), Default::default()).unwrap();
            let pc = PointedCovector::new(&chart, d.z, xi).unwrap();
            let audit = phase_audit(&probe, &probe.at(&pc).unwrap()).unwrap();
            assert!(audit.passes(pc.norm), "{audit:?}");
        }
    }
}

#[test]
fn impossible_probes_are_untestable() {
    let c = ChartMetric::euclidean(1.0);
    let params = ScanParams { taus: TAUS.to_vec(), ..Default::default() };
    let outside = scan_direction(&c, &JUMP, 0, Direction { z: [1.5, 0.0], angle: 0.0 }, &params);
    assert_eq!(outside.fit.classification, Classification::Untestable);
    assert!(outside.reason.is_some() && outside.magnitudes.is_empty());
    let mut flat = params.clone();
    flat.probe.zeta_angle = 0.0;
    let r = scan_direction(&c, &JUMP, 0, Direction { z: [0.0, 0.0], angle: 0.0 }, &flat);
    assert_eq!(r.fit.classification, Classification::Untestable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decay_fit_recovers_power_laws(p in -12.0f64..-0.1, a in 1e-3f64..1e3) {
        let fit = decay_fit(&TAUS, &TAUS.map(|t| a * t.powf(p)), &[0.0; 9], 5.0, 2.5);
        prop_assert!((fit.slope - p).abs() < 1e-9);
        let want = if p <= -5.0 { Classification::Smooth } else if p >= -2.5 { Classification::Singular } else { Classification::Inconclusive };
        prop_assert_eq!(fit.classification, want);
    }

    #[test]
    fn wave_front_of_a_jump_is_its_conormal(a in 0.0f64..std::f64::consts::TAU, s in -0.5f64..0.5) {
        let wf = JUMP.wave_front();
        let (sn, cs) = a.sin_cos();
        let on = wf.contains([0.0, s], [cs, sn], 1e-9);
        prop_assert_eq!(on, sn.abs() <= 1e-9);
        prop_assert!(!wf.contains([0.1, s], [1.0, 0.0], 1e-9));
    }
}
