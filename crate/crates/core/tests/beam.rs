use num_complex::Complex64 as C;
use proptest::prelude::*;
use wfbeam::beam::{plateau_cutoff, residual_norm, FermiChart, GaussianBeam, ResidualOptions, RiccatiSolution};
use wfbeam::fbi::linear_fit;
use wfbeam::geodesic::{self, GeodesicOptions};
use wfbeam::pairing::Coframe;
use wfbeam::{ChartMetric, MetricFamily};

fn bump() -> ChartMetric {
    ChartMetric::new(MetricFamily::ConformalBump { amplitude: 0.2, center: [0.35, 0.25], width: 0.8 }, 1.0).unwrap()
}

fn fermi(chart: &ChartMetric, z: [f64; 2], angle: f64, delta: Option<f64>) -> FermiChart {
    let e = [angle.cos(), angle.sin()];
    let n = chart.covector_norm(z, e).unwrap();
    let xi = [e[0] / n, e[1] / n];
    let path = geodesic::shoot(chart, z, xi, &GeodesicOptions::default()).unwrap();
    let frame = Coframe::from_first(chart, z, xi).unwrap();
    match delta {
        Some(d) => FermiChart::new(chart, &path, &frame, d).unwrap(),
        None => FermiChart::default_tube(chart, &path, &frame).unwrap(),
    }
}

#[test]
fn flat_riccati_matches_closed_form() {
    let r = RiccatiSolution::solve_with(|_| 0.0, C::i(), -2.0, 2.0).unwrap();
    for k in 0..=40 {
        let t = -2.0 + 4.0 * k as f64 / 40.0;
        let h = C::new(t, 1.0) / (1.0 + t * t);
        assert!((r.h_at(t) - h).norm() < 1e-8, "t = {t}");
        assert!(r.h_at(t).im > 0.0);
        let a0 = C::new(1.0, t).powf(-0.5);
        assert!((r.a0_at(t) - a0).norm() < 1e-8);
    }
}

#[test]
fn unit_sphere_riccati_is_constant() {
    // K = 1, H(0) = i: Y = e^{it}, H = i.
    let r = RiccatiSolution::solve_with(|_| 1.0, C::i(), -3.0, 3.0).unwrap();
    for k in 0..=60 {
        let t = -3.0 + 6.0 * k as f64 / 60.0;
        assert!((r.h_at(t) - C::i()).norm() < 1e-8, "t = {t}");
    }
    assert!(r.residual_max(200) < 1e-8);
    assert!((r.min_abs_y() - 1.0).abs() < 1e-8);
}

#[test]
fn riccati_rejects_real_data() {
    assert!(RiccatiSolution::solve_with(|_| 0.0, C::new(1.0, 0.0), -1.0, 1.0).is_err());
    assert!(RiccatiSolution::solve_with(|_| 0.0, C::i(), 0.0, 1.0).is_err());
}

#[test]
fn euclidean_fermi_chart_is_the_identity() {
    let c = ChartMetric::euclidean(1.0);
    let fc = fermi(&c, [0.0, 0.0], 0.0, Some(0.3));
    for (t, y) in [(0.0, 0.0), (0.4, 0.1), (-0.7, -0.25), (0.2, 0.29)] {
        let (x, _) = fc.forward(t, y).unwrap();
        assert!((x[0] - t).abs() < 1e-12 && (x[1] - y).abs() < 1e-12, "{x:?}");
        let g = fc.pullback_metric(t, y).unwrap();
        assert!((g[0][0] - 1.0).abs() < 1e-12 && g[0][1].abs() < 1e-12 && (g[1][1] - 1.0).abs() < 1e-12);
        let (tt, yy) = fc.inverse(x, None).unwrap();
        assert!((tt - t).abs() < 1e-12 && (yy - y).abs() < 1e-12);
    }
}

#[test]
fn euclidean_order_zero_beam_is_explicit() {
    let c = ChartMetric::euclidean(1.0);
    let beam = GaussianBeam::from_fermi(fermi(&c, [0.0, 0.0], 0.0, Some(0.3)), 0, C::i()).unwrap();
    let s = C::from(30.0);
    for (t, y) in [(0.0, 0.0), (0.5, 0.1), (-0.8, -0.12), (0.3, 0.05)] {
        let h = C::new(t, 1.0) / (1.0 + t * t);
        assert!((beam.phase(t, y) - (t + 0.5 * h * y * y)).norm() < 1e-10);
        assert!((beam.amplitude(s, t, y) - C::new(1.0, t).powf(-0.5)).norm() < 1e-10);
        let chi = plateau_cutoff(y / beam.delta()).0;
        let want = 30f64.powf(0.25) * chi * C::new(1.0, t).powf(-0.5) * (C::i() * s * (t + 0.5 * h * y * y)).exp();
        assert!((beam.eval_fermi(s, t, y) - want).norm() < 1e-9);
    }
}

#[test]
fn order_one_gains_a_power_of_tau() {
    let taus = [25.0, 50.0, 100.0, 200.0, 400.0];
    let fc = fermi(&bump(), [0.0, 0.0], 0.0, None);
    let opts = ResidualOptions::default();
    let mut slopes = Vec::new();
    for order in [0, 1] {
        let beam = GaussianBeam::from_fermi(fc.clone(), order, C::i()).unwrap();
        let reps: Vec<_> = taus.iter().map(|&tau| residual_norm(&beam, tau, &opts).unwrap()).collect();
        let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = reps.iter().map(|r| r.residual.ln()).collect();
        let (slope, r2) = linear_fit(&lx, &ly);
        assert!(r2 >= 0.98, "order {order}: r2 {r2}");
        let norms: Vec<f64> = reps.iter().map(|r| r.norm).collect();
        let band = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(band <= 3.0, "order {order}: norm band {band}");
        slopes.push(slope);
    }
    assert!(slopes[1] <= slopes[0] - 1.0, "{slopes:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn riccati_stays_in_the_upper_half_plane(a in 0.0f64..2.0, b in 0.1f64..3.0, k in -1.0f64..1.0) {
        let r = RiccatiSolution::solve_with(|t| k * (1.0 + 0.5 * t.sin()), C::new(a, b), -1.5, 1.5).unwrap();
        prop_assert!(r.min_im_h(400) > 0.0);
        prop_assert!(r.residual_max(200) < 1e-8);
    }

    #[test]
    fn bump_beam_phase_has_positive_imaginary_part(t in -0.8f64..0.8, u in -1.0f64..1.0) {
        let beam = bump_beam();
        let y = u * beam.delta();
        let theta = beam.phase(t, y);
        prop_assert!(theta.im >= 0.25 * beam.riccati.h_at(t).im * y * y - 1e-14);
    }
}

fn bump_beam() -> &'static GaussianBeam {
    static BEAM: std::sync::OnceLock<GaussianBeam> = std::sync::OnceLock::new();
    BEAM.get_or_init(|| GaussianBeam::from_fermi(fermi(&bump(), [0.0, 0.0], 0.6, None), 1, C::i()).unwrap())
}
