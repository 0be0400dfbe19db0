use super::{FbiError, FbiProbe, ProbePoint};
use crate::linalg::{self, Mat2, Vec2};
use crate::manifold::PointedCovector;
use serde::Serialize;

/// Numerical check of the phase conditions at one probe covector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseAudit {
    /// |Phi(xi, pi(xi))|.
    pub diagonal: f64,
    /// |d_x Phi - t0 xi|_g at pi(xi).
    pub differential_defect: f64,
    /// Smallest eigenvalue of the Hessian of Im Phi at pi(xi), measured in
    /// an orthonormal frame.
    pub hessian_min_eig: f64,
    /// Minimum of Im Phi over a grid on the probe support.
    pub min_im_phase: f64,
    /// max |Phi(2 xi, x) - 2 Phi(xi, x)| over sample points.
    pub homogeneity_defect: f64,
}

impl PhaseAudit {
    /// All five phase conditions at a covector of length `xi_norm`.
    pub fn passes(&self, xi_norm: f64) -> bool {
        self.diagonal <= 1e-8
            && self.differential_defect <= 1e-6 * xi_norm
            && self.hessian_min_eig >= 0.1 * xi_norm
            && self.min_im_phase >= -1e-9
            && self.homogeneity_defect <= 1e-9
    }
}

pub fn phase_audit(probe: &FbiProbe, point: &ProbePoint) -> Result<PhaseAudit, FbiError> {
    let chart = *probe.chart();
    let z = point.xi.z;
    let phi = |x: Vec2| point.phase(x);
    let diagonal = phi(z)?.norm();

    let h = 1e-5;
    let mut d_re = [0.0; 2];
    let mut d_im = [0.0; 2];
    for i in 0..2 {
        let mut e = [0.0; 2];
        e[i] = h;
        let d = (phi(linalg::add(z, e))? - phi(linalg::sub(z, e))?) / (2.0 * h);
        d_re[i] = d.re;
        d_im[i] = d.im;
    }
    let target = linalg::scale(point.t0, point.xi.xi);
    let a = chart.covector_norm(z, linalg::sub(d_re, target))?;
    let b = chart.covector_norm(z, d_im)?;
    let differential_defect = a.hypot(b);

    let hh = 1e-4;
    let im = |dx: f64, dy: f64| -> Result<f64, FbiError> { Ok(phi(linalg::add(z, [dx, dy]))?.im) };
    let c0 = im(0.0, 0.0)?;
    let hxx = (im(hh, 0.0)? - 2.0 * c0 + im(-hh, 0.0)?) / (hh * hh);
    let hyy = (im(0.0, hh)? - 2.0 * c0 + im(0.0, -hh)?) / (hh * hh);
    let hxy = (im(hh, hh)? - im(hh, -hh)? - im(-hh, hh)? + im(-hh, -hh)?) / (4.0 * hh * hh);
    let hess: Mat2 = [[hxx, hxy], [hxy, hyy]];
    let s = linalg::sym_inv_sqrt(&chart.metric_at(z)?);
    let (hessian_min_eig, _) = linalg::sym_eigenvalues(&linalg::mat_mul(&s, &linalg::mat_mul(&hess, &s)));

    // Grid over the support: both cutoffs nonzero and inside M.
    let r = point.beams[0].delta().min(point.beams[1].delta()).min(2.0 * chart.radius);
    let n = 40;
    let mut min_im = f64::INFINITY;
    let mut guess: [Option<(f64, f64)>; 2] = [None, None];
    for i in 0..=n {
        for k in 0..=n {
            let kk = if i % 2 == 0 { k } else { n - k };
            let x = [z[0] - r + 2.0 * r * i as f64 / n as f64, z[1] - r + 2.0 * r * kk as f64 / n as f64];
            if !chart.contains(x) {
                continue;
            }
            let mut c = [(0.0, 0.0); 2];
            let mut ok = true;
            for j in 0..2 {
                match point.beams[j].fermi.inverse(x, guess[j]) {
                    Ok(v) => {
                        c[j] = v;
                        guess[j] = Some(v);
                    }
                    Err(_) => ok = false,
                }
            }
            if ok && point.in_support(&c) {
                min_im = min_im.min(point.phase_from(&c).im);
            }
        }
    }

    let doubled = probe.at(&PointedCovector::new(&chart, z, linalg::scale(2.0, point.xi.xi))?)?;
    let mut homogeneity_defect: f64 = 0.0;
    for k in 0..9 {
        let a = std::f64::consts::PI * k as f64 / 4.5;
        let rr = 0.05 * chart.radius * (1 + k % 3) as f64;
        let x = [z[0] + rr * a.cos(), z[1] + rr * a.sin()];
        if !chart.contains(x) {
            continue;
        }
        homogeneity_defect = homogeneity_defect.max((doubled.phase(x)? - 2.0 * phi(x)?).norm());
    }

    Ok(PhaseAudit { diagonal, differential_defect, hessian_min_eig, min_im_phase: min_im, homogeneity_defect })
}
