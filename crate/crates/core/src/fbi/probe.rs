use super::FbiError;
use crate::beam::{FermiChart, GaussianBeam};
use crate::geodesic::{self, GeodesicOptions};
use crate::linalg::{self, Vec2};
use crate::manifold::{ChartMetric, PointedCovector};
use crate::pairing::{self, AdmissibleVerdict, Coframe, ExpChart, PairField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    /// Angle (radians) between the seed covector zeta_1 and xi_hat_0,
    /// measured in an orthonormal coframe; must lie in (0, pi/2).
    pub zeta_angle: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Beam truncation order (0 or 1).
    pub order: usize,
    /// Tube half-width; `None` picks half the largest working width.
    pub tube_half_width: Option<f64>,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams { zeta_angle: FRAC_PI_4, lambda1: 0.0, lambda2: 0.0, order: 1, tube_half_width: None }
    }
}

/// Pair field and reference frame around (z0, xi0).
#[derive(Debug, Clone)]
pub struct FbiProbe {
    pub pair: PairField,
    pub frame0: Coframe,
    pub params: ProbeParams,
    pub geodesic: GeodesicOptions,
}

/// Probe data at one covector xi: the admissible pair and its two beams.
#[derive(Debug, Clone)]
pub struct ProbePoint {
    pub xi: PointedCovector,
    pub omega: [Vec2; 2],
    pub t0: f64,
    pub beams: [GaussianBeam; 2],
    pub lambda: [f64; 2],
    pub admissible: AdmissibleVerdict,
}

impl FbiProbe {
    pub fn build(chart: &ChartMetric, z0: Vec2, xi0: Vec2, params: ProbeParams, geodesic: GeodesicOptions) -> Result<Self, FbiError> {
        if !(params.zeta_angle > 0.0 && params.zeta_angle < std::f64::consts::FRAC_PI_2) {
            return Err(FbiError::Precondition(format!("zeta angle {} must lie in (0, pi/2)", params.zeta_angle)));
        }
        if params.order > 1 {
            return Err(FbiError::Beam(crate::beam::BeamError::UnsupportedOrder(params.order)));
        }
        let ec = ExpChart::new(chart, z0)?;
        let xi_unit = linalg::scale(1.0 / chart.covector_norm(z0, xi0)?, xi0);
        let rotated = linalg::mat_vec(&linalg::rotation(params.zeta_angle), ec.to_orthonormal(xi_unit));
        let zeta1 = ec.from_orthonormal(rotated);
        let pair = PairField::build(chart, z0, xi_unit, zeta1)?;
        if pair.radius <= 0.0 {
            return Err(FbiError::Precondition("empty probe neighborhood".into()));
        }
        let frame0 = Coframe::from_first(chart, z0, xi_unit)?;
        Ok(FbiProbe { pair, frame0, params, geodesic })
    }

    pub fn chart(&self) -> &ChartMetric {
        &self.pair.chart
    }

    /// Probe data at `xi` (any length; only the base point and direction
    /// select the pair, |xi| scales the phase).
    pub fn at(&self, xi: &PointedCovector) -> Result<ProbePoint, FbiError> {
        let chart = self.pair.chart;
        let (w1, w2) = self.pair.pair_map(xi)?;
        let z = xi.z;
        let verdict = pairing::admissible_check(&chart, z, w1, w2, &self.geodesic)?;
        if !verdict.admissible {
            let mut reasons = Vec::new();
            for (j, tr) in verdict.transversality.iter().enumerate() {
                if !tr.nontangential {
                    reasons.push(format!("geodesic {} is tangential", j + 1));
                }
            }
            if verdict.crossings.len() != 1 {
                reasons.push(format!("geodesics meet {} times", verdict.crossings.len()));
            }
            return Err(FbiError::NotAdmissible(reasons.join("; ")));
        }
        let make = |w: Vec2| -> Result<GaussianBeam, FbiError> {
            let path = geodesic::shoot(&chart, z, w, &self.geodesic)?;
            let frame = pairing::frame_map(&chart, &self.frame0, &PointedCovector::new(&chart, z, w)?)?;
            let fermi = match self.params.tube_half_width {
                Some(d) => FermiChart::new(&chart, &path, &frame, d)?,
                None => FermiChart::default_tube(&chart, &path, &frame)?,
            };
            Ok(GaussianBeam::from_fermi(fermi, self.params.order, C::i())?)
        };
        let beams = [make(w1)?, make(w2)?];
        Ok(ProbePoint { xi: *xi, omega: [w1, w2], t0: self.pair.t0, beams, lambda: [self.params.lambda1, self.params.lambda2], admissible: verdict })
    }
}

impl ProbePoint {
    pub fn xi_norm(&self) -> f64 {
        self.xi.norm
    }

    /// Fermi coordinates of x for both beams (exact Newton inverse).
    pub fn fermi_coords(&self, x: Vec2) -> Result<[(f64, f64); 2], FbiError> {
        Ok([self.beams[0].fermi.inverse(x, None)?, self.beams[1].fermi.inverse(x, None)?])
    }

    /// Phase Phi = |xi| (Theta_1 + Theta_2) from Fermi coordinates.
    pub fn phase_from(&self, c: &[(f64, f64); 2]) -> C {
        self.xi_norm() * (self.beams[0].phase(c[0].0, c[0].1) + self.beams[1].phase(c[1].0, c[1].1))
    }

    pub fn phase(&self, x: Vec2) -> Result<C, FbiError> {
        Ok(self.phase_from(&self.fermi_coords(x)?))
    }

    /// Complex frequencies s_j = tau |xi| + i lambda_j.
    pub fn frequencies(&self, tau: f64) -> [C; 2] {
        let r = tau * self.xi_norm();
        [C::new(r, self.lambda[0]), C::new(r, self.lambda[1])]
    }

    /// Scaled kernel k_tau = |xi|^{1/2} tau v_{s_1} v_{s_2} from Fermi coordinates.
    pub fn kernel_from(&self, tau: f64, c: &[(f64, f64); 2]) -> C {
        let [s1, s2] = self.frequencies(tau);
        let v1 = self.beams[0].eval_fermi(s1, c[0].0, c[0].1);
        if v1 == C::default() {
            return v1;
        }
        let v2 = self.beams[1].eval_fermi(s2, c[1].0, c[1].1);
        self.xi_norm().sqrt() * tau * v1 * v2
    }

    pub fn kernel(&self, tau: f64, x: Vec2) -> Result<C, FbiError> {
        Ok(self.kernel_from(tau, &self.fermi_coords(x)?))
    }

    /// Whether x lies in both beam supports.
    pub fn in_support(&self, c: &[(f64, f64); 2]) -> bool {
        c[0].1.abs() < self.beams[0].delta() && c[1].1.abs() < self.beams[1].delta()
    }
}
