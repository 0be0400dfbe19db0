//! Gaussian-beam quasimodes along nontangential geodesics.
//!
//! A beam lives in Fermi coordinates (t, y) around a geodesic, where the
//! metric is exactly `h(t, y)^2 dt^2 + dy^2` with `h(t, 0) = 1`,
//! `h_y(t, 0) = 0`. It has the form
//! `v_s = Re(s)^{1/4} chi(y / delta) A(t, y) e^{i s Theta(t, y)}` with
//! `Theta = t + H(t) y^2 / 2 + ...` and `H` solving the Riccati equation
//! `H' + H^2 = -K(gamma(t))`.
//!
//! Order 0 keeps the quadratic phase and the leading amplitude
//! `a0 = Y^{-1/2}`. Order 1 adds the Taylor coefficients of the phase up to
//! y^6, of the leading amplitude up to y^4 and a first `1/s` correction up
//! to y^2, which together remove every residual term of weight above -1 in
//! the bookkeeping `s^k y^m ~ tau^{k - m/2}`.

mod coeffs;
mod cutoff;
mod fermi;
mod gaussian;
mod residual;
mod riccati;
mod simple;

pub use coeffs::{BeamCoefficients, CoefJet};
pub use cutoff::{plateau_cutoff, Cutoff};
pub use fermi::{FermiChart, FermiPoint, MetricJet};
pub use gaussian::{BeamJet, BeamValue, GaussianBeam, PhaseJet};
pub use residual::{residual_norm, tube_norms, ResidualOptions, ResidualReport};
pub use riccati::RiccatiSolution;
pub use simple::simple_phase;

use crate::geodesic::GeodesicError;
use crate::manifold::GeometryError;
use crate::ode::OdeError;
use crate::pairing::PairingError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("tube half-width too large; largest working value is {largest}")]
    ShrinkTube { largest: f64 },
    #[error("Riccati linear solution vanished near t = {0}")]
    BlowUp(f64),
    #[error("truncation order {0} is not supported (use 0 or 1)")]
    UnsupportedOrder(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Fermi inverse map failed at ({0}, {1})")]
    InverseFailed(f64, f64),
    #[error("coefficient interpolation did not resolve (tail {0:e})")]
    Unresolved(f64),
    #[error("two-point shooting did not converge: {0}")]
    NonSimple(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl From<PairingError> for BeamError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::Geometry(g) => BeamError::Geometry(g),
            PairingError::Geodesic(g) => BeamError::Geodesic(g),
            other => BeamError::NonSimple(other.to_string()),
        }
    }
}
