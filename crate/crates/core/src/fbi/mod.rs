//! Beam-product probes and the transform T(tau, xi) = int f k_tau dV used
//! to test whether a covector lies in the wave front set of f.
//!
//! For an admissible pair (omega_1, omega_2) with omega_1 + omega_2 =
//! t_0 xi_hat the probe is the product of the two Gaussian beams along the
//! geodesics with codirections omega_j, at complex frequencies
//! s_j = tau |xi| + i lambda_j. Its phase Phi = |xi| (Theta_1 + Theta_2)
//! vanishes at the base point with differential t_0 xi, and the scaled
//! kernel is k_tau = |xi|^{1/2} tau u_tau. Fast decay of |T| in tau means
//! (z, xi) is not in WF(f).

mod audit;
mod decay;
mod field;
mod probe;
mod scan;
mod transform;

pub use audit::{phase_audit, PhaseAudit};
pub use decay::{decay_fit, linear_fit, Classification, DecayFit};
pub use field::{Combination, ScalarField, TestFunction, WaveFront};
pub use probe::{FbiProbe, ProbeParams, ProbePoint};
pub use scan::{fan, scan_direction, wf_scan, DecayReport, Direction, DirectionRecord, ScanParams};
pub use transform::{transform, TransformMaps, TransformOptions, TransformValue};

use crate::beam::BeamError;
use crate::geodesic::GeodesicError;
use crate::manifold::GeometryError;
use crate::pairing::PairingError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbiError {
    #[error("pair is not admissible: {0}")]
    NotAdmissible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Fermi inverse interpolation failed: {0}")]
    Interpolation(String),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Beam(#[from] BeamError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
