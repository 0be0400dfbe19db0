//! Gaussian beams and FBI-type transforms on two-dimensional Riemannian
//! manifolds with boundary.
//!
//! The crate builds, along nontangential geodesics of a planar chart,
//! Gaussian-beam quasimodes of the Helmholtz operator, multiplies pairs of
//! beams crossing at a point into an oscillatory kernel, and classifies the
//! decay in the frequency parameter of the resulting transform of a test
//! function. Fast decay in a direction excludes that direction from the
//! wave front set.

pub mod beam;
pub mod cheb;
pub mod fbi;
pub mod fd;
pub mod geodesic;
pub mod linalg;
pub mod manifold;
pub mod ode;
pub mod pairing;
pub mod quad;

pub use manifold::{ChartMetric, MetricFamily, PointedCovector};
