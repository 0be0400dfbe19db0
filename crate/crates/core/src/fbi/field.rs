use crate::linalg::{self, Vec2};
use serde::{Deserialize, Serialize};

/// A scalar field on M that can report where it fails to be smooth along
/// a straight chart line, so quadrature can split there.
pub trait ScalarField: Sync {
    fn eval(&self, x: Vec2) -> f64;

    /// Parameters p (sorted) where `origin + p * dir` crosses a point of
    /// non-smoothness of the field.
    fn breakpoints(&self, origin: Vec2, dir: Vec2) -> Vec<f64>;

    /// Preferred direction of the quadrature lines: breakpoints then stay
    /// fixed as the line moves sideways.
    fn line_direction(&self) -> Option<Vec2> {
        None
    }
}

/// Wave front set of a built-in test function, as far as it is known in
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WaveFront {
    Empty,
    /// Conormal bundle of the line through `point` with normal `normal`.
    ConormalLine {
        point: Vec2,
        normal: Vec2,
    },
    /// The full fiber over `center` (a conic point singularity).
    Point {
        center: Vec2,
    },
}

impl WaveFront {
    /// Whether (z, xi) belongs to the set (chart covector components).
    pub fn contains(&self, z: Vec2, xi: Vec2, tol: f64) -> bool {
        match *self {
            WaveFront::Empty => false,
            WaveFront::ConormalLine { point, normal } => {
                let n = linalg::scale(1.0 / linalg::norm(normal), normal);
                let on_line = linalg::dot(linalg::sub(z, point), n).abs() <= tol;
                let xn = linalg::scale(1.0 / linalg::norm(xi), xi);
                on_line && linalg::cross(xn, n).abs() <= tol
            }
            WaveFront::Point { center } => linalg::norm(linalg::sub(z, center)) <= tol,
        }
    }
}

/// Built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunction {
    /// exp(-|x - center|^2 / sigma^2).
    Gaussian {
        center: Vec2,
        sigma: f64,
    },
    /// Indicator of {(x - point) . normal > 0}.
    HalfPlaneJump {
        point: Vec2,
        normal: Vec2,
    },
    /// |x - center|^alpha.
    Cone {
        center: Vec2,
        alpha: f64,
    },
    Zero,
}

impl TestFunction {
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            TestFunction::Gaussian { center, sigma } => {
                if !finite(&center) || !(sigma.is_finite() && sigma > 0.0) {
                    return Err("gaussian needs a finite center and sigma > 0".into());
                }
            }
            TestFunction::HalfPlaneJump { point, normal } => {
                if !finite(&point) || !finite(&normal) || linalg::norm(normal) == 0.0 {
                    return Err("half-plane-jump needs a finite point and a nonzero normal".into());
                }
            }
            TestFunction::Cone { center, alpha } => {
                if !finite(&center) || !(alpha.is_finite() && alpha > 0.0) {
                    return Err("cone needs a finite center and alpha > 0".into());
                }
            }
            TestFunction::Zero => {}
        }
        Ok(())
    }

    pub fn wave_front(&self) -> WaveFront {
        match *self {
            TestFunction::Gaussian { .. } | TestFunction::Zero => WaveFront::Empty,
            TestFunction::HalfPlaneJump { point, normal } => WaveFront::ConormalLine { point, normal },
            TestFunction::Cone { center, alpha } => {
                if alpha.fract() == 0.0 && (alpha as i64) % 2 == 0 {
                    WaveFront::Empty
                } else {
                    WaveFront::Point { center }
                }
            }
        }
    }
}

impl ScalarField for TestFunction {
    fn eval(&self, x: Vec2) -> f64 {
        match *self {
            TestFunction::Gaussian { center, sigma } => {
                let d = linalg::sub(x, center);
                (-linalg::dot(d, d) / (sigma * sigma)).exp()
            }
            TestFunction::HalfPlaneJump { point, normal } => {
                if linalg::dot(linalg::sub(x, point), normal) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Cone { center, alpha } => linalg::norm(linalg::sub(x, center)).powf(alpha),
            TestFunction::Zero => 0.0,
        }
    }

    fn breakpoints(&self, origin: Vec2, dir: Vec2) -> Vec<f64> {
        match *self {
            TestFunction::HalfPlaneJump { point, normal } => {
                let den = linalg::dot(dir, normal);
                if den == 0.0 {
                    Vec::new()
                } else {
                    vec![linalg::dot(linalg::sub(point, origin), normal) / den]
                }
            }
            TestFunction::Cone { center, .. } => {
                if self.wave_front() == WaveFront::Empty {
                    return Vec::new();
                }
                vec![linalg::dot(linalg::sub(center, origin), dir) / linalg::dot(dir, dir)]
            }
            TestFunction::Gaussian { .. } | TestFunction::Zero => Vec::new(),
        }
    }

    fn line_direction(&self) -> Option<Vec2> {
        match *self {
            TestFunction::HalfPlaneJump { normal, .. } => Some(normal),
            _ => None,
        }
    }
}

/// Scalar multiple and sum of two fields (used for linearity checks).
pub struct Combination<'a> {
    pub terms: Vec<(f64, &'a dyn ScalarField)>,
}

impl ScalarField for Combination<'_> {
    fn eval(&self, x: Vec2) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.eval(x)).sum()
    }

    fn breakpoints(&self, origin: Vec2, dir: Vec2) -> Vec<f64> {
        let mut out: Vec<f64> = self.terms.iter().flat_map(|(_, f)| f.breakpoints(origin, dir)).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn line_direction(&self) -> Option<Vec2> {
        let dirs: Vec<Vec2> = self.terms.iter().filter_map(|(_, f)| f.line_direction()).collect();
        let first = *dirs.first()?;
        dirs.iter().all(|d| linalg::cross(*d, first).abs() <= 1e-12 * linalg::norm(*d) * linalg::norm(first)).then_some(first)
    }
}
