use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Smooth,
    Singular,
    Inconclusive,
    Untestable,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Smooth => "SMOOTH",
            Classification::Singular => "SINGULAR",
            Classification::Inconclusive => "INCONCLUSIVE",
            Classification::Untestable => "UNTESTABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Log-log slope; over the upper half of the grid when no sample there
    /// is at the floor, otherwise over all samples above the floor.
    pub slope: f64,
    pub r2: f64,
    pub classification: Classification,
    /// "floor" when some fitted sample was clamped, "underflow" when all were.
    pub flag: Option<String>,
}

/// Least-squares line through (x, y); returns (slope, R^2).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Classify decay of |T| over a geometric tau grid. `floors[k]` is the
/// noise floor of sample k; samples at or below max(floor, 1e-14 max|T|)
/// are clamped.
pub fn decay_fit(taus: &[f64], mags: &[f64], floors: &[f64], s_smooth: f64, s_sing: f64) -> DecayFit {
    assert!(taus.len() >= 5 && taus.len() == mags.len() && mags.len() == floors.len(), "need at least 5 samples");
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let clamped: Vec<bool> = mags.iter().zip(floors).map(|(&m, &fl)| m.is_nan() || m <= fl.max(1e-14 * peak) || m == 0.0).collect();
    let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    if clamped.iter().all(|&c| c) {
        return DecayFit { slope: f64::NAN, r2: f64::NAN, classification: Classification::Smooth, flag: Some("underflow".into()) };
    }
    let start = taus.len() / 2;
    if clamped[start..].iter().any(|&c| c) {
        let idx: Vec<usize> = (0..taus.len()).filter(|&k| !clamped[k]).collect();
        let (slope, r2) = if idx.len() >= 2 {
            let x: Vec<f64> = idx.iter().map(|&k| lx[k]).collect();
            let y: Vec<f64> = idx.iter().map(|&k| mags[k].ln()).collect();
            linear_fit(&x, &y)
        } else {
            (f64::NAN, f64::NAN)
        };
        return DecayFit { slope, r2, classification: Classification::Smooth, flag: Some("floor".into()) };
    }
    let y: Vec<f64> = mags[start..].iter().map(|m| m.ln()).collect();
    let (slope, r2) = linear_fit(&lx[start..], &y);
    let classification = if slope <= -s_smooth {
        Classification::Smooth
    } else if slope >= -s_sing {
        Classification::Singular
    } else {
        Classification::Inconclusive
    };
    DecayFit { slope, r2, classification, flag: None }
}
