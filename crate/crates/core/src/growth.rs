//! Growth classification of norm sequences from their tail.

use serde::{Deserialize, Serialize};

/// Slope magnitude of `ln‖·‖` against `ln n` below which a tail counts as flat.
pub const FLAT_SLOPE: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Decaying,
    Bounded,
    PolynomialSuspect,
    ExponentialSuspect,
}

impl GrowthClass {
    pub fn is_bounded(self) -> bool {
        matches!(self, GrowthClass::Decaying | GrowthClass::Bounded)
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, sse)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some((slope, intercept, sse))
}

/// Slope of `ln value` against `ln n`, skipping zero values and `n = 0`.
pub fn log_log_slope(samples: impl IntoIterator<Item = (usize, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .into_iter()
        .filter(|&(n, v)| n > 0 && v > 0.0)
        .map(|(n, v)| ((n as f64).ln(), v.ln()))
        .collect();
    linear_fit(&pts).map(|f| f.0)
}

/// Classifies `(n, ln‖xₙ‖)` samples (already restricted to the tail).
///
/// Zero norms appear as `-inf`. A flat log-log slope means bounded, a
/// clearly negative one decaying; growing tails are called exponential when
/// `ln‖xₙ‖` is better fit by a line in `n` than in `ln n`.
pub fn classify_log_norms(samples: &[(usize, f64)]) -> GrowthClass {
    let finite: Vec<(usize, f64)> = samples
        .iter()
        .copied()
        .filter(|&(n, l)| n > 0 && l.is_finite())
        .collect();
    if finite.is_empty() {
        return GrowthClass::Decaying;
    }
    let loglog: Vec<(f64, f64)> = finite.iter().map(|&(n, l)| ((n as f64).ln(), l)).collect();
    let Some((slope, _, sse_loglog)) = linear_fit(&loglog) else {
        return GrowthClass::Bounded;
    };
    if finite.len() < samples.len() || slope <= -FLAT_SLOPE {
        return GrowthClass::Decaying;
    }
    if slope < FLAT_SLOPE {
        return GrowthClass::Bounded;
    }
    let semilog: Vec<(f64, f64)> = finite.iter().map(|&(n, l)| (n as f64, l)).collect();
    let (_, _, sse_semilog) = linear_fit(&semilog).expect("distinct abscissae");
    if sse_semilog < sse_loglog {
        GrowthClass::ExponentialSuspect
    } else {
        GrowthClass::PolynomialSuspect
    }
}
