//! Least-squares power-law fits in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub log_intercept: f64,
    /// Largest absolute residual in natural-log units.
    pub max_residual: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.log_intercept + self.exponent * x.ln()).exp()
    }
}

/// Fits `y ≈ C x^p` over positive pairs.
pub fn fit_loglog(x: &[f64], y: &[f64], min_points: usize) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("log-log fit needs positive finite data".into()));
    }
    if x.len() < min_points.max(2) {
        return Err(Error::TooFewPoints { what: "log-log fit", got: x.len(), required: min_points.max(2) });
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).abs()).fold(0.0, f64::max);
    Ok(SlopeFit { exponent: slope, log_intercept: intercept, max_residual, points: x.len() })
}
