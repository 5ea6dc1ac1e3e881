//! Least-squares power-law exponents on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 6;
/// Half a decade.
pub const MIN_FIT_SPAN: f64 = 3.162_277_660_168_379_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    /// Root-mean-square residual in `ln(value)`.
    pub residual: f64,
    pub points: usize,
}

/// Slope of `ln(value)` against `ln(x)` over the points with `x` in `window`.
pub fn fit_exponent(series: &[(f64, f64)], window: [f64; 2]) -> Result<FitResult> {
    let tol = 1e-9 * window[1].abs().max(1.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(x, _)| x >= window[0] - tol && x <= window[1] + tol)
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} points in [{}, {}], at least {MIN_FIT_POINTS} needed",
            pts.len(),
            window[0],
            window[1]
        )));
    }
    if let Some(&(x, y)) = pts.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Fit(format!(
            "nonpositive point ({x}, {y}) in the fit window"
        )));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi / lo < MIN_FIT_SPAN * (1.0 - 1e-9) {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] spans less than half a decade"
        )));
    }
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        window: [lo, hi],
        residual: (ss / n).sqrt(),
        points: pts.len(),
    })
}

/// [`fit_exponent`] on `(x(r), y(r))` pairs extracted from records.
pub fn fit_series<T>(
    records: &[T],
    x: impl Fn(&T) -> f64,
    y: impl Fn(&T) -> f64,
    window: [f64; 2],
) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (x(r), y(r))).collect();
    fit_exponent(&pts, window)
}
