//! Calibration error metrics and the ASHRAE hourly acceptance bounds.

use crate::error::{Error, Result};

/// Hourly calibration bound on CV(RMSE), percent.
pub const ASHRAE_CV_RMSE_MAX: f64 = 30.0;
/// Hourly calibration bound on |NMBE|, percent.
pub const ASHRAE_NMBE_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Train,
    Forecast,
}

impl Window {
    pub fn as_str(&self) -> &'static str {
        match self {
            Window::Train => "train",
            Window::Forecast => "forecast",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub cv_rmse: f64,
    pub nmbe: f64,
    pub channel: String,
    pub window: Window,
    pub passes_ashrae: bool,
}

impl MetricsReport {
    pub fn compute(truth: &[f64], pred: &[f64], channel: &str, window: Window) -> Result<Self> {
        let cv = cv_rmse(truth, pred)?;
        let bias = nmbe(truth, pred)?;
        Ok(MetricsReport {
            cv_rmse: cv,
            nmbe: bias,
            channel: channel.to_string(),
            window,
            passes_ashrae: verdict(cv, bias),
        })
    }
}

fn check_pair(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::invalid("truth", "series is empty"));
    }
    if truth.len() != pred.len() {
        return Err(Error::Dimension {
            context: "metric series length",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    Ok(())
}

/// Root-mean-square error over the mean of `truth`, in percent (1/n form).
pub fn cv_rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::ZeroNormalizer("CV(RMSE)"));
    }
    let mse = truth
        .iter()
        .zip(pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / n;
    Ok(100.0 * mse.sqrt() / mean)
}

/// `Σ(pred − truth) / Σ truth` in percent; positive means over-prediction.
pub fn nmbe(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    let total: f64 = truth.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroNormalizer("NMBE"));
    }
    let bias: f64 = truth.iter().zip(pred).map(|(t, p)| p - t).sum();
    Ok(100.0 * bias / total)
}

pub fn verdict(cv_rmse: f64, nmbe: f64) -> bool {
    cv_rmse <= ASHRAE_CV_RMSE_MAX && nmbe.abs() <= ASHRAE_NMBE_MAX
}

pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(truth, pred)?;
    let n = truth.len() as f64;
    Ok((truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / n).sqrt())
}
