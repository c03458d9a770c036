//! Stationarity and independence tests, order-statistic quantiles and sample
//! autocorrelation.

mod descriptive;
mod ers;
mod runs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use descriptive::{autocorrelation, autocorrelation_at, empirical_quantile, median};
pub use ers::{ers_critical_value, ers_test, ers_test_with_lags, schwert_lag};
pub use runs::runs_test;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("autocorrelation undefined for a series with zero variance")]
    UndefinedCorrelation,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Ordered delay samples from one probing rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    pub values: Vec<f64>,
    /// Probing rate the samples were taken at, bits/s.
    pub rate_bps: Option<f64>,
    /// Number of times the probe run was extended before these samples were drawn.
    pub extensions: u32,
}

impl SampleSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::InvalidInput(format!(
                "non-finite sample {} at index {i}",
                values[i]
            )));
        }
        Ok(Self {
            values,
            rate_bps: None,
            extensions: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of a hypothesis test; `pass` means the series looks stationary
/// (ERS) or independent (runs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidInput(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )))
    }
}
