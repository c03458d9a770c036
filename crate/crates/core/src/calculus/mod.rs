//! Min-plus calculus over cumulative processes and univariate service curves.

mod analytic;
mod bounds;
mod convolution;
mod envelope;
mod io;
mod pwl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{
    attainable_rate, attainable_rate_on, log_grid, mathis_rate, periodic_loss_model,
    static_window_curve, PeriodicLossModel,
};
pub use bounds::{
    backlog_bound, delay_bound, horizontal_deviation, vertical_deviation, BoundAnalysis,
};
pub use convolution::convolve;
pub use envelope::{empirical_envelope, EnvelopeResult};
pub use io::{read_two_column_csv, write_two_column_csv, CurveDocument, CurveKind};
pub use pwl::PiecewiseLinear;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("delay is unbounded: {0}")]
    Unbounded(String),
}

/// Cumulative arrivals or departures: starts at `(0, 0)` and never decreases.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeProcess {
    f: PiecewiseLinear,
}

impl CumulativeProcess {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CalculusError> {
        Self::from_function(PiecewiseLinear::new(points)?)
    }

    pub fn from_function(f: PiecewiseLinear) -> Result<Self, CalculusError> {
        if f.breakpoints()[0].1 != 0.0 {
            return Err(CalculusError::InvalidInput(
                "cumulative process must start at value 0".into(),
            ));
        }
        if !f.is_non_decreasing() {
            return Err(CalculusError::InvalidInput(
                "cumulative process must be non-decreasing".into(),
            ));
        }
        Ok(Self { f })
    }

    /// `rate · t`, described by breakpoints up to `horizon`.
    pub fn constant_rate(rate: f64, horizon: f64) -> Result<Self, CalculusError> {
        if !(rate >= 0.0 && horizon > 0.0) {
            return Err(CalculusError::InvalidInput(format!(
                "constant-rate process needs rate >= 0 and horizon > 0 (got {rate}, {horizon})"
            )));
        }
        Self::new(vec![(0.0, 0.0), (horizon, rate * horizon)])
    }

    pub fn function(&self) -> &PiecewiseLinear {
        &self.f
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        self.f.breakpoints()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.f.eval(t)
    }

    pub fn horizon(&self) -> f64 {
        self.f.last_time()
    }

    /// Average rate over the described horizon.
    pub fn mean_rate(&self) -> f64 {
        let h = self.horizon();
        if h > 0.0 {
            self.f.last_value() / h
        } else {
            0.0
        }
    }
}

/// Shape of a service curve: an explicit function or the min-plus identity
/// (zero at duration 0, infinite afterwards).
#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    Function(PiecewiseLinear),
    Identity,
}

/// Univariate, non-negative, non-decreasing service curve with violation
/// probability `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveDocument", into = "CurveDocument")]
pub struct ServiceCurve {
    shape: CurveShape,
    epsilon: f64,
    rate_grid: Option<Vec<f64>>,
}

impl ServiceCurve {
    /// Builds a curve from breakpoints; values are clamped at zero and the
    /// value at duration 0 is forced to 0.
    pub fn new(points: Vec<(f64, f64)>, epsilon: f64) -> Result<Self, CalculusError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(CalculusError::InvalidInput(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        let mut points = points;
        for p in points.iter_mut() {
            p.1 = p.1.max(0.0);
        }
        if let Some(first) = points.first_mut() {
            first.1 = 0.0;
        }
        let f = PiecewiseLinear::new(points)?;
        if !f.is_non_decreasing() {
            return Err(CalculusError::InvalidInput(
                "service curve must be non-decreasing".into(),
            ));
        }
        Ok(Self {
            shape: CurveShape::Function(f.simplified()),
            epsilon,
            rate_grid: None,
        })
    }

    /// `rate · [t − latency]^+`.
    pub fn latency_rate(rate: f64, latency: f64) -> Result<Self, CalculusError> {
        if !(rate >= 0.0 && rate.is_finite() && latency >= 0.0 && latency.is_finite()) {
            return Err(CalculusError::InvalidInput(format!(
                "latency-rate curve needs finite rate >= 0 and latency >= 0 (got {rate}, {latency})"
            )));
        }
        let points = if latency > 0.0 {
            vec![(0.0, 0.0), (latency, 0.0), (latency + 1.0, rate)]
        } else {
            vec![(0.0, 0.0), (1.0, rate)]
        };
        Self::new(points, 0.0)
    }

    pub fn zero() -> Self {
        Self {
            shape: CurveShape::Function(PiecewiseLinear::affine(0.0, 0.0)),
            epsilon: 0.0,
            rate_grid: None,
        }
    }

    pub fn identity() -> Self {
        Self {
            shape: CurveShape::Identity,
            epsilon: 0.0,
            rate_grid: None,
        }
    }

    pub fn with_rate_grid(mut self, grid: Vec<f64>) -> Self {
        self.rate_grid = Some(grid);
        self
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn function(&self) -> Option<&PiecewiseLinear> {
        match &self.shape {
            CurveShape::Function(f) => Some(f),
            CurveShape::Identity => None,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rate_grid(&self) -> Option<&[f64]> {
        self.rate_grid.as_deref()
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            CurveShape::Function(f) => f.eval(t),
            CurveShape::Identity if t > 0.0 => f64::INFINITY,
            CurveShape::Identity => 0.0,
        }
    }

    /// Slope of the final segment, i.e. the long-term rate.
    pub fn long_term_rate(&self) -> f64 {
        match &self.shape {
            CurveShape::Function(f) => f.final_slope(),
            CurveShape::Identity => f64::INFINITY,
        }
    }

    pub fn max_slope(&self) -> f64 {
        match &self.shape {
            CurveShape::Function(f) => f.max_slope(),
            CurveShape::Identity => f64::INFINITY,
        }
    }

    /// Largest duration at which the curve is still zero.
    pub fn latency(&self) -> f64 {
        match &self.shape {
            CurveShape::Function(f) => f.inverse_gt(0.0).unwrap_or(f64::INFINITY),
            CurveShape::Identity => 0.0,
        }
    }
}

/// Upper bound on traffic in any interval of a given length; `E(0)` may be a burst.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficEnvelope {
    f: PiecewiseLinear,
}

impl TrafficEnvelope {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CalculusError> {
        let f = PiecewiseLinear::new(points)?;
        if f.breakpoints()[0].1 < 0.0 {
            return Err(CalculusError::InvalidInput(
                "envelope must be non-negative at duration 0".into(),
            ));
        }
        if !f.is_non_decreasing() {
            return Err(CalculusError::InvalidInput(
                "envelope must be non-decreasing".into(),
            ));
        }
        Ok(Self { f })
    }

    /// `burst + rate · t`.
    pub fn token_bucket(burst: f64, rate: f64) -> Result<Self, CalculusError> {
        Self::new(vec![(0.0, burst), (1.0, burst + rate)])
    }

    pub fn function(&self) -> &PiecewiseLinear {
        &self.f
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        self.f.breakpoints()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.f.eval(t)
    }
}

/// Anything that can be pushed through a service curve: a measured process or
/// an envelope whose value at 0 is an instantaneous burst.
pub trait Arrivals {
    fn function(&self) -> &PiecewiseLinear;

    /// Rate the curve must sustain for the delay to stay bounded.
    fn long_term_rate(&self) -> f64;
}

impl Arrivals for CumulativeProcess {
    fn function(&self) -> &PiecewiseLinear {
        &self.f
    }

    fn long_term_rate(&self) -> f64 {
        self.mean_rate()
    }
}

impl Arrivals for TrafficEnvelope {
    fn function(&self) -> &PiecewiseLinear {
        &self.f
    }

    fn long_term_rate(&self) -> f64 {
        self.f.final_slope()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn service_curve_is_clamped() {
        let s = ServiceCurve::new(vec![(0.0, -5.0), (1.0, -2.0), (2.0, 3.0)], 0.1).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1.0), 0.0);
        assert_eq!(s.eval(2.0), 3.0);
        assert!(ServiceCurve::new(vec![(0.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn cumulative_process_invariants() {
        assert!(CumulativeProcess::new(vec![(0.0, 1.0)]).is_err());
        assert!(CumulativeProcess::new(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).is_err());
        let a = CumulativeProcess::constant_rate(3.0, 2.0).unwrap();
        assert_eq!(a.eval(5.0), 15.0);
        assert_eq!(a.mean_rate(), 3.0);
    }

    #[test]
    fn latency_rate_accessors() {
        let s = ServiceCurve::latency_rate(10.0, 0.5).unwrap();
        assert_eq!(s.latency(), 0.5);
        assert_eq!(s.long_term_rate(), 10.0);
        assert_eq!(s.eval(1.5), 10.0);
    }
}
