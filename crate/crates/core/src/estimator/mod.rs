//! Constant-rate probing of a simulated connection and assembly of an
//! ε-effective service curve from the measured delay quantiles.

mod assemble;
mod probe;
mod sweep;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::CalculusError;
use crate::sim::SimError;
use crate::stats::{SampleSeries, TestOutcome};

pub use assemble::assemble_estimate;
pub use probe::probe_rate;
pub use sweep::{sweep, SweepOutcome};
pub use validate::{validate_delay_bounds, PacketBound, ValidationConfig, ValidationReport};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("invalid probe configuration: {0}")]
    InvalidConfig(String),
    #[error("no probing rate observed a steady state: {0}")]
    EmptyUsableSet(String),
}

fn default_samples() -> usize {
    750
}

fn default_max_extensions() -> u32 {
    8
}

fn default_alpha() -> f64 {
    0.05
}

fn default_max_rates() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// Step of the probing-rate grid, bits/s.
    pub r_acc_bps: f64,
    /// Per-rate quantile violation probability.
    pub xi: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_max_extensions")]
    pub max_extensions: u32,
    /// Packet size of the probe traffic.
    pub packet_bits: f64,
    /// Mean spacing between sampled packets; defaults to one round trip's worth
    /// of packets at the probing rate.
    #[serde(default)]
    pub sampling_gap_packets: Option<u64>,
    /// Lag order of the stationarity regression; defaults to `⌊12 (n/100)^{1/4}⌋`.
    #[serde(default)]
    pub ers_lags: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Probing gives up (with an error) after this many rates.
    #[serde(default = "default_max_rates")]
    pub max_rates: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(r_acc_bps: f64, xi: f64, packet_bits: f64) -> Self {
        Self {
            r_acc_bps,
            xi,
            samples: default_samples(),
            max_extensions: default_max_extensions(),
            packet_bits,
            sampling_gap_packets: None,
            ers_lags: None,
            alpha: default_alpha(),
            max_rates: default_max_rates(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |m: String| Err(EstimatorError::InvalidConfig(m));
        if !(self.r_acc_bps.is_finite() && self.r_acc_bps > 0.0) {
            return bad(format!("r_acc_bps must be positive, got {}", self.r_acc_bps));
        }
        if !(self.xi > 0.0 && self.xi < 0.5) {
            return bad(format!("xi must lie in (0, 0.5), got {}", self.xi));
        }
        if self.samples < 50 {
            return bad(format!("samples must be at least 50, got {}", self.samples));
        }
        if !(self.packet_bits.is_finite() && self.packet_bits > 0.0) {
            return bad(format!("packet_bits must be positive, got {}", self.packet_bits));
        }
        if self.sampling_gap_packets == Some(0) {
            return bad("sampling_gap_packets must be at least 1".into());
        }
        if !(0.01..=0.10).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0.01, 0.10], got {}", self.alpha));
        }
        if self.max_rates == 0 {
            return bad("max_rates must be at least 1".into());
        }
        Ok(())
    }
}

/// Outcome of probing one constant rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProbeRecord {
    pub rate_bps: f64,
    /// The (decimated) samples the final tests were run on.
    pub samples: SampleSeries,
    pub extensions_used: u32,
    pub stationary: bool,
    pub independent: bool,
    /// `None` when the test could not be evaluated (constant series).
    pub ers: Option<TestOutcome>,
    pub runs: Option<TestOutcome>,
    /// `(1 − ξ)`-quantile of the end-to-end delay; only set when both tests pass.
    pub delay_quantile_s: Option<f64>,
    /// `rate × delay_quantile_s`.
    pub backlog_quantile_bits: Option<f64>,
}

impl RateProbeRecord {
    pub fn usable(&self) -> bool {
        self.stationary && self.independent
    }
}
