use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::calculus::{read_two_column_csv, CumulativeProcess};

/// Where the sender's application data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// `A_app(t) = rate · t`.
    ConstantRate { rate_bps: f64 },
    /// Always has data; a packet is created the moment the window lets it out.
    Greedy,
    /// Cumulative arrivals given inline as `[t_seconds, cum_bits]` pairs.
    Trace { breakpoints: Vec<(f64, f64)> },
    /// Cumulative arrivals read from a two-column CSV (`t_seconds,cum_bits`),
    /// relative paths resolved against the config file's directory.
    TraceFile { path: PathBuf },
}

/// Additive window increase applied per unmarked acknowledgement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncreaseRule {
    /// `W += gain · mss² / W`, i.e. `gain` MSS per window of ACKs.
    InverseWindow { gain: f64 },
    /// `W += mss_per_ack · mss` regardless of the window.
    Fixed { mss_per_ack: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowControllerSpec {
    Static {
        window_bits: f64,
    },
    Aimd {
        increase_per_ack: IncreaseRule,
        decrease_factor: f64,
        floor_bits: f64,
        /// Starting window; defaults to ten segments.
        #[serde(default)]
        initial_bits: Option<f64>,
    },
}

impl WindowControllerSpec {
    /// Additive increase of one MSS per window, halving on congestion.
    pub fn newreno_like(mss: f64) -> Self {
        Self::Aimd {
            increase_per_ack: IncreaseRule::InverseWindow { gain: 1.0 },
            decrease_factor: 0.5,
            floor_bits: mss,
            initial_bits: None,
        }
    }

    /// One MSS per hundred ACKs, reducing to 7/8 on congestion.
    pub fn scalable_like(mss: f64) -> Self {
        Self::Aimd {
            increase_per_ack: IncreaseRule::Fixed { mss_per_ack: 0.01 },
            decrease_factor: 0.875,
            floor_bits: mss,
            initial_bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkPathSpec {
    /// Bottleneck capacity; `null` for an unconstrained path.
    pub capacity_bps: Option<f64>,
    /// Forward latency including one packet transmission time at the bottleneck.
    pub fwd_delay_s: f64,
    pub rev_delay_s: f64,
    /// Drop-tail buffer size in packets; `null` for unbounded.
    #[serde(default)]
    pub buffer_pkts: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryMode {
    /// The packet is delivered and its acknowledgement carries the signal.
    #[default]
    Mark,
    /// The packet is discarded; the sender notices one round trip after sending
    /// and retransmits it.
    DropWithRetransmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalProcess {
    None,
    /// Each transmission is signalled independently with probability `p`.
    Bernoulli { p: f64 },
    /// Every `every_n_packets`-th transmission is signalled.
    Periodic { every_n_packets: u64 },
    /// A packet arriving at a full drop-tail buffer is dropped and signals
    /// congestion.
    BufferOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongestionSignalSpec {
    pub process: SignalProcess,
    #[serde(default)]
    pub delivery_mode: DeliveryMode,
}

impl CongestionSignalSpec {
    pub fn none() -> Self {
        Self {
            process: SignalProcess::None,
            delivery_mode: DeliveryMode::Mark,
        }
    }
}

/// Complete description of one simulated flow-control loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub source: SourceSpec,
    pub controller: WindowControllerSpec,
    pub path: NetworkPathSpec,
    pub signal: CongestionSignalSpec,
    pub mss_bits: f64,
    pub duration_s: f64,
    /// Defaults to a tenth of the duration.
    #[serde(default)]
    pub warmup_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn warmup(&self) -> f64 {
        self.warmup_s.unwrap_or(0.1 * self.duration_s)
    }

    pub fn rtt(&self) -> f64 {
        self.path.fwd_delay_s + self.path.rev_delay_s
    }

    /// Loads `trace_file` sources into inline traces.
    pub fn resolve_files(&mut self, base_dir: &Path) -> Result<(), SimError> {
        if let SourceSpec::TraceFile { path } = &self.source {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            let file = std::fs::File::open(&full).map_err(|e| {
                SimError::InvalidInput(format!("cannot open trace {}: {e}", full.display()))
            })?;
            let breakpoints = read_two_column_csv(file).map_err(|e| {
                SimError::InvalidInput(format!("cannot parse trace {}: {e}", full.display()))
            })?;
            self.source = SourceSpec::Trace { breakpoints };
        }
        Ok(())
    }

    /// Checks every parameter constraint; called before any simulation starts.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidInput(msg));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let mss = self.mss_bits;
        if !(mss.is_finite() && mss > 0.0) {
            return bad(format!("mss_bits must be positive, got {mss}"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        let warmup = self.warmup();
        if !(finite_nonneg(warmup) && warmup < self.duration_s) {
            return bad(format!(
                "warmup_s must satisfy 0 <= warmup < duration, got {warmup}"
            ));
        }
        match &self.source {
            SourceSpec::ConstantRate { rate_bps } => {
                if !(rate_bps.is_finite() && *rate_bps > 0.0) {
                    return bad(format!("source rate must be positive, got {rate_bps}"));
                }
            }
            SourceSpec::Greedy => {}
            SourceSpec::Trace { breakpoints } => {
                CumulativeProcess::new(breakpoints.clone())
                    .map_err(|e| SimError::InvalidInput(format!("trace: {e}")))?;
            }
            SourceSpec::TraceFile { path } => {
                return bad(format!(
                    "trace file {} was not loaded before simulation",
                    path.display()
                ));
            }
        }
        match self.controller {
            WindowControllerSpec::Static { window_bits } => {
                if !(window_bits.is_finite() && window_bits >= mss) {
                    return bad(format!(
                        "static window must hold at least one MSS ({mss}), got {window_bits}"
                    ));
                }
            }
            WindowControllerSpec::Aimd {
                increase_per_ack,
                decrease_factor,
                floor_bits,
                initial_bits,
            } => {
                let gain = match increase_per_ack {
                    IncreaseRule::InverseWindow { gain } => gain,
                    IncreaseRule::Fixed { mss_per_ack } => mss_per_ack,
                };
                if !(gain.is_finite() && gain >= 0.0) {
                    return bad(format!("window increase must be non-negative, got {gain}"));
                }
                if !(decrease_factor > 0.0 && decrease_factor < 1.0) {
                    return bad(format!(
                        "decrease_factor must lie in (0, 1), got {decrease_factor}"
                    ));
                }
                if !(floor_bits.is_finite() && floor_bits >= mss) {
                    return bad(format!(
                        "floor_bits must be at least one MSS ({mss}), got {floor_bits}"
                    ));
                }
                if let Some(w) = initial_bits {
                    if !(w.is_finite() && w >= floor_bits) {
                        return bad(format!("initial_bits must be >= floor_bits, got {w}"));
                    }
                }
            }
        }
        let p = &self.path;
        if !(finite_nonneg(p.fwd_delay_s) && finite_nonneg(p.rev_delay_s)) {
            return bad("path delays must be finite and non-negative".into());
        }
        if let Some(c) = p.capacity_bps {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("capacity_bps must be positive or null, got {c}"));
            }
        }
        if p.buffer_pkts == Some(0) {
            return bad("buffer_pkts must be at least 1".into());
        }
        match self.signal.process {
            SignalProcess::None => {}
            SignalProcess::Bernoulli { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("bernoulli p must lie in (0, 1), got {p}"));
                }
            }
            SignalProcess::Periodic { every_n_packets } => {
                if every_n_packets < 2 {
                    return bad(format!(
                        "every_n_packets must be at least 2, got {every_n_packets}"
                    ));
                }
            }
            SignalProcess::BufferOverflow => {
                if p.capacity_bps.is_none() || p.buffer_pkts.is_none() {
                    return bad(
                        "buffer_overflow signals need a finite capacity and buffer".into(),
                    );
                }
            }
        }
        Ok(())
    }
}
