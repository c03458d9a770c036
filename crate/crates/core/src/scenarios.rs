//! Reference scenarios and probe settings used by the figure reproductions and
//! the acceptance suite.

use crate::estimator::ProbeConfig;
use crate::sim::{
    CongestionSignalSpec, DeliveryMode, NetworkPathSpec, ScenarioSpec, SignalProcess, SourceSpec,
    WindowControllerSpec,
};
use crate::traffic::VbrSpec;

/// Packet size of the static-window scenarios; a 500 kbit window holds exactly
/// 50 packets.
pub const STATIC_PACKET_BITS: f64 = 10_000.0;
pub const STATIC_CAPACITY_BPS: f64 = 10e6;
/// One-way network latency of the static-window path.
pub const STATIC_LATENCY_S: f64 = 0.05;

/// Packet size of the window-adaptive scenarios.
pub const PACKET_BITS: f64 = 12_000.0;
/// Mathis long-term rate of the adaptive marking scenario, packets/s.
pub const ADAPTIVE_MATHIS_PPS: f64 = 4143.0;
/// Periodic signal spacing of the loss-comparison pair (one signal per second).
pub const PERIODIC_EVERY_N: u64 = 3750;
/// Bernoulli probability giving the periodic scenario's long-term rate.
pub const BERNOULLI_MATCHED_P: f64 = 2.8e-4;

/// Static window over a 10 Mbit/s path with 50 ms latency in each direction.
pub fn static_window(window_bits: f64) -> ScenarioSpec {
    ScenarioSpec {
        source: SourceSpec::Greedy,
        controller: WindowControllerSpec::Static { window_bits },
        path: NetworkPathSpec {
            capacity_bps: Some(STATIC_CAPACITY_BPS),
            fwd_delay_s: STATIC_LATENCY_S,
            rev_delay_s: STATIC_LATENCY_S,
            buffer_pkts: None,
        },
        signal: CongestionSignalSpec::none(),
        mss_bits: STATIC_PACKET_BITS,
        duration_s: 20.0,
        warmup_s: Some(1.0),
        seed: 1,
    }
}

/// 1 Mbit/s grid; with 750 samples `ξ = 10⁻⁴` selects the largest sample.
pub fn static_window_probe() -> ProbeConfig {
    ProbeConfig::new(1e6, 1e-4, STATIC_PACKET_BITS)
}

/// NewReno-like window over an unconstrained path with 5 ms delay in each
/// direction and Bernoulli marking with `p = 10⁻³`.
pub fn adaptive_marking() -> ScenarioSpec {
    ScenarioSpec {
        source: SourceSpec::Greedy,
        controller: WindowControllerSpec::newreno_like(PACKET_BITS),
        path: NetworkPathSpec {
            capacity_bps: None,
            fwd_delay_s: 0.005,
            rev_delay_s: 0.005,
            buffer_pkts: None,
        },
        signal: CongestionSignalSpec {
            process: SignalProcess::Bernoulli { p: 1e-3 },
            delivery_mode: DeliveryMode::Mark,
        },
        mss_bits: PACKET_BITS,
        duration_s: 300.0,
        warmup_s: Some(20.0),
        seed: 1,
    }
}

/// Probe settings for the window-adaptive scenarios: sparse samples (8000
/// packets apart on average), no lagged differences in the stationarity
/// regression and a generous extension budget, since the delay process
/// decorrelates slowly close to the long-term rate.
pub fn adaptive_probe(r_acc_pps: f64, xi: f64) -> ProbeConfig {
    let mut cfg = ProbeConfig::new(r_acc_pps * PACKET_BITS, xi, PACKET_BITS);
    cfg.sampling_gap_packets = Some(8000);
    cfg.ers_lags = Some(0);
    cfg.max_extensions = 60;
    cfg.seed = 1;
    cfg
}

/// Probe used for delay-bound validation: `ξ = 2·10⁻³` is the second largest
/// of 750 samples, a quantile the sample size can resolve.
pub fn validation_probe() -> ProbeConfig {
    adaptive_probe(200.0, 2e-3)
}

/// On-off style VBR trace at half the adaptive scenario's long-term rate.
pub fn half_load_vbr() -> VbrSpec {
    VbrSpec {
        mean_rate_bps: 0.5 * ADAPTIVE_MATHIS_PPS * PACKET_BITS,
        burstiness: 0.5,
        mean_sojourn_s: 0.1,
        duration_s: 10.0,
        seed: 5,
    }
}

fn loss_scenario(process: SignalProcess) -> ScenarioSpec {
    ScenarioSpec {
        source: SourceSpec::Greedy,
        controller: WindowControllerSpec::newreno_like(PACKET_BITS),
        path: NetworkPathSpec {
            capacity_bps: None,
            fwd_delay_s: 0.01,
            rev_delay_s: 0.01,
            buffer_pkts: None,
        },
        signal: CongestionSignalSpec {
            process,
            delivery_mode: DeliveryMode::Mark,
        },
        mss_bits: PACKET_BITS,
        duration_s: 300.0,
        warmup_s: Some(20.0),
        seed: 1,
    }
}

/// 20 ms round trip, one congestion signal every 3750 packets: the window
/// saw-tooths between 50 and 100 packets once per second.
pub fn periodic_signals() -> ScenarioSpec {
    loss_scenario(SignalProcess::Periodic {
        every_n_packets: PERIODIC_EVERY_N,
    })
}

/// Same path with Bernoulli signals tuned to the periodic scenario's rate.
pub fn bernoulli_signals() -> ScenarioSpec {
    loss_scenario(SignalProcess::Bernoulli {
        p: BERNOULLI_MATCHED_P,
    })
}

pub fn loss_comparison_probe() -> ProbeConfig {
    adaptive_probe(250.0, 1e-4)
}
