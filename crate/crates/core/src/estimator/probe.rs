use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EstimatorError, ProbeConfig, RateProbeRecord};
use crate::rng::{child_seed, stream_seed};
use crate::sim::{Observer, PacketRecord, RunStatus, ScenarioSpec, SimError, Simulator, SourceSpec};
use crate::stats::{
    empirical_quantile, ers_test_with_lags, runs_test, schwert_lag, SampleSeries, StatsError,
    TestOutcome,
};

// Delays are recorded with this resolution, so that floating-point noise in
// long runs does not masquerade as variation.
const RESOLUTION_S: f64 = 1e-9;

/// Picks packets after warmup with jittered spacing and records their
/// end-to-end delay.
struct Sampler {
    warmup: f64,
    gap: u64,
    rng: ChaCha8Rng,
    next_id: Option<u64>,
    target: usize,
    delays: Vec<f64>,
}

impl Sampler {
    fn jittered_gap(&mut self) -> u64 {
        let g = self.gap;
        let lo = g.div_ceil(2).max(1);
        let hi = (g + g / 2).max(lo);
        self.rng.random_range(lo..=hi)
    }
}

impl Observer for Sampler {
    fn on_delivery(&mut self, r: &PacketRecord) -> bool {
        if r.t1 < self.warmup {
            return true;
        }
        let take = match self.next_id {
            None => true,
            Some(id) => r.id >= id,
        };
        if take {
            self.delays.push(((r.t4 - r.t1) / RESOLUTION_S).round() * RESOLUTION_S);
            let step = self.jittered_gap();
            self.next_id = Some(r.id + step);
        }
        self.delays.len() < self.target
    }
}

/// Scenario run by the probe at index `j` (1-based) of the rate grid.
pub(crate) fn probe_scenario(
    template: &ScenarioSpec,
    rate_bps: f64,
    cfg: &ProbeConfig,
    j: u64,
) -> ScenarioSpec {
    let mut spec = template.clone();
    spec.source = SourceSpec::ConstantRate { rate_bps };
    spec.mss_bits = cfg.packet_bits;
    spec.seed = child_seed(cfg.seed, j);
    spec
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

struct Verdict {
    stationary: bool,
    independent: bool,
    ers: Option<TestOutcome>,
    runs: Option<TestOutcome>,
}

fn judge(series: &SampleSeries, cfg: &ProbeConfig) -> Result<Verdict, EstimatorError> {
    if is_constant(&series.values) {
        return Ok(Verdict {
            stationary: true,
            independent: true,
            ers: None,
            runs: None,
        });
    }
    let lags = cfg.ers_lags.unwrap_or_else(|| schwert_lag(series.len()));
    let (stationary, ers) = match ers_test_with_lags(series, cfg.alpha, lags) {
        Ok(o) => (o.pass, Some(o)),
        Err(StatsError::DegenerateSeries(m)) => {
            debug!("stationarity test degenerate on a non-constant series: {m}");
            (false, None)
        }
        Err(e) => return Err(EstimatorError::InvalidConfig(e.to_string())),
    };
    if !stationary {
        return Ok(Verdict {
            stationary,
            independent: false,
            ers,
            runs: None,
        });
    }
    let (independent, runs) = match runs_test(series, cfg.alpha) {
        Ok(o) => (o.pass, Some(o)),
        // all samples on one side of the median: no evidence of dependence
        Err(StatsError::DegenerateSeries(_)) => (true, None),
        Err(e) => return Err(EstimatorError::InvalidConfig(e.to_string())),
    };
    Ok(Verdict {
        stationary,
        independent,
        ers,
        runs,
    })
}

/// Probes the scenario with constant-rate traffic at `rate_bps`.
///
/// `index` seeds the run (rates of a sweep use their grid index). After the
/// e-th extension `(e+1)·I` samples exist and every `(e+1)`-th is tested.
pub fn probe_rate(
    template: &ScenarioSpec,
    rate_bps: f64,
    cfg: &ProbeConfig,
    index: u64,
) -> Result<RateProbeRecord, EstimatorError> {
    cfg.validate()?;
    if !(rate_bps.is_finite() && rate_bps > 0.0) {
        return Err(EstimatorError::InvalidConfig(format!(
            "probing rate must be positive, got {rate_bps}"
        )));
    }
    let spec = probe_scenario(template, rate_bps, cfg, index);
    let mut sim = Simulator::new(&spec)?;
    let gap = cfg
        .sampling_gap_packets
        .unwrap_or_else(|| (rate_bps * spec.rtt() / cfg.packet_bits).round().max(1.0) as u64);
    let mut sampler = Sampler {
        warmup: spec.warmup(),
        gap,
        rng: ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, "sampling")),
        next_id: None,
        target: 0,
        delays: Vec::new(),
    };

    let mut e = 0u32;
    loop {
        sampler.target = (e as usize + 1) * cfg.samples;
        if sampler.delays.len() < sampler.target {
            match sim.run_until(f64::INFINITY, &mut sampler) {
                RunStatus::Paused => {}
                status => {
                    return Err(SimError::Invariant(format!(
                        "probe run at {rate_bps} bit/s ended ({status:?}) with {} of {} samples",
                        sampler.delays.len(),
                        sampler.target
                    ))
                    .into())
                }
            }
        }
        let stride = e as usize + 1;
        let subset: Vec<f64> = sampler.delays[..sampler.target]
            .iter()
            .skip(e as usize)
            .step_by(stride)
            .copied()
            .collect();
        let mut series =
            SampleSeries::new(subset).map_err(|err| SimError::Invariant(err.to_string()))?;
        series.rate_bps = Some(rate_bps);
        series.extensions = e;
        let v = judge(&series, cfg)?;
        let done = !v.stationary || v.independent || e >= cfg.max_extensions;
        if !done {
            e += 1;
            continue;
        }
        if v.stationary && !v.independent {
            warn!(
                "rate {rate_bps} bit/s: samples still dependent after {e} extensions; \
                 treated as non-stationary"
            );
        }
        let usable = v.stationary && v.independent;
        let delay_quantile_s = if usable {
            Some(
                empirical_quantile(&series, 1.0 - cfg.xi)
                    .map_err(|err| SimError::Invariant(err.to_string()))?,
            )
        } else {
            None
        };
        return Ok(RateProbeRecord {
            rate_bps,
            extensions_used: e,
            stationary: v.stationary,
            independent: v.independent,
            ers: v.ers,
            runs: v.runs,
            backlog_quantile_bits: delay_quantile_s.map(|q| rate_bps * q),
            delay_quantile_s,
            samples: series,
        });
    }
}
