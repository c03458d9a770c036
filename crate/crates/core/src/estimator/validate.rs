use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::calculus::{delay_bound, CalculusError, CumulativeProcess, ServiceCurve};
use crate::rng::child_seed;
use crate::sim::{Observer, PacketRecord, RunStatus, ScenarioSpec, SimError, Simulator, SourceSpec};
use crate::stats::median;

// Delays closer than this to the bound count as meeting it.
const TIME_TOL_S: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    pub repetitions: usize,
    /// Level of the empirical quantiles, `1 − epsilon_target`.
    pub epsilon_target: f64,
    /// Constant-rate traffic at the trace's mean rate sent before the trace so
    /// that the connection is in steady state; defaults to the scenario warmup.
    #[serde(default)]
    pub lead_in_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketBound {
    /// 1-based index of the packet within the trace.
    pub pkt: u64,
    pub analytic_bound_s: f64,
    pub empirical_q_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub packets: Vec<PacketBound>,
    /// Fraction of packets whose empirical quantile exceeds the bound.
    pub violation_fraction: f64,
    /// Median of bound / quantile over packets with a positive quantile.
    pub median_ratio: Option<f64>,
    pub epsilon_target: f64,
    pub repetitions: usize,
}

/// Keeps the `k` largest delays of every packet.
struct TopK {
    k: usize,
    values: Vec<Vec<f64>>,
}

impl TopK {
    fn new(k: usize, packets: usize) -> Self {
        Self {
            k,
            values: vec![Vec::with_capacity(k + 1); packets],
        }
    }

    fn insert(&mut self, i: usize, v: f64) {
        let slot = &mut self.values[i];
        if slot.len() == self.k && v <= slot[self.k - 1] {
            return;
        }
        let pos = slot.partition_point(|&x| x >= v);
        slot.insert(pos, v);
        slot.truncate(self.k);
    }

    fn merge(&mut self, other: TopK) {
        for (i, vs) in other.values.into_iter().enumerate() {
            for v in vs {
                self.insert(i, v);
            }
        }
    }
}

struct TraceCollector<'a> {
    first_id: u64,
    top: &'a mut TopK,
    delivered: u64,
}

impl Observer for TraceCollector<'_> {
    fn on_delivery(&mut self, r: &PacketRecord) -> bool {
        self.delivered += 1;
        if r.id >= self.first_id {
            self.top.insert((r.id - self.first_id) as usize, r.t4 - r.t1);
        }
        true
    }
}

/// Trace preceded by `lead_in_packets` packets at the trace's mean rate.
fn with_lead_in(
    trace: &CumulativeProcess,
    lead_in_packets: u64,
    packet_bits: f64,
) -> Result<CumulativeProcess, CalculusError> {
    if lead_in_packets == 0 {
        return Ok(trace.clone());
    }
    let bits = lead_in_packets as f64 * packet_bits;
    let t0 = bits / trace.mean_rate();
    let mut points = vec![(0.0, 0.0), (t0, bits)];
    points.extend(trace.breakpoints()[1..].iter().map(|&(t, v)| (t0 + t, bits + v)));
    CumulativeProcess::new(points)
}

fn run_repetitions(
    spec: &ScenarioSpec,
    seeds: &[u64],
    first_id: u64,
    k: usize,
    packets: usize,
) -> Result<TopK, EstimatorError> {
    let mut top = TopK::new(k, packets);
    for &seed in seeds {
        let mut s = spec.clone();
        s.seed = seed;
        let mut sim = Simulator::new(&s)?;
        let mut obs = TraceCollector {
            first_id,
            top: &mut top,
            delivered: 0,
        };
        let status = sim.run_until(f64::INFINITY, &mut obs);
        if status != RunStatus::Idle || obs.delivered != sim.created_count() {
            return Err(SimError::Invariant(format!(
                "validation run did not drain: {} of {} packets delivered",
                obs.delivered,
                sim.created_count()
            ))
            .into());
        }
    }
    Ok(top)
}

/// Compares the delay bound computed from `estimate` with empirical per-packet
/// delay quantiles of `trace` sent through the scenario.
pub fn validate_delay_bounds(
    estimate: &ServiceCurve,
    trace: &CumulativeProcess,
    template: &ScenarioSpec,
    cfg: &ValidationConfig,
    jobs: usize,
) -> Result<ValidationReport, EstimatorError> {
    if cfg.repetitions == 0 {
        return Err(EstimatorError::InvalidConfig("repetitions must be at least 1".into()));
    }
    if !(cfg.epsilon_target > 0.0 && cfg.epsilon_target < 1.0) {
        return Err(EstimatorError::InvalidConfig(format!(
            "epsilon_target must lie in (0, 1), got {}",
            cfg.epsilon_target
        )));
    }
    let mss = template.mss_bits;
    let trace_packets = (trace.function().last_value() / mss * (1.0 + 1e-12)).floor() as u64;
    if trace_packets == 0 {
        return Err(EstimatorError::InvalidConfig(
            "trace carries less than one packet".into(),
        ));
    }
    let lead_in_s = cfg.lead_in_s.unwrap_or_else(|| template.warmup());
    let lead_in_packets = (lead_in_s * trace.mean_rate() / mss).round() as u64;
    let arrivals = with_lead_in(trace, lead_in_packets, mss)?;
    let analysis = delay_bound(&arrivals, estimate)?;

    let mut spec = template.clone();
    spec.source = SourceSpec::Trace {
        breakpoints: arrivals.breakpoints().to_vec(),
    };
    spec.validate()?;

    let reps = cfg.repetitions;
    let rank = ((1.0 - cfg.epsilon_target) * reps as f64 * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let k = reps - rank + 1;
    let seeds: Vec<u64> = (0..reps as u64).map(|i| child_seed(cfg.seed, i)).collect();
    let jobs = jobs.clamp(1, reps);
    let chunk = reps.div_ceil(jobs);
    let n = trace_packets as usize;
    let top = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                let spec = &spec;
                s.spawn(move || run_repetitions(spec, part, lead_in_packets, k, n))
            })
            .collect();
        let mut merged = TopK::new(k, n);
        for h in handles {
            merged.merge(h.join().expect("validation thread panicked")?);
        }
        Ok::<_, EstimatorError>(merged)
    })?;

    let f = arrivals.function();
    let mut packets = Vec::with_capacity(n);
    let mut violations = 0usize;
    let mut ratios = Vec::new();
    for (i, vs) in top.values.iter().enumerate() {
        let level = (lead_in_packets + i as u64 + 1) as f64 * mss;
        let t = f.inverse_ge(level).expect("packet level lies within the trace");
        let bound = analysis.delay_at(t);
        let q = vs[k - 1];
        if q > bound + TIME_TOL_S {
            violations += 1;
        }
        if q > 0.0 {
            ratios.push(bound / q);
        }
        packets.push(PacketBound {
            pkt: i as u64 + 1,
            analytic_bound_s: bound,
            empirical_q_s: q,
        });
    }
    Ok(ValidationReport {
        packets,
        violation_fraction: violations as f64 / n as f64,
        median_ratio: median(&ratios),
        epsilon_target: cfg.epsilon_target,
        repetitions: reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_keeps_largest_sorted() {
        let mut t = TopK::new(3, 1);
        for v in [1.0, 5.0, 3.0, 4.0, 2.0] {
            t.insert(0, v);
        }
        assert_eq!(t.values[0], vec![5.0, 4.0, 3.0]);
    }

    #[test]
    fn lead_in_shifts_the_trace() {
        let trace = CumulativeProcess::new(vec![(0.0, 0.0), (1.0, 100.0), (2.0, 100.0)]).unwrap();
        let a = with_lead_in(&trace, 5, 10.0).unwrap();
        assert_eq!(a.breakpoints(), &[(0.0, 0.0), (1.0, 50.0), (2.0, 150.0), (3.0, 150.0)]);
    }
}
