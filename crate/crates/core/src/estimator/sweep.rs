use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{probe_rate, EstimatorError, ProbeConfig, RateProbeRecord};
use crate::sim::ScenarioSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    /// Probed rates in increasing order; the last one is the terminal
    /// (non-stationary) rate unless `max_rates` was exhausted first.
    pub records: Vec<RateProbeRecord>,
    /// Whether the sweep ended at a failing rate.
    pub terminated: bool,
}

impl SweepOutcome {
    /// Largest rate whose record passed both tests.
    pub fn last_stationary_rate(&self) -> Option<f64> {
        self.records.iter().rev().find(|r| r.usable()).map(|r| r.rate_bps)
    }
}

/// Probes `r_j = j·r_acc` for `j = 1, 2, …` until the first rate that does not
/// reach a steady state.
///
/// Up to `jobs` rates are probed concurrently; records above the first failure
/// are discarded, so the outcome does not depend on `jobs`.
pub fn sweep(
    template: &ScenarioSpec,
    cfg: &ProbeConfig,
    jobs: usize,
) -> Result<SweepOutcome, EstimatorError> {
    cfg.validate()?;
    let jobs = jobs.max(1);
    let mut records = Vec::new();
    let mut next = 1usize;
    while next <= cfg.max_rates {
        let batch: Vec<usize> = (next..(next + jobs).min(cfg.max_rates + 1)).collect();
        let results: Vec<Result<RateProbeRecord, EstimatorError>> = if batch.len() == 1 {
            vec![probe_rate(template, batch[0] as f64 * cfg.r_acc_bps, cfg, batch[0] as u64)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|&j| {
                        s.spawn(move || {
                            probe_rate(template, j as f64 * cfg.r_acc_bps, cfg, j as u64)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("probe thread panicked"))
                    .collect()
            })
        };
        for (j, res) in batch.iter().zip(results) {
            let rec = res?;
            let usable = rec.usable();
            info!(
                "rate {} bit/s: stationary={} independent={} extensions={}",
                rec.rate_bps, rec.stationary, rec.independent, rec.extensions_used
            );
            records.push(rec);
            if !usable {
                if *j == 1 {
                    return Err(EstimatorError::EmptyUsableSet(format!(
                        "the lowest probing rate {} bit/s did not reach a steady state",
                        cfg.r_acc_bps
                    )));
                }
                return Ok(SweepOutcome {
                    records,
                    terminated: true,
                });
            }
        }
        next += batch.len();
    }
    warn!("sweep stopped after {} rates without a failing rate", cfg.max_rates);
    Ok(SweepOutcome {
        records,
        terminated: false,
    })
}
