use std::path::Path;

use flowbench_core::sim::{cwnd_autocorrelation, run_scenario, ScenarioSpec, SimOutput};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::{base_dir, load_json, num, OutDir};
use crate::simulate::prepare;

fn default_tick() -> f64 {
    1e-3
}

fn default_max_lag() -> f64 {
    3.0
}

fn default_lag_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutocorrConfig {
    pub scenario: ScenarioSpec,
    /// Resampling step of the window series.
    #[serde(default = "default_tick")]
    pub tick_s: f64,
    #[serde(default = "default_max_lag")]
    pub max_lag_s: f64,
    #[serde(default = "default_lag_step")]
    pub lag_step_s: f64,
}

#[derive(Serialize)]
struct Summary {
    delivered_rate_bps: f64,
    signals: u64,
    /// Lag of the largest autocorrelation after the first local minimum.
    peak_lag_s: Option<f64>,
    peak_autocorrelation: Option<f64>,
}

/// Autocorrelation of the post-warmup window series at `step, 2·step, …, max`.
pub fn window_autocorrelation(
    sim: &SimOutput,
    tick: f64,
    step: f64,
    max: f64,
) -> Result<Vec<(f64, f64)>> {
    let n = (max / step).round() as usize;
    let lags: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    Ok(cwnd_autocorrelation(&sim.cwnd_series, sim.warmup, sim.duration, tick, &lags)?)
}

/// Highest value past the first local minimum: the first repeat of the
/// window's cycle.
pub fn secondary_peak(ac: &[(f64, f64)]) -> Option<(f64, f64)> {
    let first_min = (1..ac.len().saturating_sub(1))
        .find(|&i| ac[i].1 <= ac[i - 1].1 && ac[i].1 <= ac[i + 1].1)?;
    ac[first_min..]
        .iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, x| match best {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        })
}

pub fn run(config: &Path, out: &OutDir, seed: Option<u64>) -> Result<()> {
    let mut cfg: AutocorrConfig = load_json(config)?;
    prepare(&mut cfg.scenario, &base_dir(config), seed)?;
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(cfg.tick_s) || !ok(cfg.lag_step_s) || !ok(cfg.max_lag_s) {
        return Err(CliError::Config(
            "tick_s, lag_step_s and max_lag_s must be positive".into(),
        ));
    }
    let sim = run_scenario(&cfg.scenario)?;
    let ac = window_autocorrelation(&sim, cfg.tick_s, cfg.lag_step_s, cfg.max_lag_s)?;
    out.write_with("cwnd.csv", |w| Ok(sim.write_cwnd_csv(w)?))?;
    out.write_csv(
        "autocorr.csv",
        &["lag_s", "autocorrelation"],
        ac.iter().map(|&(l, c)| [num(l), num(c)]),
    )?;
    let peak = secondary_peak(&ac);
    out.write_json(
        "summary.json",
        &Summary {
            delivered_rate_bps: sim.delivered_rate(),
            signals: sim.marked_count + sim.dropped_count,
            peak_lag_s: peak.map(|p| p.0),
            peak_autocorrelation: peak.map(|p| p.1),
        },
    )
}
