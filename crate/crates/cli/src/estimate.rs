use std::path::Path;

use flowbench_core::calculus::{attainable_rate_on, log_grid, ServiceCurve};
use flowbench_core::estimator::{assemble_estimate, sweep, ProbeConfig, SweepOutcome};
use flowbench_core::sim::ScenarioSpec;
use flowbench_core::stats::TestOutcome;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{base_dir, load_json, num, opt, OutDir};
use crate::simulate::prepare;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaGrid {
    pub t_min_s: f64,
    pub t_max_s: f64,
    pub points_per_decade: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self {
            t_min_s: 1e-3,
            t_max_s: 100.0,
            points_per_decade: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Template whose source is replaced by the constant-rate probe traffic.
    pub scenario: ScenarioSpec,
    pub probe: ProbeConfig,
    #[serde(default)]
    pub alpha_grid: AlphaGrid,
}

impl EstimateConfig {
    pub fn prepare(&mut self, base: &Path, seed: Option<u64>) -> Result<()> {
        prepare(&mut self.scenario, base, seed)?;
        if let Some(s) = seed {
            self.probe.seed = s;
        }
        self.probe.validate()?;
        let g = &self.alpha_grid;
        if !(g.t_min_s > 0.0 && g.t_max_s >= g.t_min_s && g.points_per_decade > 0) {
            return Err(crate::error::CliError::Config(
                "alpha_grid needs 0 < t_min_s <= t_max_s and points_per_decade >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-rate summary written to the report; the raw samples are left out.
#[derive(Serialize)]
struct RecordSummary {
    rate_bps: f64,
    stationary: bool,
    independent: bool,
    extensions_used: u32,
    samples_tested: usize,
    delay_quantile_s: Option<f64>,
    backlog_quantile_bits: Option<f64>,
    ers: Option<TestOutcome>,
    runs: Option<TestOutcome>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a EstimateConfig,
    terminated: bool,
    last_stationary_rate_bps: Option<f64>,
    epsilon: f64,
    records: Vec<RecordSummary>,
    curve: &'a ServiceCurve,
}

pub struct Estimate {
    pub sweep: SweepOutcome,
    pub curve: ServiceCurve,
}

pub fn estimate(cfg: &EstimateConfig, jobs: usize) -> Result<Estimate> {
    let outcome = sweep(&cfg.scenario, &cfg.probe, jobs)?;
    let curve = assemble_estimate(&outcome.records, cfg.probe.xi)?;
    Ok(Estimate {
        sweep: outcome,
        curve,
    })
}

pub fn alpha_rows(curve: &ServiceCurve, grid: &AlphaGrid) -> Vec<(f64, f64)> {
    let durations = log_grid(grid.t_min_s, grid.t_max_s, grid.points_per_decade);
    attainable_rate_on(curve, &durations)
}

pub fn write_estimate(out: &OutDir, cfg: &EstimateConfig, est: &Estimate) -> Result<()> {
    let records = est
        .sweep
        .records
        .iter()
        .map(|r| RecordSummary {
            rate_bps: r.rate_bps,
            stationary: r.stationary,
            independent: r.independent,
            extensions_used: r.extensions_used,
            samples_tested: r.samples.len(),
            delay_quantile_s: r.delay_quantile_s,
            backlog_quantile_bits: r.backlog_quantile_bits,
            ers: r.ers,
            runs: r.runs,
        })
        .collect();
    out.write_json(
        "estimate.json",
        &Report {
            config: cfg,
            terminated: est.sweep.terminated,
            last_stationary_rate_bps: est.sweep.last_stationary_rate(),
            epsilon: est.curve.epsilon(),
            records,
            curve: &est.curve,
        },
    )?;
    let pts = est.curve.function().map_or(&[][..], |f| f.breakpoints());
    out.write_csv(
        "curve.csv",
        &["t_seconds", "value_bits"],
        pts.iter().map(|&(t, v)| [num(t), num(v)]),
    )?;
    out.write_csv(
        "alpha.csv",
        &["t_seconds", "rate_bps"],
        alpha_rows(&est.curve, &cfg.alpha_grid)
            .into_iter()
            .map(|(t, r)| [num(t), num(r)]),
    )?;
    out.write_csv(
        "quantiles.csv",
        &["rate_bps", "delay_q_s", "backlog_q_bits", "stationary", "independent"],
        est.sweep.records.iter().map(|r| {
            [
                num(r.rate_bps),
                opt(r.delay_quantile_s),
                opt(r.backlog_quantile_bits),
                r.stationary.to_string(),
                r.independent.to_string(),
            ]
        }),
    )
}

pub fn run(config: &Path, out: &OutDir, seed: Option<u64>, jobs: usize) -> Result<()> {
    let mut cfg: EstimateConfig = load_json(config)?;
    cfg.prepare(&base_dir(config), seed)?;
    let est = estimate(&cfg, jobs)?;
    write_estimate(out, &cfg, &est)
}
