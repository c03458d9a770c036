use std::path::{Path, PathBuf};

use flowbench_core::calculus::{read_two_column_csv, CumulativeProcess, ServiceCurve};
use flowbench_core::estimator::{validate_delay_bounds, ValidationConfig, ValidationReport};
use flowbench_core::sim::ScenarioSpec;
use flowbench_core::traffic::{generate_vbr, VbrSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::{base_dir, load_json, num, OutDir};
use crate::simulate::prepare;

/// Arrival trace of the validation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSource {
    /// Synthetic on-off trace.
    Vbr(VbrSpec),
    /// Two-column CSV `t_seconds,cum_bits`, relative to the config file.
    Csv { path: PathBuf },
}

impl TraceSource {
    pub fn load(&self, base: &Path, seed: Option<u64>) -> Result<CumulativeProcess> {
        match self {
            TraceSource::Vbr(spec) => {
                let mut spec = spec.clone();
                if let Some(s) = seed {
                    spec.seed = s;
                }
                Ok(generate_vbr(&spec)?)
            }
            TraceSource::Csv { path } => {
                let full = base.join(path);
                let file = std::fs::File::open(&full).map_err(|e| {
                    CliError::Config(format!("cannot open trace {}: {e}", full.display()))
                })?;
                let pts = read_two_column_csv(file).map_err(|e| {
                    CliError::Config(format!("cannot parse trace {}: {e}", full.display()))
                })?;
                Ok(CumulativeProcess::new(pts)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub scenario: ScenarioSpec,
    /// Estimate report written by `estimate`, or a bare service-curve document.
    pub estimate: PathBuf,
    pub trace: TraceSource,
    pub repetitions: usize,
    /// Defaults to the estimate's violation probability.
    #[serde(default)]
    pub epsilon_target: Option<f64>,
    #[serde(default)]
    pub lead_in_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EstimateFile {
    Report { curve: ServiceCurve },
    Curve(ServiceCurve),
}

#[derive(Serialize)]
pub struct Summary {
    pub violation_fraction: f64,
    pub epsilon_target: f64,
    pub bounds_hold: bool,
    pub median_bound_to_quantile: Option<f64>,
    pub packets: usize,
    pub repetitions: usize,
}

pub fn write_report(out: &OutDir, report: &ValidationReport) -> Result<Summary> {
    out.write_csv(
        "bounds_vs_quantiles.csv",
        &["pkt", "analytic_bound_s", "empirical_q_s"],
        report
            .packets
            .iter()
            .map(|p| [p.pkt.to_string(), num(p.analytic_bound_s), num(p.empirical_q_s)]),
    )?;
    let summary = Summary {
        violation_fraction: report.violation_fraction,
        epsilon_target: report.epsilon_target,
        bounds_hold: report.violation_fraction <= report.epsilon_target,
        median_bound_to_quantile: report.median_ratio,
        packets: report.packets.len(),
        repetitions: report.repetitions,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}

pub fn run(config: &Path, out: &OutDir, seed: Option<u64>, jobs: usize) -> Result<()> {
    let mut cfg: ValidateConfig = load_json(config)?;
    let base = base_dir(config);
    prepare(&mut cfg.scenario, &base, None)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let curve = match load_json::<EstimateFile>(&base.join(&cfg.estimate))? {
        EstimateFile::Report { curve } | EstimateFile::Curve(curve) => curve,
    };
    let trace = cfg.trace.load(&base, None)?;
    let vcfg = ValidationConfig {
        repetitions: cfg.repetitions,
        epsilon_target: cfg.epsilon_target.unwrap_or_else(|| curve.epsilon()),
        lead_in_s: cfg.lead_in_s,
        seed: cfg.seed,
    };
    let report = validate_delay_bounds(&curve, &trace, &cfg.scenario, &vcfg, jobs)?;
    write_report(out, &report)?;
    Ok(())
}
