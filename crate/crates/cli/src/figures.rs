//! Batch driver that regenerates the reference figures and checks their
//! qualitative and quantitative claims.

use std::path::{Path, PathBuf};

use flowbench_core::calculus::{log_grid, static_window_curve, ServiceCurve};
use flowbench_core::estimator::{validate_delay_bounds, ProbeConfig, ValidationConfig};
use flowbench_core::sim::{
    run_scenario, stack_buffering_probability, ScenarioSpec, SignalProcess, SimOutput, SourceSpec,
    WindowControllerSpec,
};
use log::info;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::autocorr::window_autocorrelation;
use crate::error::{CliError, Result};
use crate::estimate::{alpha_rows, estimate, write_estimate, AlphaGrid, EstimateConfig};
use crate::io::{num, parse_json, OutDir};
use crate::simulate::{prepare, write_ccdf};
use crate::validate::{write_report, TraceSource};

pub const FIGURES: [&str; 7] = ["4a", "4b", "5a", "5b", "7", "9", "12"];

fn bundled(id: &str) -> &'static str {
    match id {
        "4a" => include_str!("../configs/figures/4a.json"),
        "4b" => include_str!("../configs/figures/4b.json"),
        "5a" => include_str!("../configs/figures/5a.json"),
        "5b" => include_str!("../configs/figures/5b.json"),
        "7" => include_str!("../configs/figures/7.json"),
        "9" => include_str!("../configs/figures/9.json"),
        "12" => include_str!("../configs/figures/12.json"),
        _ => unreachable!("unknown figure {id}"),
    }
}

fn default_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveFigure {
    pub estimate: EstimateConfig,
    /// Accepted values of the last stationary rate, packets/s.
    pub expected_last_rates_pps: Vec<f64>,
    /// Reference long-term rate of the greedy scenario, packets/s.
    #[serde(default)]
    pub greedy_reference_pps: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub greedy_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationFigure {
    pub estimate: EstimateConfig,
    pub trace: TraceSource,
    pub repetitions: usize,
    #[serde(default)]
    pub lead_in_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_periodic() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackFigure {
    pub periodic: ScenarioSpec,
    pub bernoulli: ScenarioSpec,
    /// Load relative to the periodic scenario's greedy rate.
    pub utilization: f64,
    #[serde(default)]
    pub threshold_s: f64,
    #[serde(default = "default_max_periodic")]
    pub max_periodic_probability: f64,
}

fn default_min_ratio() -> f64 {
    1.5
}

fn default_lag_tolerance() -> f64 {
    0.1
}

fn default_tick() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossFigure {
    pub periodic: ScenarioSpec,
    pub bernoulli: ScenarioSpec,
    pub probe: ProbeConfig,
    /// Timescales over which the attainable rates are compared.
    pub t_min_s: f64,
    pub t_max_s: f64,
    #[serde(default = "default_min_ratio")]
    pub min_ratio: f64,
    #[serde(default = "default_lag_tolerance")]
    pub lag_tolerance: f64,
    #[serde(default = "default_tick")]
    pub tick_s: f64,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, value: f64, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        value,
        pass,
        detail,
    }
}

#[derive(Debug, Serialize)]
pub struct FigureChecks {
    pub figure: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Ctx<'a> {
    out: &'a OutDir,
    /// Directory that relative paths in the figure config resolve against.
    base: PathBuf,
    seed: Option<u64>,
    jobs: usize,
}

fn load<T: DeserializeOwned>(id: &str, dir: Option<&Path>) -> Result<(T, PathBuf)> {
    if let Some(d) = dir {
        let p = d.join(format!("{id}.json"));
        if p.is_file() {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            return Ok((parse_json(&text, &p.display().to_string())?, d.to_path_buf()));
        }
    }
    Ok((
        parse_json(bundled(id), &format!("bundled figure {id} config"))?,
        PathBuf::from("."),
    ))
}

fn pps(rate_bps: f64, mss: f64) -> f64 {
    rate_bps / mss
}

fn static_window(ctx: &Ctx, mut cfg: EstimateConfig) -> Result<Vec<Check>> {
    cfg.prepare(&ctx.base, ctx.seed)?;
    let s = &cfg.scenario;
    let (window, capacity) = match (&s.controller, s.path.capacity_bps) {
        (WindowControllerSpec::Static { window_bits }, Some(c)) => (*window_bits, c),
        _ => {
            return Err(CliError::Config(
                "static-window figures need a static controller and a finite capacity".into(),
            ))
        }
    };
    let latency = s.path.fwd_delay_s;
    let packet_time = s.mss_bits / capacity;
    let est = estimate(&cfg, ctx.jobs)?;
    write_estimate(ctx.out, &cfg, &est)?;
    let analytic = static_window_curve(capacity, latency, window, 10.0)?;
    let pts = analytic.function().map_or(&[][..], |f| f.breakpoints());
    ctx.out.write_csv(
        "analytic.csv",
        &["t_seconds", "value_bits"],
        pts.iter().map(|&(t, v)| [num(t), num(v)]),
    )?;

    let step = cfg.probe.r_acc_bps;
    let expected = ((window / s.rtt()).min(capacity) / step * (1.0 + 1e-12)).floor() * step;
    let rate = est.curve.long_term_rate();
    let excess = (0..=10_000)
        .map(|k| k as f64 * 1e-3)
        .map(|t| est.curve.eval(t) - analytic.eval(t))
        .fold(f64::NEG_INFINITY, f64::max);
    let lat = est.curve.latency();
    Ok(vec![
        check(
            "long_term_rate_on_grid",
            rate,
            (rate / expected - 1.0).abs() < 1e-9,
            format!("{rate} bit/s, expected {expected} bit/s"),
        ),
        check(
            "latency_within_one_packet_time",
            lat,
            (lat - latency).abs() <= packet_time + 1e-12,
            format!("{lat} s, path latency {latency} s, packet time {packet_time} s"),
        ),
        check(
            "below_analytic_curve",
            excess,
            excess <= s.mss_bits,
            format!("largest excess {excess} bit over 10 s, allowed one packet"),
        ),
    ])
}

fn adaptive(ctx: &Ctx, mut fig: AdaptiveFigure) -> Result<Vec<Check>> {
    fig.estimate.prepare(&ctx.base, ctx.seed)?;
    let cfg = &fig.estimate;
    let mss = cfg.scenario.mss_bits;
    let est = estimate(cfg, ctx.jobs)?;
    write_estimate(ctx.out, cfg, &est)?;
    let last = est.sweep.last_stationary_rate().map_or(0.0, |r| pps(r, mss));
    let mut checks = vec![check(
        "last_stationary_rate",
        last,
        fig.expected_last_rates_pps.iter().any(|&r| (r - last).abs() < 1e-6),
        format!("{last} pkts/s, accepted {:?}", fig.expected_last_rates_pps),
    )];
    if let Some(reference) = fig.greedy_reference_pps {
        let mut greedy = cfg.scenario.clone();
        greedy.source = SourceSpec::Greedy;
        let thr = pps(run_scenario(&greedy)?.delivered_rate(), mss);
        let dev = thr / reference - 1.0;
        checks.push(check(
            "greedy_throughput",
            thr,
            dev.abs() <= fig.greedy_tolerance,
            format!("{thr:.1} pkts/s, reference {reference} pkts/s ({:+.1}%)", 100.0 * dev),
        ));
    }
    Ok(checks)
}

fn validation(ctx: &Ctx, mut fig: ValidationFigure) -> Result<Vec<Check>> {
    fig.estimate.prepare(&ctx.base, ctx.seed)?;
    if let Some(s) = ctx.seed {
        fig.seed = s;
    }
    let est = estimate(&fig.estimate, ctx.jobs)?;
    write_estimate(&ctx.out.subdir("estimate")?, &fig.estimate, &est)?;
    let trace = fig.trace.load(&ctx.base, None)?;
    ctx.out.write_csv(
        "trace.csv",
        &["t_seconds", "cum_bits"],
        trace.breakpoints().iter().map(|&(t, v)| [num(t), num(v)]),
    )?;
    let eps = est.curve.epsilon();
    let vcfg = ValidationConfig {
        repetitions: fig.repetitions,
        epsilon_target: eps,
        lead_in_s: fig.lead_in_s,
        seed: fig.seed,
    };
    let report = validate_delay_bounds(&est.curve, &trace, &fig.estimate.scenario, &vcfg, ctx.jobs)?;
    let summary = write_report(ctx.out, &report)?;
    Ok(vec![check(
        "violation_fraction_within_epsilon",
        summary.violation_fraction,
        summary.bounds_hold,
        format!(
            "{} of packets above the bound, ε = {eps}; median bound/quantile {:?}",
            summary.violation_fraction, summary.median_bound_to_quantile
        ),
    )])
}

fn greedy_run(spec: &ScenarioSpec) -> Result<SimOutput> {
    let mut s = spec.clone();
    s.source = SourceSpec::Greedy;
    Ok(run_scenario(&s)?)
}

fn stack(ctx: &Ctx, mut fig: StackFigure) -> Result<Vec<Check>> {
    prepare(&mut fig.periodic, &ctx.base, ctx.seed)?;
    prepare(&mut fig.bernoulli, &ctx.base, ctx.seed)?;
    if !(fig.utilization > 0.0 && fig.utilization < 1.0) {
        return Err(CliError::Config(format!(
            "utilization must lie in (0, 1), got {}",
            fig.utilization
        )));
    }
    let rate = fig.utilization * greedy_run(&fig.periodic)?.delivered_rate();
    let mut probs = Vec::new();
    for (name, spec) in [("periodic", &fig.periodic), ("bernoulli", &fig.bernoulli)] {
        let mut s = spec.clone();
        s.source = SourceSpec::ConstantRate { rate_bps: rate };
        let sim = run_scenario(&s)?;
        write_ccdf(ctx.out, &format!("ccdf_{name}.csv"), &sim)?;
        probs.push(stack_buffering_probability(&sim, fig.threshold_s)?);
    }
    let (p, b) = (probs[0], probs[1]);
    Ok(vec![
        check(
            "periodic_rarely_buffers",
            p,
            p < fig.max_periodic_probability,
            format!("P(sender stack delay > {} s) = {p}", fig.threshold_s),
        ),
        check(
            "bernoulli_buffers_more",
            b,
            b > 0.0 && b > p,
            format!("Bernoulli {b} vs periodic {p}"),
        ),
    ])
}

fn loss(ctx: &Ctx, mut fig: LossFigure) -> Result<Vec<Check>> {
    prepare(&mut fig.periodic, &ctx.base, ctx.seed)?;
    prepare(&mut fig.bernoulli, &ctx.base, ctx.seed)?;
    if let Some(s) = ctx.seed {
        fig.probe.seed = s;
    }
    fig.probe.validate()?;
    let every_n = match fig.periodic.signal.process {
        SignalProcess::Periodic { every_n_packets } => every_n_packets,
        _ => {
            return Err(CliError::Config(
                "the periodic scenario needs a periodic signal process".into(),
            ))
        }
    };
    if !(fig.t_min_s > 0.0 && fig.t_max_s >= fig.t_min_s) {
        return Err(CliError::Config("need 0 < t_min_s <= t_max_s".into()));
    }

    let mut curves: Vec<ServiceCurve> = Vec::new();
    for (name, spec) in [("periodic", &fig.periodic), ("bernoulli", &fig.bernoulli)] {
        let cfg = EstimateConfig {
            scenario: spec.clone(),
            probe: fig.probe.clone(),
            alpha_grid: AlphaGrid::default(),
        };
        let est = estimate(&cfg, ctx.jobs)?;
        write_estimate(&ctx.out.subdir(name)?, &cfg, &est)?;
        curves.push(est.curve);
    }
    let grid = AlphaGrid {
        t_min_s: fig.t_min_s,
        t_max_s: fig.t_max_s,
        points_per_decade: 20,
    };
    let per = alpha_rows(&curves[0], &grid);
    let ber = alpha_rows(&curves[1], &grid);
    ctx.out.write_csv(
        "attainable_rate.csv",
        &["t_seconds", "periodic_bps", "bernoulli_bps"],
        per.iter().zip(&ber).map(|(p, b)| [num(p.0), num(p.1), num(b.1)]),
    )?;
    let (t_best, ratio) = per
        .iter()
        .zip(&ber)
        .filter(|(_, b)| b.1 > 0.0)
        .map(|(p, b)| (p.0, p.1 / b.1))
        .fold((0.0, 0.0), |a, x| if x.1 > a.1 { x } else { a });

    let per_sim = greedy_run(&fig.periodic)?;
    let ber_sim = greedy_run(&fig.bernoulli)?;
    let period = every_n as f64 * fig.periodic.mss_bits / per_sim.delivered_rate();
    let max_lag = (2.0 * period).max(3.0);
    let step = fig.tick_s.max(period / 200.0);
    let ac_per = window_autocorrelation(&per_sim, fig.tick_s, step, max_lag)?;
    let ac_ber = window_autocorrelation(&ber_sim, fig.tick_s, step, max_lag)?;
    ctx.out.write_csv(
        "autocorr.csv",
        &["lag_s", "periodic", "bernoulli"],
        ac_per.iter().zip(&ac_ber).map(|(p, b)| [num(p.0), num(p.1), num(b.1)]),
    )?;
    // the largest value between half and one and a half loss periods
    let (i_peak, peak) = ac_per
        .iter()
        .enumerate()
        .filter(|(_, x)| x.0 >= 0.5 * period && x.0 <= 1.5 * period)
        .map(|(i, x)| (i, x.1))
        .fold((0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
    let peak_lag = ac_per[i_peak].0;
    let ber_at_peak = ac_ber[i_peak].1;
    let grid_pts = log_grid(fig.t_min_s, fig.t_max_s, 20).len();
    Ok(vec![
        check(
            "attainable_rate_ratio",
            ratio,
            ratio >= fig.min_ratio,
            format!(
                "largest periodic/Bernoulli ratio {ratio:.3} at t = {t_best:.3} s over {grid_pts} timescales"
            ),
        ),
        check(
            "autocorrelation_peak_at_loss_period",
            peak_lag,
            (peak_lag / period - 1.0).abs() <= fig.lag_tolerance,
            format!("maximum {peak:.3} at lag {peak_lag:.3} s, loss period {period:.3} s"),
        ),
        check(
            "bernoulli_autocorrelation_lower",
            ber_at_peak,
            ber_at_peak < peak,
            format!("Bernoulli {ber_at_peak:.3} vs periodic {peak:.3} at lag {peak_lag:.3} s"),
        ),
    ])
}

fn run_one(id: &str, out: &OutDir, dir: Option<&Path>, seed: Option<u64>, jobs: usize) -> Result<Vec<Check>> {
    let ctx = |base: PathBuf| Ctx {
        out,
        base,
        seed,
        jobs,
    };
    match id {
        "4a" | "4b" => {
            let (cfg, base) = load(id, dir)?;
            static_window(&ctx(base), cfg)
        }
        "5a" | "5b" => {
            let (cfg, base) = load(id, dir)?;
            adaptive(&ctx(base), cfg)
        }
        "7" => {
            let (cfg, base) = load(id, dir)?;
            validation(&ctx(base), cfg)
        }
        "9" => {
            let (cfg, base) = load(id, dir)?;
            stack(&ctx(base), cfg)
        }
        "12" => {
            let (cfg, base) = load(id, dir)?;
            loss(&ctx(base), cfg)
        }
        other => Err(CliError::Config(format!("unknown figure {other}"))),
    }
}

/// Runs the selected figures; every figure gets its own subdirectory with a
/// `checks.json`. Returns the exit code.
pub fn run(
    config_dir: Option<&Path>,
    out: &OutDir,
    seed: Option<u64>,
    jobs: usize,
    only: &[String],
) -> Result<i32> {
    if let Some(d) = config_dir {
        if !d.is_dir() {
            return Err(CliError::Config(format!(
                "figure config directory {} does not exist",
                d.display()
            )));
        }
    }
    for id in only {
        if !FIGURES.contains(&id.as_str()) {
            return Err(CliError::Config(format!(
                "unknown figure {id}; available: {}",
                FIGURES.join(", ")
            )));
        }
    }
    let mut code = 0;
    let mut all = Vec::new();
    for id in FIGURES.iter().filter(|id| only.is_empty() || only.iter().any(|o| o == *id)) {
        info!("figure {id}");
        let sub = out.subdir(id)?;
        let result = run_one(id, &sub, config_dir, seed, jobs);
        let fc = match result {
            Ok(checks) => FigureChecks {
                figure: id.to_string(),
                pass: checks.iter().all(|c| c.pass),
                checks,
                error: None,
            },
            Err(e) => {
                if code == 0 || code == 3 {
                    code = e.exit_code();
                }
                FigureChecks {
                    figure: id.to_string(),
                    pass: false,
                    checks: Vec::new(),
                    error: Some(e.to_string()),
                }
            }
        };
        if !fc.pass && code == 0 {
            code = 3;
        }
        println!(
            "figure {id}: {}{}",
            if fc.pass { "PASS" } else { "FAIL" },
            fc.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
        for c in &fc.checks {
            println!("  {} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
        }
        sub.write_json("checks.json", &fc)?;
        all.push(fc);
    }
    #[derive(Serialize)]
    struct Entry<'a> {
        figure: &'a str,
        pass: bool,
    }
    let summary: Vec<Entry> = all
        .iter()
        .map(|f| Entry {
            figure: &f.figure,
            pass: f.pass,
        })
        .collect();
    out.write_json("checks.json", &summary)?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowbench_core::estimator::ProbeConfig;
    use flowbench_core::scenarios;
    use serde_json::Value;

    fn pretty<T: Serialize>(v: &T) -> String {
        serde_json::to_string_pretty(v).unwrap() + "\n"
    }

    fn estimate_cfg(scenario: ScenarioSpec, probe: ProbeConfig) -> EstimateConfig {
        EstimateConfig {
            scenario,
            probe,
            alpha_grid: AlphaGrid::default(),
        }
    }

    /// The bundled configs as built from the reference scenarios.
    fn reference(id: &str) -> String {
        let adaptive = |r_acc: f64, expected: Vec<f64>| AdaptiveFigure {
            estimate: estimate_cfg(scenarios::adaptive_marking(), scenarios::adaptive_probe(r_acc, 1e-4)),
            expected_last_rates_pps: expected,
            greedy_reference_pps: Some(scenarios::ADAPTIVE_MATHIS_PPS),
            greedy_tolerance: 0.05,
        };
        match id {
            "4a" => pretty(&estimate_cfg(scenarios::static_window(500e3), scenarios::static_window_probe())),
            "4b" => pretty(&estimate_cfg(scenarios::static_window(2e6), scenarios::static_window_probe())),
            "5a" => pretty(&adaptive(100.0, vec![4000.0, 4100.0, 4200.0])),
            "5b" => pretty(&adaptive(800.0, vec![4000.0])),
            "7" => pretty(&ValidationFigure {
                estimate: estimate_cfg(scenarios::adaptive_marking(), scenarios::validation_probe()),
                trace: TraceSource::Vbr(scenarios::half_load_vbr()),
                repetitions: 1000,
                lead_in_s: None,
                seed: 7,
            }),
            "9" => pretty(&StackFigure {
                periodic: scenarios::periodic_signals(),
                bernoulli: scenarios::bernoulli_signals(),
                utilization: 0.5,
                threshold_s: 0.0,
                max_periodic_probability: 0.02,
            }),
            "12" => pretty(&LossFigure {
                periodic: scenarios::periodic_signals(),
                bernoulli: scenarios::bernoulli_signals(),
                probe: scenarios::loss_comparison_probe(),
                t_min_s: 0.1,
                t_max_s: 2.0,
                min_ratio: 1.5,
                lag_tolerance: 0.1,
                tick_s: 1e-3,
            }),
            _ => unreachable!(),
        }
    }

    #[test]
    fn bundled_configs_match_the_reference_scenarios() {
        for id in FIGURES {
            let bundled: Value = serde_json::from_str(bundled(id)).unwrap();
            let expected: Value = serde_json::from_str(&reference(id)).unwrap();
            assert_eq!(bundled, expected, "figure {id}");
        }
    }

    /// Rewrites `configs/figures` from the reference scenarios.
    #[test]
    #[ignore]
    fn regenerate_bundled_configs() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/figures");
        for id in FIGURES {
            std::fs::write(dir.join(format!("{id}.json")), reference(id)).unwrap();
        }
    }
}
