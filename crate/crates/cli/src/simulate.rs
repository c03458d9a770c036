use std::path::Path;

use flowbench_core::sim::{decompose_delays, run_scenario, DelayComponents, ScenarioSpec, SimOutput};
use serde::Serialize;

use crate::error::Result;
use crate::io::{base_dir, load_json, num, OutDir};

const CCDF_POINTS: usize = 1000;

/// Reads a scenario file, resolving trace files and applying the seed override.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<ScenarioSpec> {
    let mut spec: ScenarioSpec = load_json(path)?;
    prepare(&mut spec, &base_dir(path), seed)?;
    Ok(spec)
}

pub fn prepare(spec: &mut ScenarioSpec, base: &Path, seed: Option<u64>) -> Result<()> {
    spec.resolve_files(base)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    packets: usize,
    steady_state_packets: usize,
    delivered_rate_bps: f64,
    dropped: u64,
    marked: u64,
    warmup_s: f64,
    duration_s: f64,
}

/// `P(X > d)` for each component on a uniform grid up to the largest delay.
fn ccdf_rows(comps: &[DelayComponents]) -> Vec<[String; 5]> {
    let pick: [fn(&DelayComponents) -> f64; 4] = [|c| c.snd, |c| c.net, |c| c.rcv, |c| c.e2e];
    let sorted: Vec<Vec<f64>> = pick
        .iter()
        .map(|f| {
            let mut v: Vec<f64> = comps.iter().map(f).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let n = comps.len() as f64;
    let max = sorted.iter().filter_map(|v| v.last()).fold(0.0f64, |a, &b| a.max(b));
    (0..=CCDF_POINTS)
        .map(|k| {
            let d = max * k as f64 / CCDF_POINTS as f64;
            let p = |v: &Vec<f64>| (n - v.partition_point(|&x| x <= d) as f64) / n;
            [num(d), num(p(&sorted[0])), num(p(&sorted[1])), num(p(&sorted[2])), num(p(&sorted[3]))]
        })
        .collect()
}

pub fn write_delay_files(out: &OutDir, sim: &SimOutput) -> Result<()> {
    let comps = decompose_delays(sim);
    out.write_csv(
        "delay_components.csv",
        &["id", "d_snd", "d_net", "d_rcv", "d_e2e"],
        comps
            .iter()
            .map(|c| [c.id.to_string(), num(c.snd), num(c.net), num(c.rcv), num(c.e2e)]),
    )?;
    write_ccdf(out, "ccdf.csv", sim)
}

/// Empirical CCDF of the delay components of post-warmup packets.
pub fn write_ccdf(out: &OutDir, name: &str, sim: &SimOutput) -> Result<()> {
    let steady: Vec<DelayComponents> = decompose_delays(sim)
        .into_iter()
        .zip(&sim.packets)
        .filter(|(_, p)| p.t1 >= sim.warmup)
        .map(|(c, _)| c)
        .collect();
    if steady.is_empty() {
        return Ok(());
    }
    out.write_csv(
        name,
        &["delay_s", "p_snd", "p_net", "p_rcv", "p_e2e"],
        ccdf_rows(&steady),
    )
}

pub fn run(config: &Path, out: &OutDir, seed: Option<u64>) -> Result<()> {
    let spec = load_scenario(config, seed)?;
    let sim = run_scenario(&spec)?;
    out.write_with("packets.csv", |w| Ok(sim.write_packets_csv(w)?))?;
    out.write_with("cwnd.csv", |w| Ok(sim.write_cwnd_csv(w)?))?;
    write_delay_files(out, &sim)?;
    out.write_json(
        "summary.json",
        &Summary {
            packets: sim.packets.len(),
            steady_state_packets: sim.steady_state().count(),
            delivered_rate_bps: sim.delivered_rate(),
            dropped: sim.dropped_count,
            marked: sim.marked_count,
            warmup_s: sim.warmup,
            duration_s: sim.duration,
        },
    )
}
