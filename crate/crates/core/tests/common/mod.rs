//! Shared oracles and checkers for the integration tests.
#![allow(dead_code)]

use flowbench_core::calculus::{
    backlog_bound, convolve, delay_bound, CumulativeProcess, PiecewiseLinear, ServiceCurve,
};
use rand::Rng;
use flowbench_core::sim::{
    CongestionSignalSpec, DeliveryMode, NetworkPathSpec, ScenarioSpec, SignalProcess, SimOutput,
    SourceSpec, WindowControllerSpec,
};

/// `inf_{s ∈ [0, t]} A(s) + S(t − s)` by exhaustive search over grid points
/// `0, h, 2h, …, t`, with the `A(0−) = 0` candidate `S(t)`.
pub fn brute_convolution(a: &PiecewiseLinear, s: &PiecewiseLinear, grid: &[f64]) -> Vec<f64> {
    let av: Vec<f64> = grid.iter().map(|&t| a.eval(t)).collect();
    let sv: Vec<f64> = grid.iter().map(|&t| s.eval(t)).collect();
    (0..grid.len())
        .map(|i| {
            let mut best = sv[i];
            for j in 0..=i {
                best = best.min(av[j] + sv[i - j]);
            }
            best
        })
        .collect()
}

/// Largest horizontal distance `min{k ≥ 0 : d[i + k] ≥ a[i]}` on a uniform grid.
pub fn brute_delay(a: &[f64], d: &[f64], h: f64) -> f64 {
    let mut best = 0usize;
    let mut k = 0usize;
    for (i, &ai) in a.iter().enumerate() {
        // the earliest catch-up index is non-decreasing in i
        k = k.max(i);
        while k < d.len() && d[k] < ai - 1e-9 * ai.abs().max(1.0) {
            k += 1;
        }
        if k == d.len() {
            return f64::INFINITY;
        }
        best = best.max(k - i);
    }
    best as f64 * h
}

pub fn brute_backlog(a: &[f64], d: &[f64]) -> f64 {
    a.iter().zip(d).map(|(x, y)| x - y).fold(0.0, f64::max)
}

/// Breakpoints on the lattice `k·h`: each step advances `dk ≥ 1` cells and
/// adds `dv ≥ 0`.
pub fn lattice_points(steps: &[(u32, f64)], h: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    let (mut k, mut v) = (0u32, 0.0);
    for &(dk, dv) in steps {
        k += dk;
        v += dv;
        pts.push((k as f64 * h, v));
    }
    pts
}

/// Random lattice arrivals and a service curve fast enough to carry them, each
/// with at most `max_points` breakpoints.
pub fn random_pair<R: Rng>(rng: &mut R, max_points: usize, h: f64) -> (CumulativeProcess, ServiceCurve) {
    let steps = |n: usize, rng: &mut R| -> Vec<(u32, f64)> {
        (0..n)
            .map(|_| {
                let dk = rng.random_range(1..=4u32);
                // flat pieces and bursts-like steep pieces both occur
                let dv = match rng.random_range(0..4) {
                    0 => 0.0,
                    1 => rng.random_range(0.0..50.0),
                    _ => rng.random_range(0.0..5.0) * dk as f64,
                };
                (dk, dv)
            })
            .collect()
    };
    let na = rng.random_range(1..max_points);
    let a = CumulativeProcess::new(lattice_points(&steps(na, rng), h)).unwrap();
    let ns = rng.random_range(1..max_points - 1);
    let mut sp = lattice_points(&steps(ns, rng), h);
    // final slope at least twice the arrivals' mean rate
    let (t, v) = *sp.last().unwrap();
    let slope = (2.0 * a.mean_rate()).max(1.0) * rng.random_range(1.0..3.0);
    sp.push((t + h, v + slope * h));
    let s = ServiceCurve::new(sp, 0.0).unwrap();
    (a, s)
}

fn grid(end: f64, h: f64) -> Vec<f64> {
    let n = (end / h * (1.0 - 1e-12)).ceil() as usize;
    (0..=n).map(|k| k as f64 * h).collect()
}

/// Compares convolution, delay bound and backlog bound with the dense-grid
/// brute force; returns a description of every disagreement beyond one grid
/// cell.
pub fn oracle_mismatches(a: &CumulativeProcess, s: &ServiceCurve, h: f64) -> Vec<String> {
    let mut out = Vec::new();
    let af = a.function();
    let sf = s.function().unwrap();
    let horizon = a.horizon();
    let scale = af.last_value().max(1.0);
    let cell = af.max_slope().max(sf.max_slope()) * h;

    let g = grid(horizon, h);
    let d = convolve(a, s).unwrap();
    let brute = brute_convolution(af, sf, &g);
    for (t, b) in g.iter().zip(&brute) {
        let e = d.eval(*t);
        if (e - b).abs() > 1e-9 * scale {
            out.push(format!("convolution at t={t}: exact {e}, brute {b}"));
            break;
        }
    }

    // backlog: the supremum sits on the lattice
    let backlog = backlog_bound(a, s).unwrap().max;
    let av: Vec<f64> = g.iter().map(|&t| af.eval(t)).collect();
    let bb = brute_backlog(&av, &brute);
    if (backlog - bb).abs() > cell + 1e-9 * scale {
        out.push(format!("backlog: exact {backlog}, brute {bb}"));
    }

    // delay: arrivals held flat after the horizon, departures on a longer grid
    let total = af.last_value();
    let extra = sf.inverse_ge(total).unwrap();
    let mut flat = af.breakpoints().to_vec();
    flat.push((horizon + h, total));
    let af_flat = PiecewiseLinear::new(flat).unwrap();
    let long = grid(horizon + extra + 2.0 * h, h);
    let d_long = brute_convolution(&af_flat, sf, &long);
    let delay = delay_bound(a, s).unwrap().max;
    let av_flat: Vec<f64> = g.iter().map(|&t| af_flat.eval(t)).collect();
    let bd = brute_delay(&av_flat, &d_long, h);
    if (delay - bd).abs() > h + 1e-9 {
        out.push(format!("delay: exact {delay}, brute {bd}"));
    }
    out
}

/// Returns a description of every simulator invariant violated by `out`.
pub fn invariant_violations(spec: &ScenarioSpec, out: &SimOutput) -> Vec<String> {
    let mut v = Vec::new();
    let mss = spec.mss_bits;
    let tol = 1e-9;

    for (i, p) in out.packets.iter().enumerate() {
        if p.id != i as u64 {
            v.push(format!("delivery order: position {i} holds id {}", p.id));
            break;
        }
        if !(p.t1 <= p.t2 + tol && p.t2 <= p.t3 + tol && p.t3 <= p.t4 + tol) {
            v.push(format!("causality broken for packet {}: {p:?}", p.id));
        }
    }
    for w in out.packets.windows(2) {
        if w[1].t4 < w[0].t4 {
            v.push(format!("t4 decreases at id {}", w[1].id));
        }
    }

    // FIFO network for packets that crossed on their first attempt
    let mut first_pass: Vec<(f64, f64)> = out
        .packets
        .iter()
        .filter(|p| p.retransmissions == 0)
        .map(|p| (p.t2, p.t3))
        .collect();
    first_pass.sort_by(|a, b| a.0.total_cmp(&b.0));
    if first_pass.windows(2).any(|w| w[1].1 < w[0].1 - tol) {
        v.push("network reordered packets".into());
    }

    // delivered and created counts at admission instants
    let mut t4s: Vec<f64> = out.packets.iter().map(|p| p.t4).collect();
    t4s.sort_by(f64::total_cmp);
    let delivered_by = |t: f64| t4s.partition_point(|&x| x <= t) as f64 * mss;
    let mut t1s: Vec<f64> = out.packets.iter().map(|p| p.t1).collect();
    t1s.sort_by(f64::total_cmp);
    let created_by = |t: f64| t1s.partition_point(|&x| x <= t + tol) as f64 * mss;
    for a in &out.admissions {
        if a.admitted_bits > a.acked_bits + a.window_bits + mss + tol {
            v.push(format!("flow control exceeded at t={}: {a:?}", a.t));
        }
        if spec.signal.delivery_mode == DeliveryMode::Mark && spec.path.buffer_pkts.is_none() {
            let d_app = delivered_by((a.t - spec.path.rev_delay_s).max(0.0) + tol);
            if a.admitted_bits > d_app + a.window_bits + mss + tol {
                v.push(format!("A_net > D_app(t-T) + W + MSS at t={}", a.t));
            }
        }
        if a.admitted_bits > created_by(a.t) + tol || a.admitted_bits > a.created_bits + tol {
            v.push(format!("admitted more than created at t={}", a.t));
        }
        if delivered_by(a.t) > a.admitted_bits + tol {
            v.push(format!("delivered more than admitted at t={}", a.t));
        }
    }

    if let Some(b) = spec.path.buffer_pkts {
        if let Some(&(t, q)) = out.queue_series.iter().find(|&&(_, q)| q > b) {
            v.push(format!("queue occupancy {q} above buffer {b} at t={t}"));
        }
    }
    if out.queue_series.windows(2).any(|w| w[1].0 < w[0].0) || out.cwnd_series.windows(2).any(|w| w[1].0 < w[0].0) {
        v.push("series times decrease".into());
    }
    let retx: u64 = out.packets.iter().map(|p| u64::from(p.retransmissions)).sum();
    if retx != out.dropped_count {
        v.push(format!("{retx} retransmissions but {} drops", out.dropped_count));
    }
    let signaled = out.packets.iter().filter(|p| p.signaled).count() as u64;
    // without drops every packet is sent once, so marks and flags match one to one
    if out.dropped_count == 0 && out.marked_count != signaled {
        v.push(format!("{} marks but {signaled} signalled packets", out.marked_count));
    }
    v
}

/// Short scenario with random source, controller, path and signal process.
pub fn random_scenario<R: Rng>(rng: &mut R) -> ScenarioSpec {
    let mss = [1_000.0, 10_000.0, 12_000.0][rng.random_range(0..3)];
    let capacity = rng.random_bool(0.7).then(|| rng.random_range(1e6..20e6));
    let buffer_pkts = match capacity {
        Some(_) if rng.random_bool(0.5) => Some(rng.random_range(2..60u64)),
        _ => None,
    };
    let fwd = rng.random_range(0.001..0.05) + capacity.map_or(0.0, |c| mss / c);
    let source = match rng.random_range(0..3) {
        0 => SourceSpec::Greedy,
        1 => SourceSpec::ConstantRate {
            rate_bps: rng.random_range(0.2..1.5) * capacity.unwrap_or(5e6),
        },
        _ => {
            // a few on-off bursts
            let mut pts = vec![(0.0, 0.0)];
            let (mut t, mut v) = (0.0, 0.0);
            for _ in 0..rng.random_range(1..8) {
                t += rng.random_range(0.05..0.5);
                v += rng.random_range(0.0..2e6);
                pts.push((t, v));
            }
            SourceSpec::Trace { breakpoints: pts }
        }
    };
    let controller = match rng.random_range(0..3) {
        0 => WindowControllerSpec::Static {
            window_bits: mss * rng.random_range(1..80) as f64,
        },
        1 => WindowControllerSpec::newreno_like(mss),
        _ => WindowControllerSpec::scalable_like(mss),
    };
    let process = match rng.random_range(0..4) {
        0 => SignalProcess::None,
        1 => SignalProcess::Bernoulli {
            p: rng.random_range(1e-4..2e-2),
        },
        2 => SignalProcess::Periodic {
            every_n_packets: rng.random_range(20..2000),
        },
        _ if buffer_pkts.is_some() => SignalProcess::BufferOverflow,
        _ => SignalProcess::None,
    };
    let delivery_mode = if rng.random_bool(0.5) {
        DeliveryMode::Mark
    } else {
        DeliveryMode::DropWithRetransmit
    };
    ScenarioSpec {
        source,
        controller,
        path: NetworkPathSpec {
            capacity_bps: capacity,
            fwd_delay_s: fwd,
            rev_delay_s: rng.random_range(0.001..0.05),
            buffer_pkts,
        },
        signal: CongestionSignalSpec {
            process,
            delivery_mode,
        },
        mss_bits: mss,
        duration_s: rng.random_range(0.5..4.0),
        warmup_s: None,
        seed: rng.random(),
    }
}
