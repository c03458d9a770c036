use flowbench_core::calculus::*;
use flowbench_core::estimator::*;
use flowbench_core::scenarios::*;
use flowbench_core::stats::SampleSeries;
use proptest::prelude::*;

#[test]
fn unloaded_static_window_probe_sees_the_path_latency() {
    let rec = probe_rate(&static_window(2e6), 5e6, &static_window_probe(), 5).unwrap();
    assert!(rec.usable());
    assert_eq!(rec.extensions_used, 0);
    assert!((rec.delay_quantile_s.unwrap() - STATIC_LATENCY_S).abs() < 1e-9);
    assert_eq!(rec.backlog_quantile_bits, Some(rec.rate_bps * rec.delay_quantile_s.unwrap()));
    assert_eq!(rec.samples.len(), static_window_probe().samples);
}

#[test]
fn rate_above_the_window_limit_is_not_stationary() {
    // w/RTT = 5 Mbit/s, so 6 Mbit/s piles up in the sender
    let rec = probe_rate(&static_window(500e3), 6e6, &static_window_probe(), 6).unwrap();
    assert!(!rec.usable());
    assert_eq!(rec.delay_quantile_s, None);
}

#[test]
fn failing_first_rate_leaves_nothing_to_assemble() {
    let cfg = ProbeConfig::new(6e6, 1e-4, STATIC_PACKET_BITS);
    let err = sweep(&static_window(500e3), &cfg, 1).unwrap_err();
    assert!(matches!(err, EstimatorError::EmptyUsableSet(_)), "{err}");
}

#[test]
fn sweep_is_reproducible_and_independent_of_jobs() {
    let cfg = adaptive_probe(800.0, 1e-4);
    let a = sweep(&adaptive_marking(), &cfg, 1).unwrap();
    let b = sweep(&adaptive_marking(), &cfg, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.terminated);
    assert!(!a.records.last().unwrap().usable());
    assert!(a.records[..a.records.len() - 1].iter().all(|r| r.usable()));
}

#[test]
fn max_rates_stops_an_unfinished_sweep() {
    let mut cfg = static_window_probe();
    cfg.max_rates = 3;
    let out = sweep(&static_window(2e6), &cfg, 2).unwrap();
    assert!(!out.terminated);
    assert_eq!(out.records.len(), 3);
}

#[test]
fn deterministic_static_window_bound_equals_measured_delay() {
    let template = static_window(2e6);
    let (s, _) = {
        let cfg = static_window_probe();
        let out = sweep(&template, &cfg, 1).unwrap();
        (assemble_estimate(&out.records, cfg.xi).unwrap(), out)
    };
    let trace = CumulativeProcess::constant_rate(5e6, 1.0).unwrap();
    let cfg = ValidationConfig {
        repetitions: 3,
        epsilon_target: 0.01,
        lead_in_s: Some(0.2),
        seed: 1,
    };
    let report = validate_delay_bounds(&s, &trace, &template, &cfg, 1).unwrap();
    assert_eq!(report.violation_fraction, 0.0);
    let packet_time = STATIC_PACKET_BITS / STATIC_CAPACITY_BPS;
    for p in &report.packets {
        assert!((p.analytic_bound_s - p.empirical_q_s).abs() <= packet_time, "{p:?}");
    }
}

fn record(rate: f64, delay: f64) -> RateProbeRecord {
    RateProbeRecord {
        rate_bps: rate,
        samples: SampleSeries::new(vec![delay]).unwrap(),
        extensions_used: 0,
        stationary: true,
        independent: true,
        ers: None,
        runs: None,
        delay_quantile_s: Some(delay),
        backlog_quantile_bits: Some(rate * delay),
    }
}

fn records() -> impl Strategy<Value = Vec<RateProbeRecord>> {
    prop::collection::vec(0.0..0.5f64, 1..30).prop_map(|delays| {
        delays
            .iter()
            .enumerate()
            .map(|(j, &d)| record((j + 1) as f64 * 1e5, d))
            .collect()
    })
}

proptest! {
    #[test]
    fn estimate_is_the_clamped_maximum_of_its_lines(recs in records(), t in 0.0..5.0f64) {
        let s = assemble_estimate(&recs, 1e-4).unwrap();
        let brute = recs
            .iter()
            .map(|r| r.rate_bps * t - r.backlog_quantile_bits.unwrap())
            .fold(0.0, f64::max);
        prop_assert!((s.eval(t) - brute).abs() <= 1e-6 * brute.max(1.0));
    }

    #[test]
    fn estimate_is_convex_and_non_decreasing(recs in records()) {
        let s = assemble_estimate(&recs, 1e-4).unwrap();
        let pts = s.function().unwrap().breakpoints();
        let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        prop_assert!(slopes.iter().all(|&k| k >= -1e-9));
        prop_assert!(slopes.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9) - 1e-9));
        let top = recs.last().unwrap().rate_bps;
        prop_assert!((s.long_term_rate() / top - 1.0).abs() < 1e-12);
        prop_assert!((s.epsilon() - recs.len() as f64 * 1e-4).abs() < 1e-15);
    }

    #[test]
    fn more_rates_never_lower_the_estimate(recs in records(), extra in 0.0..0.5f64, t in 0.0..5.0f64) {
        let s = assemble_estimate(&recs, 1e-4).unwrap();
        let mut more = recs.clone();
        more.push(record((recs.len() + 1) as f64 * 1e5, extra));
        let s2 = assemble_estimate(&more, 1e-4).unwrap();
        prop_assert!(s2.eval(t) >= s.eval(t) - 1e-6);
    }
}
