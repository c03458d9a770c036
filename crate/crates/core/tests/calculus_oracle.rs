mod common;

use common::{lattice_points, oracle_mismatches, random_pair};
use flowbench_core::calculus::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = 0.01;

fn steps(max: usize) -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::vec((1u32..4, prop_oneof![Just(0.0), 0.0..40.0f64]), 1..max)
}

fn pair(a_steps: &[(u32, f64)], s_steps: &[(u32, f64)], tail: f64) -> (CumulativeProcess, ServiceCurve) {
    let a = CumulativeProcess::new(lattice_points(a_steps, H)).unwrap();
    let mut sp = lattice_points(s_steps, H);
    let (t, v) = *sp.last().unwrap();
    let slope = (2.0 * a.mean_rate()).max(1.0) * tail;
    sp.push((t + H, v + slope * H));
    (a, ServiceCurve::new(sp, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_match_dense_grid_brute_force(a in steps(60), s in steps(60), tail in 1.0..3.0f64) {
        let (a, s) = pair(&a, &s, tail);
        let bad = oracle_mismatches(&a, &s, H);
        prop_assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn departures_never_exceed_arrivals_or_service(a in steps(60), s in steps(60), tail in 1.0..3.0f64) {
        let (a, s) = pair(&a, &s, tail);
        let d = convolve(&a, &s).unwrap();
        for k in 0..=(a.horizon() / H) as usize {
            let t = k as f64 * H;
            let tol = 1e-9 * a.function().last_value().max(1.0);
            prop_assert!(d.eval(t) <= a.eval(t) + tol);
            prop_assert!(d.eval(t) <= s.eval(t) + tol);
        }
        prop_assert!(d.function().is_non_decreasing());
    }

    #[test]
    fn faster_service_never_increases_bounds(a in steps(40), s in steps(40), tail in 1.0..3.0f64) {
        let (a, s) = pair(&a, &s, tail);
        let f = s.function().unwrap();
        let doubled: Vec<(f64, f64)> = f.breakpoints().iter().map(|&(t, v)| (t, 2.0 * v)).collect();
        let fast = ServiceCurve::new(doubled, 0.0).unwrap();
        let tol = 1e-9 * a.function().last_value().max(1.0);
        prop_assert!(delay_bound(&a, &fast).unwrap().max <= delay_bound(&a, &s).unwrap().max + 1e-9);
        prop_assert!(backlog_bound(&a, &fast).unwrap().max <= backlog_bound(&a, &s).unwrap().max + tol);
    }

    #[test]
    fn latency_rate_delay_of_token_bucket(burst in 0.0..1e4f64, rho in 1.0..1e3f64, extra in 1.0..5.0f64, lat in 0.0..0.5f64) {
        // envelope b + ρt through R[t − T]^+ with R ≥ ρ: delay T + b/R, backlog b + ρT
        let r = rho * extra;
        let env = TrafficEnvelope::token_bucket(burst, rho).unwrap();
        let s = ServiceCurve::latency_rate(r, lat).unwrap();
        let d = delay_bound(&env, &s).unwrap().max;
        let q = backlog_bound(&env, &s).unwrap().max;
        prop_assert!((d - (lat + burst / r)).abs() < 1e-9 * (1.0 + d), "{d}");
        prop_assert!((q - (burst + rho * lat)).abs() < 1e-9 * (1.0 + q), "{q}");
    }
}

#[test]
fn random_pairs_with_many_breakpoints_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..10 {
        let (a, s) = random_pair(&mut rng, 500, H);
        let bad = oracle_mismatches(&a, &s, H);
        assert!(bad.is_empty(), "pair {i}: {bad:?}");
    }
}

#[test]
fn static_window_curve_bounds_its_estimate_shape() {
    // w ≥ C·RTT: the stepped curve collapses to the latency-rate curve
    let s = static_window_curve(10e6, 0.05, 2e6, 10.0).unwrap();
    for t in [0.0, 0.04, 0.05, 0.1, 1.0, 5.0] {
        assert!((s.eval(t) - 10e6 * (t - 0.05f64).max(0.0)).abs() < 1e-6, "{t}");
    }
}
