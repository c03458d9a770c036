use super::pwl::{min_on, PiecewiseLinear};
use super::{CalculusError, ServiceCurve};

/// Service curve of a static window `window` over a path with capacity
/// `capacity` and one-way latency `latency`, on `[0, horizon]`.
///
/// The curve is the minimum over `n ≥ 0` of `[C(t − (2n+1)T)]^+ + n·w`: after
/// each round trip another window's worth of data may be released and it
/// drains at the link capacity. When `w ≥ C·2T` this is `C[t − T]^+`.
pub fn static_window_curve(
    capacity: f64,
    latency: f64,
    window: f64,
    horizon: f64,
) -> Result<ServiceCurve, CalculusError> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(capacity) || !ok(window) || !ok(horizon) || !(latency.is_finite() && latency >= 0.0) {
        return Err(CalculusError::InvalidInput(format!(
            "static window curve needs positive capacity, window, horizon and latency >= 0 \
             (got C={capacity}, T={latency}, w={window}, H={horizon})"
        )));
    }
    let segment = |n: usize| -> Vec<(f64, f64)> {
        let start = (2 * n + 1) as f64 * latency;
        let base = n as f64 * window;
        if start >= horizon {
            vec![(0.0, base), (horizon, base)]
        } else if start > 0.0 {
            vec![(0.0, base), (start, base), (horizon, base + capacity * (horizon - start))]
        } else {
            vec![(0.0, base), (horizon, base + capacity * horizon)]
        }
    };
    let mut curve = PiecewiseLinear::from_sorted(segment(0));
    if latency > 0.0 && window < capacity * 2.0 * latency {
        let mut n = 1;
        // segment n-1 already starts beyond the horizon, so segment n is dominated
        while (2 * n - 1) as f64 * latency < horizon {
            curve = min_on(&curve, &segment(n), 0.0, horizon);
            n += 1;
        }
    }
    ServiceCurve::new(curve.breakpoints().to_vec(), 0.0)
}

/// Long-term rate of a loss-based AIMD flow, `mss · L / (√p · rtt)`.
pub fn mathis_rate(mss: f64, loss_prob: f64, rtt: f64, l: f64) -> Result<f64, CalculusError> {
    if !(loss_prob > 0.0 && loss_prob <= 1.0) {
        return Err(CalculusError::InvalidInput(format!(
            "loss probability must lie in (0, 1], got {loss_prob}"
        )));
    }
    if !(rtt > 0.0 && mss > 0.0 && l > 0.0) {
        return Err(CalculusError::InvalidInput(format!(
            "mss, rtt and L must be positive (got {mss}, {rtt}, {l})"
        )));
    }
    Ok(mss * l / (loss_prob.sqrt() * rtt))
}

/// Sawtooth window model for AIMD with one loss every `1/p` packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicLossModel {
    pub w_max: f64,
    pub w_min: f64,
    pub mean_rate: f64,
    pub min_instantaneous_rate: f64,
}

pub fn periodic_loss_model(loss_prob: f64, rtt: f64, mss: f64) -> Result<PeriodicLossModel, CalculusError> {
    if !(loss_prob > 0.0 && loss_prob <= 1.0) {
        return Err(CalculusError::InvalidInput(format!(
            "loss probability must lie in (0, 1], got {loss_prob}"
        )));
    }
    if !(rtt > 0.0 && mss > 0.0) {
        return Err(CalculusError::InvalidInput(format!(
            "rtt and mss must be positive (got {rtt}, {mss})"
        )));
    }
    let w_max = mss * (8.0 / (3.0 * loss_prob)).sqrt();
    Ok(PeriodicLossModel {
        w_max,
        w_min: w_max / 2.0,
        mean_rate: 3.0 * w_max / (4.0 * rtt),
        min_instantaneous_rate: w_max / (2.0 * rtt),
    })
}

/// `points_per_decade` logarithmically spaced durations in `[t_min, t_max]`.
pub fn log_grid(t_min: f64, t_max: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max >= t_min && points_per_decade > 0);
    let decades = (t_max / t_min).log10();
    let n = (decades * points_per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                t_max
            } else {
                t_min * 10f64.powf(i as f64 / points_per_decade as f64)
            }
        })
        .collect()
}

/// `S(t)/t` on a log grid from 0.1 ms to 100 s.
pub fn attainable_rate(curve: &ServiceCurve) -> Vec<(f64, f64)> {
    attainable_rate_on(curve, &log_grid(1e-4, 100.0, 20))
}

/// `S(t)/t` at the given durations; non-positive durations are skipped.
pub fn attainable_rate_on(curve: &ServiceCurve, durations: &[f64]) -> Vec<(f64, f64)> {
    durations
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| (t, (curve.eval(t) / t).max(0.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MBIT: f64 = 1e6;

    #[test]
    fn large_window_gives_latency_rate() {
        let s = static_window_curve(10.0 * MBIT, 0.05, 2.0 * MBIT, 2.0).unwrap();
        let lr = ServiceCurve::latency_rate(10.0 * MBIT, 0.05).unwrap();
        for &(t, v) in s.function().unwrap().breakpoints() {
            assert!((v - lr.eval(t)).abs() < 1e-6, "t={t}");
        }
        assert_eq!(s.function().unwrap().breakpoints().len(), 3);
    }

    #[test]
    fn small_window_is_stepped() {
        let (c, t, w) = (10.0 * MBIT, 0.05, 0.5 * MBIT);
        let s = static_window_curve(c, t, w, 2.0).unwrap();
        assert_eq!(s.eval(0.05), 0.0);
        // first window drains by T + w/C, then waits for the next round trip
        assert!((s.eval(0.1) - w).abs() < 1e-6);
        assert!((s.eval(0.15) - w).abs() < 1e-6);
        assert!((s.eval(0.2) - 2.0 * w).abs() < 1e-6);
        // long-term rate w/RTT
        assert!((s.eval(1.95) - s.eval(0.95) - 5.0 * MBIT).abs() < 1e-3);
        assert!(static_window_curve(c, t, 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_latency_is_capacity_line() {
        let s = static_window_curve(3.0, 0.0, 1.0, 5.0).unwrap();
        assert_eq!(s.eval(2.0), 6.0);
    }

    #[test]
    fn mathis_examples() {
        let r = mathis_rate(1.0, 1e-3, 0.01, 1.31).unwrap();
        assert!((r - 4142.6).abs() < 0.5, "{r}");
        assert_eq!(mathis_rate(12000.0, 1.0, 1.0, 1.0).unwrap(), 12000.0);
        let half = mathis_rate(1.0, 1e-3, 0.005, 1.31).unwrap();
        assert!((half / r - 2.0).abs() < 1e-12);
        assert!(mathis_rate(1.0, 0.0, 0.01, 1.31).is_err());
        assert!(mathis_rate(1.0, 1.5, 0.01, 1.31).is_err());
    }

    #[test]
    fn periodic_loss_examples() {
        let m = periodic_loss_model(1e-3, 0.01, 1.0).unwrap();
        assert!((m.w_max - 51.64).abs() < 0.01);
        assert!((m.min_instantaneous_rate / m.mean_rate - 2.0 / 3.0).abs() < 1e-12);
        let one = periodic_loss_model(1.0, 0.01, 1.0).unwrap();
        assert!((one.w_max - 1.633).abs() < 1e-3);
    }

    #[test]
    fn attainable_rate_of_latency_rate() {
        let s = ServiceCurve::latency_rate(8.0, 0.5).unwrap();
        let a = attainable_rate_on(&s, &[0.0, 0.5, 1.0, 100.0]);
        assert_eq!(a, vec![(0.5, 0.0), (1.0, 4.0), (100.0, 8.0 * 99.5 / 100.0)]);
        let grid = log_grid(1e-3, 1.0, 10);
        assert_eq!(grid.len(), 31);
        assert_eq!(grid[30], 1.0);
    }
}
