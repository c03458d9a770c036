use super::{CalculusError, CumulativeProcess, TrafficEnvelope};

#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub envelope: TrafficEnvelope,
    /// Some requested durations exceeded the trace length and were clamped to it.
    pub truncated: bool,
}

/// `E(d) = max_τ A(τ + d) − A(τ)` over all window starts in the trace, for each
/// requested duration.
///
/// The envelope is exact at the requested durations and interpolated linearly
/// between them; `(0, 0)` is added when 0 is not requested.
pub fn empirical_envelope(
    trace: &CumulativeProcess,
    durations: &[f64],
) -> Result<EnvelopeResult, CalculusError> {
    if durations.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(CalculusError::InvalidInput(
            "durations must be finite and non-negative".into(),
        ));
    }
    let horizon = trace.horizon();
    let mut ds: Vec<f64> = durations.to_vec();
    let truncated = ds.iter().any(|&d| d > horizon);
    if truncated {
        log::warn!("envelope durations beyond the trace length {horizon} s are truncated");
    }
    for d in ds.iter_mut() {
        *d = d.min(horizon);
    }
    if !ds.contains(&0.0) {
        ds.push(0.0);
    }
    ds.sort_by(f64::total_cmp);
    ds.dedup();

    let times: Vec<f64> = trace.breakpoints().iter().map(|&(t, _)| t).collect();
    let mut points = Vec::with_capacity(ds.len());
    for &d in &ds {
        points.push((d, max_increment(trace, &times, d)));
    }
    // guard against rounding making the sampled maxima decrease
    for i in 1..points.len() {
        points[i].1 = points[i].1.max(points[i - 1].1);
    }
    Ok(EnvelopeResult {
        envelope: TrafficEnvelope::new(points)?,
        truncated,
    })
}

/// `max_{τ ∈ [0, H − d]} A(τ + d) − A(τ)`. The increment is linear in `τ`
/// between points where `τ` or `τ + d` is a breakpoint.
fn max_increment(trace: &CumulativeProcess, times: &[f64], d: f64) -> f64 {
    let horizon = trace.horizon();
    let last_start = horizon - d;
    let mut best = 0.0f64;
    let mut check = |tau: f64| {
        if (0.0..=last_start).contains(&tau) {
            best = best.max(trace.eval(tau + d) - trace.eval(tau));
        }
    };
    check(0.0);
    check(last_start);
    for &t in times {
        check(t);
        check(t - d);
    }
    best
}
