use super::convolution::convolve_until;
use super::pwl::PiecewiseLinear;
use super::{Arrivals, CalculusError, CumulativeProcess, ServiceCurve};

/// Result of a delay or backlog analysis on the arrivals' horizon.
#[derive(Debug, Clone)]
pub struct BoundAnalysis {
    /// `(t, deviation)` on the evaluation grid.
    pub per_time: Vec<(f64, f64)>,
    /// Supremum of the deviation over the horizon.
    pub max: f64,
    arrivals: PiecewiseLinear,
    departures: PiecewiseLinear,
}

impl BoundAnalysis {
    /// Departure lower bound the analysis was computed from.
    pub fn departures(&self) -> &PiecewiseLinear {
        &self.departures
    }

    /// Smallest `τ ≥ 0` with `A(t) ≤ D(t + τ)`.
    pub fn delay_at(&self, t: f64) -> f64 {
        let y = self.arrivals.eval(t);
        match self.departures.inverse_ge(y) {
            Some(u) => (u - t).max(0.0),
            None => f64::INFINITY,
        }
    }
}

/// Arrivals held constant after their last breakpoint.
fn flattened(a: &PiecewiseLinear) -> PiecewiseLinear {
    let mut pts = a.breakpoints().to_vec();
    let (t, v) = pts[pts.len() - 1];
    pts.push((t + 1.0, v));
    PiecewiseLinear::new(pts).expect("appending a later breakpoint keeps times increasing")
}

fn check_rates<A: Arrivals>(arrivals: &A, curve: &ServiceCurve) -> Result<(), CalculusError> {
    let need = arrivals.long_term_rate();
    let have = curve.long_term_rate();
    if have < need * (1.0 - 1e-12) {
        return Err(CalculusError::Unbounded(format!(
            "service curve long-term rate {have} is below the arrival rate {need}"
        )));
    }
    Ok(())
}

/// Horizontal deviation between the arrivals and the departure lower bound
/// obtained from `curve`. The maximum holds with violation probability at most
/// `curve.epsilon()`.
pub fn delay_bound<A: Arrivals>(
    arrivals: &A,
    curve: &ServiceCurve,
) -> Result<BoundAnalysis, CalculusError> {
    check_rates(arrivals, curve)?;
    let a = arrivals.function();
    let h0 = a.last_time();
    let total = a.last_value();
    let extra = if total <= 0.0 {
        0.0
    } else {
        match curve.function() {
            None => 0.0,
            Some(s) => s.inverse_ge(total).ok_or_else(|| {
                CalculusError::Unbounded(format!(
                    "service curve never delivers the {total} bits of the arrivals"
                ))
            })?,
        }
    };
    let a_flat = flattened(a);
    // a little beyond the time at which the curve alone can carry all bits
    let d = convolve_until(&a_flat, curve, h0 + extra * (1.0 + 1e-9) + 1e-9);
    let (per_time, max) = deviation_grid(&a_flat, &d, h0)?;
    Ok(BoundAnalysis {
        per_time,
        max,
        arrivals: a_flat,
        departures: d,
    })
}

/// Vertical deviation `A(t) − D(t)` between the arrivals and the departure
/// lower bound obtained from `curve`.
pub fn backlog_bound<A: Arrivals>(
    arrivals: &A,
    curve: &ServiceCurve,
) -> Result<BoundAnalysis, CalculusError> {
    check_rates(arrivals, curve)?;
    let a = arrivals.function();
    let h0 = a.last_time();
    let d = convolve_until(a, curve, h0);
    let (per_time, max) = vertical_grid(a, &d, h0);
    Ok(BoundAnalysis {
        per_time,
        max,
        arrivals: flattened(a),
        departures: d,
    })
}

/// Horizontal deviation between two processes over `[0, horizon of a]`.
///
/// Per-time values are the smallest `τ` with `A(t) ≤ D(t + τ)`; the maximum
/// also accounts for the right limits at flat parts of `D`.
pub fn horizontal_deviation(
    a: &CumulativeProcess,
    d: &CumulativeProcess,
) -> Result<(Vec<(f64, f64)>, f64), CalculusError> {
    deviation_grid(a.function(), d.function(), a.horizon())
}

/// Vertical deviation between two processes over `[0, horizon of a]`.
pub fn vertical_deviation(a: &CumulativeProcess, d: &CumulativeProcess) -> (Vec<(f64, f64)>, f64) {
    vertical_grid(a.function(), d.function(), a.horizon())
}

fn deviation_grid(
    a: &PiecewiseLinear,
    d: &PiecewiseLinear,
    h0: f64,
) -> Result<(Vec<(f64, f64)>, f64), CalculusError> {
    let mut grid: Vec<f64> = a
        .breakpoints()
        .iter()
        .map(|&(t, _)| t)
        .filter(|&t| t <= h0)
        .collect();
    if grid.last().is_none_or(|&t| t < h0) {
        grid.push(h0);
    }
    let a_max = a.eval(h0);
    for &(_, y) in d.breakpoints() {
        if y > a_max {
            break;
        }
        for t in [a.inverse_ge(y), a.inverse_gt(y)].into_iter().flatten() {
            if t <= h0 {
                grid.push(t);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut per_time = Vec::with_capacity(grid.len());
    let mut max = 0.0f64;
    for (i, &t) in grid.iter().enumerate() {
        let y = a.eval(t);
        let u = d.inverse_ge(y).ok_or_else(|| {
            CalculusError::Unbounded(format!("departures never reach {y} bits"))
        })?;
        let delay = (u - t).max(0.0);
        max = max.max(delay);
        if t < h0 && a.right_slope(t) > 0.0 {
            // bits arriving just after t wait until D leaves its plateau at y
            // never later than the departure of the next grid point's bits,
            // which keeps rounding noise in a nearly flat D from leaking in
            let next = grid.get(i + 1).and_then(|&tn| d.inverse_ge(a.eval(tn)));
            let u2 = match (d.inverse_gt(y), next) {
                (Some(u2), Some(n)) => Some(u2.min(n)),
                (u2, None) => u2,
                (None, n) => n,
            };
            if let Some(u2) = u2 {
                max = max.max((u2 - t).max(0.0));
            }
        }
        per_time.push((t, delay));
    }
    Ok((per_time, max))
}

fn vertical_grid(a: &PiecewiseLinear, d: &PiecewiseLinear, h0: f64) -> (Vec<(f64, f64)>, f64) {
    let mut grid: Vec<f64> = a
        .breakpoints()
        .iter()
        .chain(d.breakpoints())
        .map(|&(t, _)| t)
        .filter(|&t| t <= h0)
        .collect();
    grid.push(h0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut max = 0.0f64;
    let per_time = grid
        .iter()
        .map(|&t| {
            let b = (a.eval(t) - d.eval(t)).max(0.0);
            max = max.max(b);
            (t, b)
        })
        .collect();
    (per_time, max)
}
