use super::pwl::{min_on, PiecewiseLinear};
use super::{Arrivals, CalculusError, CumulativeProcess, CurveShape, ServiceCurve};

/// Min-plus convolution `D(t) = inf_{s ∈ [0, t]} {A(s) + S(t − s)}` on the
/// arrivals' horizon.
///
/// The arrivals' value at 0 is read as a right limit with `A(0−) = 0`, so an
/// envelope burst `E(0) > 0` is handled like an instantaneous batch.
pub fn convolve<A: Arrivals>(
    arrivals: &A,
    curve: &ServiceCurve,
) -> Result<CumulativeProcess, CalculusError> {
    let a = arrivals.function();
    let horizon = a.last_time();
    let d = convolve_until(a, curve, horizon);
    Ok(CumulativeProcess::from_function(d).expect("convolution of valid inputs is a process"))
}

/// Convolution evaluated on `[0, horizon]`, extrapolating `A` beyond its last
/// breakpoint if needed.
pub(crate) fn convolve_until(a: &PiecewiseLinear, curve: &ServiceCurve, horizon: f64) -> PiecewiseLinear {
    let s = match curve.shape() {
        CurveShape::Identity => {
            let mut out = a.truncated(horizon);
            if a.breakpoints()[0].1 != 0.0 {
                // the identity passes the burst through, but D(0) = S(0) = 0
                let mut pts = out.breakpoints().to_vec();
                pts[0].1 = 0.0;
                out = PiecewiseLinear::from_sorted(pts);
            }
            return out;
        }
        CurveShape::Function(s) => s,
    };
    if horizon <= 0.0 {
        return PiecewiseLinear::from_sorted(vec![(0.0, 0.0)]);
    }

    // s = 0−: A(0−) = 0, giving S(t) itself
    let mut d = s.truncated(horizon);
    // s = t: A(t) + S(0) = A(t)
    d = min_on(&d, a.truncated(horizon).breakpoints(), 0.0, horizon);

    for &(si, ai) in a.breakpoints() {
        if si >= horizon {
            break;
        }
        let g = s.shifted_points(si, ai, horizon);
        d = min_on(&d, &g, si, horizon);
    }
    for &(uj, sj) in s.breakpoints() {
        if uj <= 0.0 {
            continue;
        }
        if uj >= horizon {
            break;
        }
        let g = a.shifted_points(uj, sj, horizon);
        d = min_on(&d, &g, uj, horizon);
    }
    d.simplified()
}
