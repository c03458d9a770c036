//! Continuous piecewise-linear functions on `[0, ∞)`.

use serde::{Deserialize, Serialize};

use super::CalculusError;

/// Relative tolerance used when comparing function values and breakpoint times.
pub(crate) const REL_TOL: f64 = 1e-12;

/// A continuous piecewise-linear function given by its breakpoints.
///
/// Between breakpoints the function is interpolated linearly; beyond the last
/// breakpoint it continues with the slope of the final segment. A single
/// breakpoint describes a constant function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = CalculusError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(f: PiecewiseLinear) -> Self {
        f.points
    }
}

impl PiecewiseLinear {
    /// Builds a function from breakpoints with strictly increasing, finite times
    /// starting at zero.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CalculusError> {
        let Some(&(t0, _)) = points.first() else {
            return Err(CalculusError::InvalidInput("empty breakpoint list".into()));
        };
        if t0 != 0.0 {
            return Err(CalculusError::InvalidInput(format!(
                "first breakpoint must be at time 0, got {t0}"
            )));
        }
        for (i, &(t, v)) in points.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(CalculusError::InvalidInput(format!(
                    "non-finite breakpoint ({t}, {v}) at index {i}"
                )));
            }
            if i > 0 && t <= points[i - 1].0 {
                return Err(CalculusError::InvalidInput(format!(
                    "breakpoint times must be strictly increasing (index {i}: {t} after {})",
                    points[i - 1].0
                )));
            }
        }
        Ok(Self { points })
    }

    /// Builds without validation; callers guarantee the invariants.
    pub(crate) fn from_sorted(points: Vec<(f64, f64)>) -> Self {
        debug_assert!(!points.is_empty());
        debug_assert!(points.windows(2).all(|w| w[0].0 < w[1].0), "{points:?}");
        Self { points }
    }

    /// The line `slope · t + offset` restricted to `t ≥ 0`.
    pub fn affine(slope: f64, offset: f64) -> Self {
        Self::from_sorted(vec![(0.0, offset), (1.0, offset + slope)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn last_time(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn last_value(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    /// Slope used for extrapolation beyond the last breakpoint.
    pub fn final_slope(&self) -> f64 {
        match self.points.len() {
            1 => 0.0,
            n => segment_slope(self.points[n - 2], self.points[n - 1]),
        }
    }

    /// Largest slope over all segments, including the extrapolated tail.
    pub fn max_slope(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| segment_slope(w[0], w[1]))
            .fold(0.0, f64::max)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// Index of the segment containing `t`: the largest `i` with `points[i].0 <= t`,
    /// clamped so that `i + 1` is valid whenever there are two or more points.
    fn segment_index(&self, t: f64) -> usize {
        let n = self.points.len();
        if n == 1 {
            return 0;
        }
        let i = self.points.partition_point(|&(pt, _)| pt <= t);
        i.saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.points.len() == 1 {
            return self.points[0].1;
        }
        let i = self.segment_index(t);
        interpolate(self.points[i], self.points[i + 1], t)
    }

    /// Slope of the segment immediately to the right of `t`.
    pub fn right_slope(&self, t: f64) -> f64 {
        if self.points.len() == 1 {
            return 0.0;
        }
        let i = self.segment_index(t);
        segment_slope(self.points[i], self.points[i + 1])
    }

    /// `inf { u ≥ 0 : f(u) ≥ y }` for a non-decreasing function, `None` if `y`
    /// is never reached.
    pub fn inverse_ge(&self, y: f64) -> Option<f64> {
        self.inverse_by(y, false)
    }

    /// `inf { u ≥ 0 : f(u) > y }` for a non-decreasing function, `None` if the
    /// function never exceeds `y`.
    pub fn inverse_gt(&self, y: f64) -> Option<f64> {
        self.inverse_by(y, true)
    }

    fn inverse_by(&self, y: f64, strict: bool) -> Option<f64> {
        let tol = value_tol(y);
        let reached = |v: f64| if strict { v > y + tol } else { v >= y - tol };
        let pts = &self.points;
        let i = pts.partition_point(|&(_, v)| !reached(v));
        if i == 0 {
            return Some(0.0);
        }
        if i < pts.len() {
            let (a, b) = (pts[i - 1], pts[i]);
            // crossing lies inside segment (a, b)
            let slope = segment_slope(a, b);
            if strict && slope <= 0.0 {
                return Some(b.0);
            }
            let u = a.0 + (y - a.1) / slope;
            return Some(u.clamp(a.0, b.0));
        }
        let slope = self.final_slope();
        if slope <= 0.0 {
            return None;
        }
        let (t, v) = pts[pts.len() - 1];
        Some(t + ((y - v) / slope).max(0.0))
    }

    /// Restricts the function to `[0, horizon]`, adding a breakpoint at the
    /// horizon so that the final segment is preserved.
    pub fn truncated(&self, horizon: f64) -> Self {
        let mut out: Vec<(f64, f64)> = self
            .points
            .iter()
            .copied()
            .take_while(|&(t, _)| t < horizon)
            .collect();
        if out.is_empty() {
            out.push((0.0, self.points[0].1));
        }
        if horizon > out[out.len() - 1].0 {
            out.push((horizon, self.eval(horizon)));
        }
        Self::from_sorted(out)
    }

    /// Returns `t ↦ f(t - shift) + offset` on `[shift, horizon]`, as breakpoint list.
    pub(crate) fn shifted_points(&self, shift: f64, offset: f64, horizon: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.points.len() + 1);
        for &(t, v) in &self.points {
            let ts = t + shift;
            if ts >= horizon {
                break;
            }
            match out.last_mut() {
                // distinct times can round to the same shifted time
                Some(last) if last.0 >= ts => last.1 = v + offset,
                _ => out.push((ts, v + offset)),
            }
        }
        if out.last().is_none_or(|&(t, _)| t < horizon) {
            out.push((horizon, self.eval(horizon - shift) + offset));
        }
        out
    }

    /// Removes interior breakpoints that lie on the line through their neighbours.
    pub fn simplified(mut self) -> Self {
        simplify(&mut self.points);
        self
    }
}

pub(crate) fn segment_slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

pub(crate) fn interpolate(a: (f64, f64), b: (f64, f64), t: f64) -> f64 {
    if t == a.0 {
        return a.1;
    }
    if t == b.0 {
        return b.1;
    }
    a.1 + (t - a.0) * segment_slope(a, b)
}

pub(crate) fn value_tol(scale: f64) -> f64 {
    REL_TOL * scale.abs().max(1.0)
}

pub(crate) fn simplify(points: &mut Vec<(f64, f64)>) {
    if points.len() < 3 {
        return;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points.iter() {
        while out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let predicted = interpolate(a, p, b.0);
            if (predicted - b.1).abs() <= value_tol(b.1) * 16.0 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    *points = out;
}

/// Walks a breakpoint list monotonically, evaluating at non-decreasing times in
/// amortised constant time.
pub(crate) struct Cursor<'a> {
    pts: &'a [(f64, f64)],
    i: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(pts: &'a [(f64, f64)]) -> Self {
        Self { pts, i: 0 }
    }

    pub(crate) fn eval(&mut self, t: f64) -> f64 {
        let n = self.pts.len();
        if n == 1 {
            return self.pts[0].1;
        }
        while self.i + 2 < n && self.pts[self.i + 1].0 <= t {
            self.i += 1;
        }
        interpolate(self.pts[self.i], self.pts[self.i + 1], t)
    }
}

/// Pointwise minimum of `f` and `g` on `[from, to]`, keeping `f` on `[0, from)`.
///
/// `g` is given as breakpoints covering `[from, to]` (its first breakpoint must
/// be at `from`). Crossing points between the two functions become breakpoints
/// of the result, so the minimum is exact.
pub(crate) fn min_on(f: &PiecewiseLinear, g: &[(f64, f64)], from: f64, to: f64) -> PiecewiseLinear {
    debug_assert!(g.first().is_some_and(|&(t, _)| t == from));
    let fp = &f.points;
    let mut out: Vec<(f64, f64)> = fp.iter().copied().take_while(|&(t, _)| t < from).collect();

    // merged grid of breakpoint times in [from, to]
    let mut grid: Vec<f64> = Vec::with_capacity(fp.len() + g.len() + 2);
    grid.push(from);
    let (mut i, mut j) = (fp.partition_point(|&(t, _)| t <= from), 1usize);
    loop {
        let tf = fp.get(i).map(|p| p.0).filter(|&t| t < to);
        let tg = g.get(j).map(|p| p.0).filter(|&t| t < to);
        let next = match (tf, tg) {
            (None, None) => break,
            (Some(a), None) => {
                i += 1;
                a
            }
            (None, Some(b)) => {
                j += 1;
                b
            }
            (Some(a), Some(b)) => {
                if a <= b {
                    i += 1;
                    if a == b {
                        j += 1;
                    }
                    a
                } else {
                    j += 1;
                    b
                }
            }
        };
        if next > grid[grid.len() - 1] {
            grid.push(next);
        }
    }
    if to > grid[grid.len() - 1] {
        grid.push(to);
    }

    let mut cf = Cursor::new(fp);
    // f restricted so that the cursor starts at the right segment
    let mut cg = Cursor::new(g);
    let mut prev: Option<(f64, f64, f64)> = None;
    for &t in &grid {
        let fv = cf.eval(t);
        let gv = cg.eval(t);
        if let Some((pt, pf, pg)) = prev {
            let d0 = pf - pg;
            let d1 = fv - gv;
            let tol = value_tol(pf.max(fv));
            if (d0 > tol && d1 < -tol) || (d0 < -tol && d1 > tol) {
                let frac = d0 / (d0 - d1);
                let tc = pt + (t - pt) * frac;
                if tc > pt && tc < t {
                    let vc = pf + (fv - pf) * frac;
                    out.push((tc, vc));
                }
            }
        }
        let v = fv.min(gv);
        if out.last().is_none_or(|&(lt, _)| t > lt) {
            out.push((t, v));
        }
        prev = Some((t, fv, gv));
    }
    // crossings are interpolated on f; rounding may leave them an ulp above
    // the next value, and inputs here are non-decreasing
    for k in 1..out.len() {
        if out[k].1 < out[k - 1].1 {
            out[k].1 = out[k - 1].1;
        }
    }
    simplify(&mut out);
    PiecewiseLinear::from_sorted(out)
}
