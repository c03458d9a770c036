use super::{EstimatorError, RateProbeRecord};
use crate::calculus::ServiceCurve;

#[derive(Debug, Clone, Copy)]
struct Line {
    slope: f64,
    offset: f64,
}

impl Line {
    fn at(self, t: f64) -> f64 {
        self.slope * t + self.offset
    }
}

fn crossing(a: Line, b: Line) -> f64 {
    (a.offset - b.offset) / (b.slope - a.slope)
}

/// Upper envelope of lines for `t ≥ 0`, as breakpoints. Slopes must be
/// non-negative and the zero line must be included.
fn upper_envelope(mut lines: Vec<Line>) -> Vec<(f64, f64)> {
    lines.sort_by(|a, b| a.slope.total_cmp(&b.slope).then(a.offset.total_cmp(&b.offset)));
    let mut hull: Vec<Line> = Vec::with_capacity(lines.len());
    for l in lines {
        // equal slopes: the later one has the larger offset
        if hull.last().is_some_and(|h| h.slope == l.slope) {
            hull.pop();
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if crossing(a, l) <= crossing(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    // drop lines that only dominate at negative times
    while hull.len() >= 2 && crossing(hull[0], hull[1]) <= 0.0 {
        hull.remove(0);
    }
    let mut points = vec![(0.0, hull[0].at(0.0))];
    for w in hull.windows(2) {
        let t = crossing(w[0], w[1]);
        points.push((t, w[1].at(t)));
    }
    let last = *hull.last().expect("non-empty hull");
    let t_end = points.last().expect("non-empty").0 + 1.0;
    points.push((t_end, last.at(t_end)));
    points
}

/// `S(t) = [max_{r∈R} {r·t − B^ξ(r)}]^+` over the usable records, with
/// violation probability `|R|·ξ`.
pub fn assemble_estimate(
    records: &[RateProbeRecord],
    xi: f64,
) -> Result<ServiceCurve, EstimatorError> {
    let usable: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.usable())
        .filter_map(|r| r.backlog_quantile_bits.map(|b| (r.rate_bps, b)))
        .collect();
    if usable.is_empty() {
        return Err(EstimatorError::EmptyUsableSet(
            "no record passed both tests".into(),
        ));
    }
    let epsilon = usable.len() as f64 * xi;
    if epsilon >= 1.0 {
        return Err(EstimatorError::InvalidConfig(format!(
            "union bound |R|·ξ = {epsilon} is not a probability; use a smaller ξ or fewer rates"
        )));
    }
    let mut lines = vec![Line {
        slope: 0.0,
        offset: 0.0,
    }];
    lines.extend(usable.iter().map(|&(r, b)| Line {
        slope: r,
        offset: -b,
    }));
    let curve = ServiceCurve::new(upper_envelope(lines), epsilon)?;
    Ok(curve.with_rate_grid(usable.iter().map(|u| u.0).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::SampleSeries;

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

    #[test]
    fn two_lines_meet_where_both_are_tight() {
        let s = assemble_estimate(&[record(1e6, 0.01), record(2e6, 0.02)], 1e-3).unwrap();
        assert!((s.eval(0.03) - 2e4).abs() < 1e-6);
        assert!((s.eval(0.02) - 1e4).abs() < 1e-6);
        assert_eq!(s.eval(0.005), 0.0);
        assert!((s.epsilon() - 2e-3).abs() < 1e-15);
        assert_eq!(s.long_term_rate(), 2e6);
        assert_eq!(s.rate_grid(), Some(&[1e6, 2e6][..]));
    }

    #[test]
    fn single_record_is_latency_rate() {
        let s = assemble_estimate(&[record(5e6, 0.05)], 1e-4).unwrap();
        let lr = ServiceCurve::latency_rate(5e6, 0.05).unwrap();
        for t in [0.0, 0.03, 0.05, 0.07, 2.0] {
            assert!((s.eval(t) - lr.eval(t)).abs() < 1e-6, "{t}");
        }
    }

    #[test]
    fn failing_records_are_ignored() {
        let mut bad = record(3e6, 0.001);
        bad.stationary = false;
        let s = assemble_estimate(&[record(1e6, 0.01), bad.clone()], 1e-3).unwrap();
        assert_eq!(s.long_term_rate(), 1e6);
        assert!(matches!(
            assemble_estimate(&[bad], 1e-3),
            Err(EstimatorError::EmptyUsableSet(_))
        ));
    }

    #[test]
    fn zero_delay_line_starts_at_origin() {
        let s = assemble_estimate(&[record(1e6, 0.0), record(2e6, 0.01)], 1e-3).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert!((s.eval(0.01) - 1e4).abs() < 1e-6);
        assert!((s.eval(0.03) - 4e4).abs() < 1e-6);
    }
}
