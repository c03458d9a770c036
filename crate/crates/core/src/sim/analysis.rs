use super::output::SimOutput;
use super::SimError;
use crate::stats::{autocorrelation_at, SampleSeries, StatsError};

/// Per-packet delay split into sender stack, network and receiver stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayComponents {
    pub id: u64,
    pub snd: f64,
    pub net: f64,
    pub rcv: f64,
    /// `snd + net + rcv`.
    pub e2e: f64,
}

pub fn decompose_delays(out: &SimOutput) -> Vec<DelayComponents> {
    out.packets
        .iter()
        .map(|p| {
            let snd = p.t2 - p.t1;
            let net = p.t3 - p.t2;
            let rcv = p.t4 - p.t3;
            DelayComponents {
                id: p.id,
                snd,
                net,
                rcv,
                e2e: snd + net + rcv,
            }
        })
        .collect()
}

/// Fraction of post-warmup packets that wait longer than `threshold` in the
/// sender's stack.
pub fn stack_buffering_probability(out: &SimOutput, threshold: f64) -> Result<f64, SimError> {
    let (mut n, mut waited) = (0usize, 0usize);
    for p in out.steady_state() {
        n += 1;
        if p.t2 - p.t1 > threshold {
            waited += 1;
        }
    }
    if n == 0 {
        return Err(SimError::InvalidInput(
            "no packets after warmup to evaluate".into(),
        ));
    }
    Ok(waited as f64 / n as f64)
}

/// Samples a right-continuous step function given by `(t, value)` change
/// points on the grid `start, start + tick, …` up to `end`.
pub fn resample_step(series: &[(f64, f64)], start: f64, end: f64, tick: f64) -> Vec<f64> {
    assert!(tick > 0.0);
    let n = ((end - start) / tick).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut i = 0usize;
    let mut current = series.first().map_or(0.0, |p| p.1);
    for k in 0..n {
        let t = start + k as f64 * tick;
        while i < series.len() && series[i].0 <= t {
            current = series[i].1;
            i += 1;
        }
        out.push(current);
    }
    out
}

/// Window autocorrelation at the given lags (seconds), after resampling the
/// window series to a uniform `tick` grid on `[start, end]`.
pub fn cwnd_autocorrelation(
    series: &[(f64, f64)],
    start: f64,
    end: f64,
    tick: f64,
    lags: &[f64],
) -> Result<Vec<(f64, f64)>, StatsError> {
    let samples = SampleSeries::new(resample_step(series, start, end, tick))?;
    let steps: Vec<usize> = lags.iter().map(|&l| (l / tick).round() as usize).collect();
    let r = autocorrelation_at(&samples, &steps)?;
    Ok(lags.iter().zip(r).map(|(&l, (_, c))| (l, c)).collect())
}
