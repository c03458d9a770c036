use super::{SampleSeries, StatsError};

/// Median of the values, averaging the two middle order statistics for even
/// lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Upper order-statistic quantile: the `⌈q·n⌉`-th smallest value (1-based).
pub fn empirical_quantile(series: &SampleSeries, q: f64) -> Result<f64, StatsError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(StatsError::InvalidInput(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    let n = series.len();
    if n == 0 {
        return Err(StatsError::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut v = series.values.clone();
    v.sort_by(f64::total_cmp);
    // the small slack keeps q·n = 95.000000001 from rounding up to 96
    let rank = ((q * n as f64) * (1.0 - 1e-12)).ceil() as usize;
    Ok(v[rank.clamp(1, n) - 1])
}

/// Biased sample autocorrelation `r_k = c_k / c_0` for lags `0..=max_lag`,
/// with `c_k = (1/n) Σ (x_t − x̄)(x_{t+k} − x̄)`.
pub fn autocorrelation(series: &SampleSeries, max_lag: usize) -> Result<Vec<(usize, f64)>, StatsError> {
    let lags: Vec<usize> = (0..=max_lag).collect();
    autocorrelation_at(series, &lags)
}

/// Biased sample autocorrelation at selected lags.
pub fn autocorrelation_at(series: &SampleSeries, lags: &[usize]) -> Result<Vec<(usize, f64)>, StatsError> {
    let x = &series.values;
    let n = x.len();
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if n <= max_lag {
        return Err(StatsError::InsufficientSamples {
            needed: max_lag + 1,
            got: n,
        });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>();
    if c0.is_nan() || c0 <= 0.0 || x.iter().all(|&v| v == x[0]) {
        return Err(StatsError::UndefinedCorrelation);
    }
    Ok(lags
        .iter()
        .map(|&k| {
            let ck: f64 = dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum();
            (k, if k == 0 { 1.0 } else { ck / c0 })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> SampleSeries {
        SampleSeries::new(v).unwrap()
    }

    #[test]
    fn quantile_examples() {
        let s = series((1..=100).map(f64::from).collect());
        assert_eq!(empirical_quantile(&s, 0.95).unwrap(), 95.0);
        assert_eq!(empirical_quantile(&s, 0.999).unwrap(), 100.0);
        assert_eq!(empirical_quantile(&s, 0.001).unwrap(), 1.0);
        let one = series(vec![4.2]);
        assert_eq!(empirical_quantile(&one, 0.3).unwrap(), 4.2);
        assert_eq!(empirical_quantile(&one, 0.99).unwrap(), 4.2);
        assert!(empirical_quantile(&series(vec![]), 0.5).is_err());
        assert!(empirical_quantile(&s, 1.0).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn autocorrelation_basics() {
        let s = series(vec![1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0]);
        let r = autocorrelation(&s, 4).unwrap();
        assert_eq!(r[0], (0, 1.0));
        // period-4 signal peaks again at lag 4
        assert!(r[4].1 > r[3].1 && r[4].1 > r[2].1);
        assert_eq!(
            autocorrelation(&series(vec![2.0; 10]), 3),
            Err(StatsError::UndefinedCorrelation)
        );
        assert!(autocorrelation(&series(vec![1.0, 2.0]), 2).is_err());
    }
}
