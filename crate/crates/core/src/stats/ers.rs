use nalgebra::{DMatrix, DVector};

use super::{check_alpha, SampleSeries, StatsError, TestOutcome};

const MIN_LEN: usize = 50;

/// Lag order `⌊12 (n/100)^{1/4}⌋`.
pub fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

// Dickey–Fuller percentiles for the regression without deterministic terms,
// which is the reference distribution of the demeaned DF-GLS statistic.
// Rows: sample size; columns: 1%, 5%, 10%.
const DF_TABLE: [(f64, [f64; 3]); 6] = [
    (25.0, [-2.66, -1.95, -1.60]),
    (50.0, [-2.62, -1.95, -1.61]),
    (100.0, [-2.60, -1.95, -1.61]),
    (250.0, [-2.58, -1.95, -1.62]),
    (500.0, [-2.58, -1.95, -1.62]),
    (f64::INFINITY, [-2.58, -1.95, -1.62]),
];
const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Critical value of the demeaned DF-GLS statistic, interpolated linearly in
/// `1/n` between tabulated sample sizes and in `alpha` between 1%, 5% and 10%.
pub fn ers_critical_value(n: usize, alpha: f64) -> Result<f64, StatsError> {
    if !(LEVELS[0]..=LEVELS[2]).contains(&alpha) {
        return Err(StatsError::InvalidInput(format!(
            "ERS critical values are tabulated for alpha in [0.01, 0.10], got {alpha}"
        )));
    }
    let x = 1.0 / n.max(1) as f64;
    let row = |i: usize| -> f64 {
        let cv = DF_TABLE[i].1;
        let j = if alpha <= LEVELS[1] { 0 } else { 1 };
        let w = (alpha - LEVELS[j]) / (LEVELS[j + 1] - LEVELS[j]);
        cv[j] + w * (cv[j + 1] - cv[j])
    };
    let inv = |i: usize| 1.0 / DF_TABLE[i].0;
    if x >= inv(0) {
        return Ok(row(0));
    }
    for i in 1..DF_TABLE.len() {
        if x >= inv(i) {
            let w = (x - inv(i)) / (inv(i - 1) - inv(i));
            return Ok(row(i) + w * (row(i - 1) - row(i)));
        }
    }
    Ok(row(DF_TABLE.len() - 1))
}

/// Elliott–Rothenberg–Stock DF-GLS unit-root test, demeaned variant.
///
/// The series is GLS-demeaned with `ā = 1 − 7/n`, then an augmented
/// Dickey–Fuller regression without deterministic terms is fitted with
/// [`schwert_lag`] lagged differences. The statistic is the t-ratio of the
/// lagged level; the series passes (is judged stationary) when the statistic
/// falls below the critical value.
pub fn ers_test(series: &SampleSeries, alpha: f64) -> Result<TestOutcome, StatsError> {
    ers_test_with_lags(series, alpha, schwert_lag(series.len()))
}

/// [`ers_test`] with an explicit number of lagged differences.
pub fn ers_test_with_lags(
    series: &SampleSeries,
    alpha: f64,
    lags: usize,
) -> Result<TestOutcome, StatsError> {
    check_alpha(alpha)?;
    let n = series.len();
    if n < MIN_LEN {
        return Err(StatsError::InsufficientSamples {
            needed: MIN_LEN,
            got: n,
        });
    }
    let statistic = dfgls_statistic(&series.values, lags)?;
    let threshold = ers_critical_value(n, alpha)?;
    Ok(TestOutcome {
        statistic,
        threshold,
        pass: statistic < threshold,
        alpha,
    })
}

fn dfgls_statistic(y: &[f64], k: usize) -> Result<f64, StatsError> {
    let n = y.len();
    let a_bar = 1.0 - 7.0 / n as f64;

    // quasi-differenced regression of y on a constant
    let mut num = y[0];
    let mut den = 1.0;
    for t in 1..n {
        let z = 1.0 - a_bar;
        num += z * (y[t] - a_bar * y[t - 1]);
        den += z * z;
    }
    let mu = num / den;
    let yd: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let dy: Vec<f64> = yd.windows(2).map(|w| w[1] - w[0]).collect();

    // Δyd_t on yd_{t−1} and Δyd_{t−1..t−k}, for t = k+1 .. n−1
    let rows = n - 1 - k;
    let cols = k + 1;
    if rows <= cols {
        return Err(StatsError::InsufficientSamples {
            needed: 2 * cols + 2,
            got: n,
        });
    }
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + k + 1;
        if c == 0 {
            yd[t - 1]
        } else {
            dy[t - 1 - c]
        }
    });
    let target = DVector::from_fn(rows, |r, _| dy[r + k]);

    let xtx = x.transpose() * &x;
    let chol = xtx.clone().cholesky().ok_or_else(|| {
        StatsError::DegenerateSeries("singular ADF regression (constant series?)".into())
    })?;
    let beta = chol.solve(&(x.transpose() * &target));
    let resid = &target - &x * &beta;
    let s2 = resid.norm_squared() / (rows - cols) as f64;
    let inv = chol.inverse();
    let se = (s2 * inv[(0, 0)]).sqrt();
    if !(se.is_finite() && se > 0.0) {
        return Err(StatsError::DegenerateSeries(
            "zero residual variance in ADF regression".into(),
        ));
    }
    Ok(beta[0] / se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn lag_rule() {
        assert_eq!(schwert_lag(500), 17);
        assert_eq!(schwert_lag(750), 19);
        assert_eq!(schwert_lag(50), 10);
    }

    #[test]
    fn critical_values_interpolate() {
        assert_eq!(ers_critical_value(500, 0.05).unwrap(), -1.95);
        assert!((ers_critical_value(100, 0.01).unwrap() + 2.60).abs() < 1e-12);
        let mid = ers_critical_value(75, 0.01).unwrap();
        assert!(mid < -2.60 && mid > -2.62);
        assert!(ers_critical_value(100, 0.2).is_err());
    }

    #[test]
    fn noise_passes_with_short_lag_and_random_walk_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut walk = noise.clone();
        for i in 1..walk.len() {
            walk[i] += walk[i - 1];
        }
        assert!(ers_test_with_lags(&SampleSeries::new(noise).unwrap(), 0.05, 1).unwrap().pass);
        assert!(!ers_test(&SampleSeries::new(walk).unwrap(), 0.05).unwrap().pass);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = SampleSeries::new(vec![0.05; 100]).unwrap();
        assert!(matches!(ers_test(&s, 0.05), Err(StatsError::DegenerateSeries(_))));
        let short = SampleSeries::new(vec![1.0; 20]).unwrap();
        assert!(matches!(ers_test(&short, 0.05), Err(StatsError::InsufficientSamples { .. })));
    }
}
