use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_alpha, median, SampleSeries, StatsError, TestOutcome};

/// Wald–Wolfowitz runs test on the above/below-median pattern.
///
/// Values equal to the median are dropped. The statistic is the normal
/// approximation `z = (R − μ_R)/σ_R`; the series passes when `|z| ≤ z_{1−α/2}`.
pub fn runs_test(series: &SampleSeries, alpha: f64) -> Result<TestOutcome, StatsError> {
    check_alpha(alpha)?;
    if series.len() < 2 {
        return Err(StatsError::InsufficientSamples {
            needed: 2,
            got: series.len(),
        });
    }
    let m = median(&series.values).expect("non-empty");
    let signs: Vec<bool> = series
        .values
        .iter()
        .filter(|&&v| v != m)
        .map(|&v| v > m)
        .collect();
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(StatsError::DegenerateSeries(
            "no values on one side of the median".into(),
        ));
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let n = n1 + n2;
    let mu = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    if var <= 0.0 {
        return Err(StatsError::DegenerateSeries(
            "runs statistic has zero variance".into(),
        ));
    }
    let z = (runs as f64 - mu) / var.sqrt();
    let threshold = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    Ok(TestOutcome {
        statistic: z,
        threshold,
        pass: z.abs() <= threshold,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_example() {
        let s = SampleSeries::new(vec![5.0, 1.0, 4.0, 2.0, 6.0, 3.0]).unwrap();
        let out = runs_test(&s, 0.05).unwrap();
        // R = 6, μ = 4, σ² = 1.2
        assert!((out.statistic - 2.0 / 1.2f64.sqrt()).abs() < 1e-12);
        assert!((out.statistic - 1.826).abs() < 1e-3);
        assert!(out.pass);
        assert!((out.threshold - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn alternating_sequence_fails() {
        let v: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let out = runs_test(&SampleSeries::new(v).unwrap(), 0.05).unwrap();
        assert!((out.statistic - 9.85).abs() < 0.01, "{}", out.statistic);
        assert!(!out.pass);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = SampleSeries::new(vec![1.0; 30]).unwrap();
        assert!(matches!(runs_test(&s, 0.05), Err(StatsError::DegenerateSeries(_))));
    }

    #[test]
    fn invariant_under_monotone_transform() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 37) % 17) as f64 + 0.1 * i as f64).collect();
        let w: Vec<f64> = v.iter().map(|x| (x * 0.3).exp()).collect();
        let a = runs_test(&SampleSeries::new(v).unwrap(), 0.05).unwrap();
        let b = runs_test(&SampleSeries::new(w).unwrap(), 0.05).unwrap();
        assert_eq!(a.statistic, b.statistic);
    }
}
