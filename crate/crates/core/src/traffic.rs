//! Synthetic variable-bit-rate traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::calculus::{CalculusError, CumulativeProcess};
use crate::rng::stream_seed;

/// Two-state Markov-modulated fluid source alternating between
/// `mean · (1 + burstiness)` and `mean · (1 − burstiness)` with exponentially
/// distributed sojourn times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VbrSpec {
    pub mean_rate_bps: f64,
    /// In `[0, 1]`; 0 gives a constant-rate trace, 1 an on-off trace.
    pub burstiness: f64,
    pub mean_sojourn_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
}

pub fn generate_vbr(spec: &VbrSpec) -> Result<CumulativeProcess, CalculusError> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(spec.mean_rate_bps) || !ok(spec.mean_sojourn_s) || !ok(spec.duration_s) {
        return Err(CalculusError::InvalidInput(
            "VBR trace needs positive mean rate, sojourn time and duration".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.burstiness) {
        return Err(CalculusError::InvalidInput(format!(
            "burstiness must lie in [0, 1], got {}",
            spec.burstiness
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, "source"));
    let sojourn = Exp::new(1.0 / spec.mean_sojourn_s).expect("positive rate");
    let rates = [
        spec.mean_rate_bps * (1.0 + spec.burstiness),
        spec.mean_rate_bps * (1.0 - spec.burstiness),
    ];
    let mut state = usize::from(rng.random::<bool>());
    let (mut t, mut v) = (0.0, 0.0);
    let mut points = vec![(0.0, 0.0)];
    while t < spec.duration_s {
        let dt = sojourn.sample(&mut rng).min(spec.duration_s - t);
        if dt <= 0.0 {
            continue;
        }
        t += dt;
        v += rates[state] * dt;
        points.push((t, v));
        state = 1 - state;
    }
    CumulativeProcess::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_rate_is_close_and_seeded() {
        let spec = VbrSpec {
            mean_rate_bps: 1000.0,
            burstiness: 0.5,
            mean_sojourn_s: 0.05,
            duration_s: 200.0,
            seed: 4,
        };
        let a = generate_vbr(&spec).unwrap();
        assert!((a.mean_rate() / 1000.0 - 1.0).abs() < 0.05, "{}", a.mean_rate());
        assert_eq!(a, generate_vbr(&spec).unwrap());
        assert_eq!(a.horizon(), 200.0);
        let flat = generate_vbr(&VbrSpec { burstiness: 0.0, ..spec }).unwrap();
        assert!((flat.mean_rate() - 1000.0).abs() < 1e-6);
    }
}
