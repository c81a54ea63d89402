//! Monte Carlo plumbing shared by the codecs: per-trial generators and
//! Wilson score intervals.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Generator for one trial: the master seed picks the key, the trial index
/// the stream, so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// An error-rate estimate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub errors: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, trials, Z95);
        Self { errors, trials, estimate: errors as f64 / trials.max(1) as f64, ci_lo, ci_hi }
    }

    pub fn covers(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: (0.0552, 0.1744) to four places
        let (lo, hi) = wilson_interval(10, 100, Z95);
        assert!((lo - 0.05522914).abs() < 1e-6, "{lo}");
        assert!((hi - 0.17436566).abs() < 1e-6, "{hi}");
        let (lo, hi) = wilson_interval(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.08);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a = trial_rng(1, 0).next_u64();
        let b = trial_rng(1, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(1, 0).next_u64());
    }
}
