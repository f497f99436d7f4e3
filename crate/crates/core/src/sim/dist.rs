use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Service or time-to-return distribution, in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DurationDist {
    Exponential { rate: f64 },
    /// `exp(N(log_mean, log_sd²))`.
    LogNormal { log_mean: f64, log_sd: f64 },
    /// Exponential with mean `mean` conditioned on being below `upper`.
    TruncatedExponential { mean: f64, upper: f64 },
}

impl DurationDist {
    pub fn check(&self) -> Result<(), SimError> {
        let ok = match *self {
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Self::LogNormal { log_mean, log_sd } => log_mean.is_finite() && log_sd > 0.0,
            Self::TruncatedExponential { mean, upper } => mean > 0.0 && upper > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidScenario(format!("bad duration distribution {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::LogNormal { log_mean, log_sd } => (log_mean + 0.5 * log_sd * log_sd).exp(),
            Self::TruncatedExponential { mean, upper } => {
                let q = (-upper / mean).exp();
                mean - upper * q / (1.0 - q)
            }
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, Self::Exponential { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                e / rate
            }
            Self::LogNormal { log_mean, log_sd } => {
                let z: f64 = StandardNormal.sample(rng);
                (log_mean + log_sd * z).exp()
            }
            Self::TruncatedExponential { mean, upper } => {
                // inverse CDF of the conditioned law; exactly one uniform per draw
                let mass = -(-upper / mean).exp_m1();
                let u: f64 = 1.0 - rng.random::<f64>();
                (-mean * (-u * mass).ln_1p()).min(upper * (1.0 - f64::EPSILON))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_mean(d: DurationDist, n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, (v / n as f64).sqrt())
    }

    #[test]
    fn case_study_distribution_means() {
        let los = DurationDist::LogNormal { log_mean: 1.38, log_sd: 0.83 };
        assert!((los.mean() - 5.6).abs() < 0.02, "{}", los.mean());
        let ret = DurationDist::TruncatedExponential { mean: 25.0, upper: 30.0 };
        assert!((ret.mean() - 12.07).abs() < 0.005, "{}", ret.mean());
        for d in [los, ret, DurationDist::Exponential { rate: 0.25 }] {
            let (m, se) = sample_mean(d, 200_000);
            assert!((m - d.mean()).abs() < 4.0 * se, "{d:?}: {m}");
        }
    }

    #[test]
    fn truncated_samples_are_positive_and_below_bound() {
        let d = DurationDist::TruncatedExponential { mean: 25.0, upper: 30.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let x = d.sample(&mut rng);
            assert!(x > 0.0 && x < 30.0);
        }
    }
}
