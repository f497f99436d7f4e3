use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Exogenous arrival process. Rates are per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArrivalProcess {
    Stationary { rate: f64 },
    /// `λ̄ (1 + k sin(2πt/f))`.
    Sinusoidal { mean: f64, k: f64, f: f64 },
    /// `base (1 - amplitude sin(2πt))` with `base = weekday` when `t mod 7 <= 5`.
    CaseStudyWeekly {
        weekday: f64,
        weekend: f64,
        amplitude: f64,
    },
}

impl ArrivalProcess {
    pub fn check(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        match *self {
            Self::Stationary { rate } if !(rate > 0.0 && rate.is_finite()) => {
                bad(format!("arrival rate must be positive, got {rate}"))
            }
            Self::Sinusoidal { mean, k, f }
                if !(mean > 0.0 && (0.0..=1.0).contains(&k) && f > 0.0 && f.is_finite()) =>
            {
                bad(format!("sinusoidal arrivals need mean > 0, 0 <= k <= 1, f > 0; got {mean}, {k}, {f}"))
            }
            Self::CaseStudyWeekly {
                weekday,
                weekend,
                amplitude,
            } if !(weekday > 0.0 && weekend > 0.0 && (0.0..=1.0).contains(&amplitude)) => bad(format!(
                "weekly arrivals need positive rates and amplitude in [0, 1]; got {weekday}, {weekend}, {amplitude}"
            )),
            _ => Ok(()),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Self::Stationary { rate } => rate,
            Self::Sinusoidal { mean, k, f } => mean * (1.0 + k * (2.0 * PI * t / f).sin()),
            Self::CaseStudyWeekly {
                weekday,
                weekend,
                amplitude,
            } => {
                let base = if t.rem_euclid(7.0) <= 5.0 { weekday } else { weekend };
                base * (1.0 - amplitude * (2.0 * PI * t).sin())
            }
        }
    }

    /// Upper bound on `rate(t)` used for thinning.
    pub fn bound(&self) -> f64 {
        match *self {
            Self::Stationary { rate } => rate,
            Self::Sinusoidal { mean, k, .. } => mean * (1.0 + k),
            Self::CaseStudyWeekly {
                weekday,
                weekend,
                amplitude,
            } => weekday.max(weekend) * (1.0 + amplitude),
        }
    }

    /// Long-run average rate.
    pub fn mean_rate(&self) -> f64 {
        match *self {
            Self::Stationary { rate } => rate,
            Self::Sinusoidal { mean, .. } => mean,
            // the daily sinusoid averages out over whole days
            Self::CaseStudyWeekly { weekday, weekend, .. } => (5.0 * weekday + 2.0 * weekend) / 7.0,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, Self::Stationary { .. })
            || matches!(self, Self::Sinusoidal { k, .. } if *k == 0.0)
    }

    /// Probability of keeping a proposal from the bounding process at `t`.
    pub(crate) fn accept_prob(&self, t: f64) -> f64 {
        match self {
            Self::Stationary { .. } => 1.0,
            _ => self.rate(t) / self.bound(),
        }
    }
}

/// Next arrival after `now`, by thinning a homogeneous process at `bound()`.
pub fn sample_nhpp_next<R: Rng + ?Sized>(arrivals: &ArrivalProcess, now: f64, rng: &mut R) -> f64 {
    let bound = arrivals.bound();
    let mut t = now;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e / bound;
        let accept = arrivals.accept_prob(t);
        if accept >= 1.0 || rng.random::<f64>() < accept {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Kolmogorov–Smirnov p-value by the asymptotic series.
    fn ks_p_value(d: f64, n: usize) -> f64 {
        let s = (n as f64).sqrt();
        let lam = (s + 0.12 + 0.11 / s) * d;
        let mut sum = 0.0;
        for j in 1..=100 {
            let j = j as f64;
            sum += 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lam * lam).exp();
        }
        sum.clamp(0.0, 1.0)
    }

    #[test]
    fn flat_sinusoid_gives_exponential_gaps() {
        let a = ArrivalProcess::Sinusoidal {
            mean: 9.5,
            k: 0.0,
            f: 7.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = 0.0;
        let mut gaps: Vec<f64> = (0..100_000)
            .map(|_| {
                let nt = sample_nhpp_next(&a, t, &mut rng);
                let g = nt - t;
                t = nt;
                g
            })
            .collect();
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len();
        let d = gaps
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let f = 1.0 - (-9.5 * g).exp();
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks_p_value(d, n) > 0.01, "D = {d}");
    }

    #[test]
    fn binned_counts_follow_the_daily_profile() {
        let a = ArrivalProcess::Sinusoidal {
            mean: 9.5,
            k: 1.0,
            f: 1.0,
        };
        let periods = 10_000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut bins = [0u64; 10];
        let mut t = 0.0;
        loop {
            t = sample_nhpp_next(&a, t, &mut rng);
            if t >= periods {
                break;
            }
            bins[((t.fract() * 10.0) as usize).min(9)] += 1;
        }
        for (b, &count) in bins.iter().enumerate() {
            // expected count: periods * ∫ rate over the bin
            let (lo, hi) = (b as f64 / 10.0, (b + 1) as f64 / 10.0);
            let integral =
                9.5 * ((hi - lo) - ((2.0 * PI * hi).cos() - (2.0 * PI * lo).cos()) / (2.0 * PI));
            let expected = periods * integral;
            let se = expected.sqrt();
            assert!((count as f64 - expected).abs() < 3.0 * se, "bin {b}: {count} vs {expected}");
        }
    }

    #[test]
    fn weekly_pattern_mean_rate() {
        let a = ArrivalProcess::CaseStudyWeekly {
            weekday: 6.14,
            weekend: 5.32,
            amplitude: 0.8,
        };
        assert!((a.mean_rate() - 5.91).abs() < 0.02);
        assert!((a.rate(0.25) - 6.14 * 0.2).abs() < 1e-12);
        assert!((a.rate(6.25) - 5.32 * 0.2).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let horizon = 7.0 * 4000.0;
        let mut t = 0.0;
        let mut n = 0u64;
        loop {
            t = sample_nhpp_next(&a, t, &mut rng);
            if t > horizon {
                break;
            }
            n += 1;
        }
        assert!((n as f64 / horizon - 5.91).abs() < 0.02);
    }

    #[test]
    fn rates_stay_within_bound() {
        for a in [
            ArrivalProcess::Sinusoidal { mean: 9.5, k: 1.0, f: 28.0 },
            ArrivalProcess::CaseStudyWeekly { weekday: 6.14, weekend: 5.32, amplitude: 0.8 },
        ] {
            for i in 0..10_000 {
                let r = a.rate(i as f64 * 0.0137);
                assert!(r >= 0.0 && r <= a.bound() + 1e-12);
            }
        }
        assert!(ArrivalProcess::Sinusoidal { mean: 9.5, k: 1.5, f: 1.0 }.check().is_err());
    }
}
