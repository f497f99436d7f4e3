//! Confidence intervals for means and for ratios of independent means.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::StatsError;

/// Two-sided Student-t critical value `t_{1-α/2, df}`.
pub fn t_critical(alpha: f64, df: f64) -> f64 {
    if !df.is_finite() || df > 1e7 {
        return statrs::distribution::Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    }
    StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha / 2.0)
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Student-t interval for the mean.
pub fn mean_ci(xs: &[f64], alpha: f64) -> Result<MeanCi, StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let (m, v) = mean_var(xs);
    let hw = t_critical(alpha, (xs.len() - 1) as f64) * (v / xs.len() as f64).sqrt();
    Ok(MeanCi {
        mean: m,
        lo: m - hw,
        hi: m + hw,
        sd: v.sqrt(),
        n: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCi {
    /// `mean(num) / mean(den)`.
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
    /// Welch–Satterthwaite degrees of freedom used for the critical value.
    pub df: f64,
}

/// Fieller interval for `mean(num)/mean(den)` from independent samples.
pub fn fieller_ci(num: &[f64], den: &[f64], alpha: f64) -> Result<RatioCi, StatsError> {
    for xs in [num, den] {
        if xs.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                got: xs.len(),
            });
        }
    }
    let (a, sa) = mean_var(num);
    let (b, sb) = mean_var(den);
    let (n1, n2) = (num.len() as f64, den.len() as f64);
    let (va, vb) = (sa / n1, sb / n2);
    if b == 0.0 {
        return Err(StatsError::UnboundedInterval);
    }
    let ratio = a / b;
    if va == 0.0 && vb == 0.0 {
        return Ok(RatioCi {
            ratio,
            lo: ratio,
            hi: ratio,
            df: f64::INFINITY,
        });
    }
    let r2 = ratio * ratio;
    let pooled = va + r2 * vb;
    let df = pooled * pooled / (va * va / (n1 - 1.0) + r2 * r2 * vb * vb / (n2 - 1.0));
    let t2 = t_critical(alpha, df).powi(2);
    // (b² - t² vb) R² - 2ab R + (a² - t² va) = 0
    let qa = b * b - t2 * vb;
    if qa <= 0.0 {
        return Err(StatsError::UnboundedInterval);
    }
    let disc = (a * b).powi(2) - qa * (a * a - t2 * va);
    let root = disc.max(0.0).sqrt();
    let (r1, r2) = ((a * b - root) / qa, (a * b + root) / qa);
    Ok(RatioCi {
        ratio,
        lo: r1.min(r2),
        hi: r1.max(r2),
        df,
    })
}

/// First-order (delta-method) interval for the same ratio.
pub fn delta_ratio_ci(num: &[f64], den: &[f64], alpha: f64) -> Result<RatioCi, StatsError> {
    let f = fieller_ci(num, den, alpha)?;
    let (a, sa) = mean_var(num);
    let (b, sb) = mean_var(den);
    let r = a / b;
    let se = ((sa / num.len() as f64 + r * r * sb / den.len() as f64).sqrt()) / b.abs();
    let hw = t_critical(alpha, f.df) * se;
    Ok(RatioCi {
        ratio: r,
        lo: r - hw,
        hi: r + hw,
        df: f.df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Welch two-sample t-test for equal means.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, StatsError> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                got: xs.len(),
            });
        }
    }
    let (ma, sa) = mean_var(a);
    let (mb, sb) = mean_var(b);
    let (va, vb) = (sa / a.len() as f64, sb / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        let p = if ma == mb { 1.0 } else { 0.0 };
        return Ok(WelchTest {
            t: 0.0,
            df: f64::INFINITY,
            p_value: p,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    Ok(WelchTest {
        t,
        df,
        p_value: 2.0 * (1.0 - dist.cdf(t.abs())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn zero_variance_ratio_is_exact() {
        let r = fieller_ci(&[3.0; 5], &[2.0; 7], 0.05).unwrap();
        assert_eq!((r.ratio, r.lo, r.hi), (1.5, 1.5, 1.5));
    }

    #[test]
    fn denominator_near_zero_is_unbounded() {
        let den = [-1.0, 1.0, -2.0, 2.0, 0.1];
        assert_eq!(
            fieller_ci(&[1.0, 2.0, 3.0], &den, 0.05),
            Err(StatsError::UnboundedInterval)
        );
        assert!(matches!(
            fieller_ci(&[1.0], &[1.0, 2.0], 0.05),
            Err(StatsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn t_critical_matches_tables() {
        assert!((t_critical(0.05, 10.0) - 2.228).abs() < 1e-3);
        assert!((t_critical(0.05, f64::INFINITY) - 1.95996).abs() < 1e-4);
    }

    #[test]
    fn approaches_delta_method_as_variance_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut prev_gap = f64::INFINITY;
        for sd in [1.0, 0.1, 0.01, 0.001] {
            let nn = Normal::new(10.0, sd).unwrap();
            let nd = Normal::new(20.0, sd).unwrap();
            let num: Vec<f64> = (0..200).map(|_| nn.sample(&mut rng)).collect();
            let den: Vec<f64> = (0..200).map(|_| nd.sample(&mut rng)).collect();
            let f = fieller_ci(&num, &den, 0.05).unwrap();
            let d = delta_ratio_ci(&num, &den, 0.05).unwrap();
            let width = d.hi - d.lo;
            let gap = ((f.lo - d.lo).abs() + (f.hi - d.hi).abs()) / width;
            assert!(gap < prev_gap || gap < 1e-6, "sd={sd}: {gap}");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3);
    }

    proptest! {
        #[test]
        fn interval_contains_point_estimate(
            num in prop::collection::vec(5.0..15.0f64, 2..40),
            den in prop::collection::vec(15.0..25.0f64, 2..40),
        ) {
            let r = fieller_ci(&num, &den, 0.05).unwrap();
            prop_assert!(r.lo <= r.ratio && r.ratio <= r.hi);
        }
    }
}
