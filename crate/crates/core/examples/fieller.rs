//! Confidence intervals for a ratio of means.
//!
//! ```text
//! cargo run --release --example fieller
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use returnctl::stats::{delta_ratio_ci, fieller_ci, welch_t_test};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = Normal::new(8.0, 2.0).unwrap();
    let b = Normal::new(10.0, 2.5).unwrap();
    for n in [10, 100, 1000] {
        let xs: Vec<f64> = (0..n).map(|_| a.sample(&mut rng)).collect();
        let ys: Vec<f64> = (0..n).map(|_| b.sample(&mut rng)).collect();
        let f = fieller_ci(&xs, &ys, 0.05).unwrap();
        let d = delta_ratio_ci(&xs, &ys, 0.05).unwrap();
        let w = welch_t_test(&xs, &ys).unwrap();
        println!(
            "n={n:>4}  ratio {:.3}  Fieller [{:.3}, {:.3}]  delta [{:.3}, {:.3}]  Welch p={:.2e}",
            f.ratio, f.lo, f.hi, d.lo, d.hi, w.p_value
        );
    }
}
