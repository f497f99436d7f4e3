//! How sinusoidal arrival rates shift the amount of intervention.
//!
//! ```text
//! cargo run --release --example time_varying
//! ```

use returnctl::experiments::{time_varying_study, LongRunPlan};
use returnctl::Scenario;

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let plan = LongRunPlan {
        warmup: 200.0,
        length: 3000.0,
        n_reps: 8,
    };
    let pts = time_varying_study(&sc, &[0.0, 0.5, 1.0], &[1.0, 7.0, 28.0], plan, 5)?;
    println!("{:>5} {:>5} {:>8} {:>10} {:>10}", "f", "k", "mean p", "all busy", "cost/day");
    for p in pts {
        println!(
            "{:>5} {:>5} {:>8.4} {:>9.1}% {:>10.3}",
            p.f,
            p.k,
            p.mean_p.mean,
            100.0 * p.summary.full_fraction,
            p.cost.mean
        );
    }
    Ok(())
}
