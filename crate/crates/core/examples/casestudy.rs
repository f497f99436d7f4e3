//! Holding-cost sweep on the hospital case study: direct cost paid against
//! the queue length it buys. Uses lognormal stays and a weekly arrival pattern.
//!
//! ```text
//! cargo run --release --example casestudy
//! ```

use returnctl::experiments::{tradeoff_curve, LongRunPlan};
use returnctl::Scenario;

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/casestudy.json"))?;
    let plan = LongRunPlan {
        warmup: 500.0,
        length: 5000.0,
        n_reps: 40,
    };
    let hs = [0.0, 500.0, 1000.0, 2000.0, 3000.0];
    println!("{:>6} {:>12} {:>17} {:>10}", "h", "direct/day", "mean queue", "mean p");
    for pt in tradeoff_curve(&sc, &hs, plan, 3)? {
        println!(
            "{:>6} {:>12.1} {:>9.3} ± {:>5.3} {:>10.4}",
            pt.h,
            pt.direct.mean,
            pt.mean_queue.mean,
            pt.mean_queue.half_width(),
            pt.summary.mean_p
        );
    }
    Ok(())
}
