//! Batch-means estimate of the long-run cost per day for each policy.
//!
//! ```text
//! cargo run --release --example longrun
//! ```

use returnctl::sim::{estimate_longrun, LongRunSettings};
use returnctl::{PolicySpec, Scenario};

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/headline.json"))?;
    let settings = LongRunSettings {
        n_batches: 20,
        batch_length: 1000.0,
        ..LongRunSettings::default()
    };
    let s0 = sc.equilibrium_state();
    for spec in [PolicySpec::Fluid { settings: None }, PolicySpec::Equilibrium, PolicySpec::Simple] {
        let policy = sc.build_policy(spec)?;
        let est = estimate_longrun(&sc, &policy, &settings, s0, 7)?;
        println!(
            "{:<12} {:.4} per day  95% CI [{:.4}, {:.4}]  mean queue {:.2}",
            policy.name(),
            est.rate.mean,
            est.rate.lo,
            est.rate.hi,
            est.ledger.mean_queue()
        );
    }
    Ok(())
}
