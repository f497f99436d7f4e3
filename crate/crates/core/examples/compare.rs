//! Paired comparison of the fluid policy against both benchmarks, with
//! Fieller intervals on the relative reduction.
//!
//! ```text
//! cargo run --release --example compare
//! ```

use returnctl::experiments::{compare_policies, Mode};
use returnctl::{PolicySpec, Scenario};

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/headline.json"))?;
    let fluid = sc.build_policy(PolicySpec::Fluid { settings: None })?;
    let modes = [
        Mode::Finite {
            horizon: 90.0,
            s0: (65, 65),
        },
        Mode::LongRun {
            warmup: 500.0,
            length: 5000.0,
        },
    ];
    for mode in modes {
        for bench in [PolicySpec::Equilibrium, PolicySpec::Simple] {
            let b = sc.build_policy(bench)?;
            let c = compare_policies(&sc, &fluid, &b, mode, 200, 11, 0.05)?;
            let ci = c
                .rel_ci
                .map_or("unbounded".to_string(), |(lo, hi)| format!("[{:.1}%, {:.1}%]", 100.0 * lo, 100.0 * hi));
            println!(
                "{:<9} vs {:<12} reduction {:>5.1}% {ci}",
                mode.tag(),
                c.policy_b,
                100.0 * c.rel_reduction
            );
        }
    }
    Ok(())
}
