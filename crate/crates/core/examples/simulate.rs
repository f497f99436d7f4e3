//! One stochastic replication with a sampled path and the first few events.
//!
//! ```text
//! cargo run --release --example simulate
//! ```

use returnctl::{simulate, PolicySpec, Scenario, SimConfig};

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let policy = sc.build_policy(PolicySpec::Fluid { settings: None })?;
    let mut cfg = SimConfig::new(30.0, (80, 60), 42);
    cfg.path_step = Some(5.0);
    cfg.record_events = true;
    let run = simulate(&sc, &policy, &cfg)?;

    for pt in &run.path {
        println!("t = {:>4.0}  X = {:>3}  Y = {:>3}", pt.t, pt.x, pt.y);
    }
    let l = &run.ledger;
    println!(
        "{} arrivals, {} completions, {} returns, {} interventions",
        l.arrivals, l.completions, l.return_events, l.interventions
    );
    println!(
        "cost: holding {:.2} + returns {:.2} + intervention {:.2} = {:.2}",
        l.holding,
        l.returns,
        l.intervention,
        l.total()
    );
    println!("first events:");
    let mut csv = Vec::new();
    run.write_events_csv(&mut csv)?;
    for line in String::from_utf8_lossy(&csv).lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
