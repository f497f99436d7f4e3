//! Fluid trajectories under a constant return probability and under the
//! synthesized feedback policy, from the same congested start.
//!
//! ```text
//! cargo run --release --example fluid_trajectory
//! ```

use returnctl::fluid::{accumulated_cost, integrate, region_of};
use returnctl::{FluidState, Scenario};

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let m = sc.model();
    let policy = sc.build_fluid_policy()?;
    let s0 = FluidState::new(80.0, 60.0);

    let constant = integrate(m, s0, |_, _| m.p_u(), 90.0, 0.01)?;
    let controlled = integrate(m, s0, |s, _| policy.p(s), 90.0, 0.01)?;

    println!("{:>5} {:>16} {:>16}", "t", "p = p_u", "fluid policy");
    for t in [0.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 90.0] {
        let a = constant.state_at(t);
        let b = controlled.state_at(t);
        println!(
            "{t:>5.0} ({:>5.1},{:>5.1}) {} ({:>5.1},{:>5.1}) {}",
            a.x,
            a.y,
            region_of(m, a).tag(),
            b.x,
            b.y,
            region_of(m, b).tag()
        );
    }
    let n = m.servers();
    for (name, traj) in [("constant", &constant), ("policy", &controlled)] {
        match traj.first_time_x_below(n) {
            Some(t) => println!("{name}: queue clears at t = {t:.2}"),
            None => println!("{name}: queue still present after 90 days"),
        }
    }
    println!(
        "accumulated cost over 90 days: {:.1} vs {:.1}",
        accumulated_cost(m, &constant),
        accumulated_cost(m, &controlled)
    );
    Ok(())
}
