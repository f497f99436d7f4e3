//! Backward shots from the boundary of the absorbing region. These cover the
//! orbit-heavy region where no closed form exists.
//!
//! ```text
//! cargo run --release --example shooting
//! ```

use returnctl::transient::{boundary_anchors, ShootSettings};
use returnctl::Scenario;

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let cp = sc.control_problem();
    let j = cp.equilibrium().j_inf;
    let settings = ShootSettings::default();
    println!("{:>14} {:>7} {:>16} {:>8} {:>10}", "anchor", "length", "end state", "min p", "max |H|/J");
    for anchor in boundary_anchors(&cp, 9) {
        let shot = cp.shoot_from_boundary(anchor, &settings).map_err(returnctl::Error::from)?;
        let end = shot.samples.last().unwrap();
        let min_p = shot.samples.iter().map(|s| s.p).fold(f64::INFINITY, f64::min);
        let drift = shot
            .samples
            .iter()
            .map(|s| cp.hamiltonian(s.state, s.p, s.costate).abs() / j)
            .fold(0.0, f64::max);
        println!(
            "({:>5.1},{:>5.1}) {:>7.2} ({:>6.1},{:>6.1}) {:>8.4} {:>10.2e}",
            anchor.x, anchor.y, end.s, end.state.x, end.state.y, min_p, drift
        );
    }
    Ok(())
}
