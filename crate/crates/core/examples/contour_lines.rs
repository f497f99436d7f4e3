//! Clearing-time contours in the congested region and the costates along them.
//!
//! ```text
//! cargo run --release --example contour_lines
//! ```

use returnctl::transient::ContourTable;
use returnctl::{FluidState, Scenario};

fn main() -> returnctl::Result<()> {
    let sc = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let cp = sc.control_problem();
    println!("{:>6} {:>8} {:>9} {:>8} {:>9} {:>9}", "tau", "slope", "a", "p*", "gamma1", "gamma2");
    for tau in [0.0, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0] {
        let line = cp.contour_line(tau);
        let co = cp.costates_backward(tau);
        println!(
            "{tau:>6.1} {:>8.4} {:>9.3} {:>8.4} {:>9.4} {:>9.4}",
            line.slope_coeff, line.a, line.p_star, co.gamma1, co.gamma2
        );
    }

    let table = ContourTable::build(&cp, 60.0, 2000).map_err(returnctl::Error::from)?;
    for s in [FluidState::new(60.0, 20.0), FluidState::new(90.0, 60.0), FluidState::new(130.0, 10.0)] {
        let tau = table.tau_for_state(&cp, s);
        println!("state ({}, {}) clears in {tau:.3} days", s.x, s.y);
    }
    Ok(())
}
