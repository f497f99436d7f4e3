//! Mean stochastic path against the fluid path at increasing system scale.
//!
//! ```text
//! cargo run --release --example tracking
//! ```

use returnctl::experiments::tracking_error;
use returnctl::Scenario;

fn main() -> returnctl::Result<()> {
    let base = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    for scale in [1.0, 4.0] {
        // scale arrivals and servers together; the state scales with them
        let sc = base.with(|s| {
            s.lambda *= scale;
            s.servers = (s.servers as f64 * scale) as u32;
        })?;
        let s0 = ((80.0 * scale) as u64, (60.0 * scale) as u64);
        let rep = tracking_error(&sc, s0, 60.0, 1.0, 100, 9)?;
        println!("scale {scale}: sup relative error {:.3}", rep.sup_rel_error);
        for k in (0..rep.times.len()).step_by(15) {
            println!(
                "  t={:>4.0} mean ({:>6.1},{:>6.1}) fluid ({:>6.1},{:>6.1})",
                rep.times[k], rep.mean_x[k], rep.mean_y[k], rep.fluid_x[k], rep.fluid_y[k]
            );
        }
    }
    Ok(())
}
