//! Optimal stationary return probability for the bundled scenarios.
//!
//! ```text
//! cargo run --release --example equilibrium
//! ```

use returnctl::{equilibrium_cost, solve_equilibrium, Scenario};

fn main() -> returnctl::Result<()> {
    for name in ["baseline_quadratic", "baseline_linear", "baseline_piecewise", "casestudy"] {
        let sc = Scenario::from_path(format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR")))?;
        let m = sc.model();
        let eq = solve_equilibrium(m);
        println!("{name}");
        println!("  p_inf = {:.4}, J = {:.4} per day", eq.p_inf, eq.j_inf);
        println!("  fixed point x = {:.2}, y = {:.2}", eq.x_inf, eq.y_inf);
        println!("  marginal costs psi_x = {:.4}, psi_y = {:.4}", eq.psi_x, eq.psi_y);
        // the cost curve is convex in p on each piece; print a coarse profile
        let profile: Vec<String> = (0..=4)
            .map(|i| {
                let p = m.p_l() + (m.p_u() - m.p_l()) * i as f64 / 4.0;
                format!("J({p:.3})={:.3}", equilibrium_cost(m, p).unwrap())
            })
            .collect();
        println!("  {}", profile.join("  "));
    }
    Ok(())
}
