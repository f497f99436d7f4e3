//! A small resumable experiment grid written to CSV. Running it twice reuses
//! the finished cells.
//!
//! ```text
//! cargo run --release --example grid [out.csv]
//! ```

use returnctl::experiments::{run_grid, CostForm, ExperimentGrid};
use returnctl::Scenario;

fn main() -> returnctl::Result<()> {
    let base = Scenario::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_quadratic.json"))?;
    let mut grid = ExperimentGrid::cost_grid(base.spec().clone(), CostForm::Quadratic);
    grid.ms = vec![0.5];
    grid.hs = vec![0.1, 0.5];
    grid.initial_states = vec![(65, 65)];
    grid.n_reps = 200;
    grid.longrun = None;
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("returnctl-grid.csv"));
    let rows = run_grid(&grid, Some(&out))?;
    for r in &rows {
        println!(
            "{:<40} vs {:<12} {:>6.1}%",
            r.scenario_id,
            r.benchmark,
            100.0 * r.rel_red
        );
    }
    println!("{} rows in {}", rows.len(), out.display());
    Ok(())
}
