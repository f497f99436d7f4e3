//! Renders the feedback policy over the state space as a character map.
//! Darker glyphs mean more intervention (smaller return probability).
//!
//! ```text
//! cargo run --release --example policy_map [scenario.json]
//! ```

use returnctl::{FluidState, Scenario};

fn main() -> returnctl::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/baseline_piecewise.json").into());
    let sc = Scenario::from_path(path)?;
    let policy = sc.build_fluid_policy()?;
    let (pl, pu) = (sc.model().p_l(), sc.model().p_u());
    let glyphs = [' ', '.', ':', '+', '#'];
    println!("y ^   x -> 0..150 (| marks x = N)");
    for row in (0..30).rev() {
        let y = row as f64 * 5.0;
        let line: String = (0..75)
            .map(|col| {
                let x = col as f64 * 2.0;
                if (x - sc.model().servers()).abs() < 1.0 {
                    return '|';
                }
                let p = policy.p(FluidState::new(x, y));
                let level = ((pu - p) / (pu - pl) * (glyphs.len() - 1) as f64).round() as usize;
                glyphs[level.min(glyphs.len() - 1)]
            })
            .collect();
        println!("{y:>5.0} {line}");
    }
    println!("' ' = p_u ({pu}), '#' = p_l ({pl})");
    Ok(())
}
