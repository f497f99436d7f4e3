mod common;

use returnctl::scenario::PolicySpec;
use returnctl::sim::{estimate_longrun, Engine, LongRunSettings};
use returnctl::stats::welch_t_test;
use returnctl::{simulate, SimConfig};

use common::*;

#[test]
fn return_fraction_matches_constant_probability() {
    let sc = linear(0.5, 0.25);
    let pol = sc.build_policy(PolicySpec::Constant { p: 0.2 }).unwrap();
    let run = simulate(&sc, &pol, &SimConfig::new(85_000.0, (47, 36), 1)).unwrap();
    let l = run.ledger;
    assert!(l.completions > 1_000_000);
    let frac = (l.return_events + run.final_state.1 - 36) as f64 / l.completions as f64;
    let se = (0.2 * 0.8 / l.completions as f64).sqrt();
    assert!((frac - 0.2).abs() < 1.96 * se + 1e-4, "fraction {frac}");
    assert!((frac - 0.2).abs() < 0.005);
}

#[test]
fn zero_costs_give_zero_total() {
    let sc = linear(0.0, 0.0).with(|s| s.r = 0.0).unwrap();
    for spec in [PolicySpec::Fluid { settings: None }, PolicySpec::Simple, PolicySpec::Equilibrium] {
        let pol = sc.build_policy(spec).unwrap();
        let run = simulate(&sc, &pol, &SimConfig::new(200.0, (80, 60), 3)).unwrap();
        assert_eq!(run.ledger.total(), 0.0);
    }
}

#[test]
fn runs_are_reproducible_and_conserve_customers() {
    let sc = quadratic(0.5, 0.25);
    let pol = sc.build_policy(PolicySpec::Fluid { settings: None }).unwrap();
    for engine in [Engine::Markovian, Engine::General] {
        let mut cfg = SimConfig::new(120.0, (80, 60), 42).stream(7);
        cfg.engine = engine;
        cfg.record_events = true;
        cfg.path_step = Some(1.0);
        let a = simulate(&sc, &pol, &cfg).unwrap();
        let b = simulate(&sc, &pol, &cfg).unwrap();
        assert_eq!(a, b);
        let l = a.ledger;
        assert_eq!(
            (l.arrivals + l.return_events) as i64,
            l.completions as i64 + a.final_state.0 as i64 - 80
        );
        assert_eq!(a.path.len(), 121);
        let other = simulate(&sc, &pol, &cfg.clone().stream(8)).unwrap();
        assert_ne!(a.ledger, other.ledger);
    }
}

#[test]
fn simple_policy_switches_exactly_on_queue() {
    let sc = quadratic(0.5, 0.25);
    let pol = sc.build_policy(PolicySpec::Simple).unwrap();
    let mut cfg = SimConfig::new(200.0, (70, 40), 5);
    cfg.record_events = true;
    let run = simulate(&sc, &pol, &cfg).unwrap();
    let p_inf = returnctl::solve_equilibrium(sc.model()).p_inf;
    let mut seen = 0;
    for e in run.events.iter().filter(|e| e.p.is_some()) {
        let expect = if e.x > 50 { 0.1 } else { p_inf };
        assert_eq!(e.p.unwrap(), expect);
        seen += 1;
    }
    assert!(seen > 1000);
}

#[test]
fn engines_agree_for_exponential_laws() {
    let sc = quadratic(0.5, 0.25);
    let pol = sc.build_policy(PolicySpec::Fluid { settings: None }).unwrap();
    let totals = |engine: Engine, seed: u64| -> Vec<f64> {
        (0..1000)
            .map(|i| {
                let mut cfg = SimConfig::new(30.0, (65, 65), seed).stream(i);
                cfg.engine = engine;
                simulate(&sc, &pol, &cfg).unwrap().ledger.total()
            })
            .collect()
    };
    let a = totals(Engine::Markovian, 1);
    let b = totals(Engine::General, 2);
    let t = welch_t_test(&a, &b).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
}

#[test]
fn littles_law_holds_at_fixed_p() {
    let sc = linear(0.5, 0.25);
    let pol = sc.build_policy(PolicySpec::Constant { p: 0.2 }).unwrap();
    let mut cfg = SimConfig::new(20_500.0, (47, 36), 9);
    cfg.checkpoints = vec![500.0, 20_500.0];
    let run = simulate(&sc, &pol, &cfg).unwrap();
    let w = run.snapshots[1] - run.snapshots[0];
    let mean_x = (w.busy_area + w.queue_area) / w.elapsed;
    let throughput = (w.arrivals + w.return_events) as f64 / w.elapsed;
    // exponential service, no queue at this load most of the time: sojourn ≈ 1/μ + wait
    let wait = w.queue_area / (w.arrivals + w.return_events) as f64;
    let sojourn = 4.0 + wait;
    assert!((mean_x - throughput * sojourn).abs() / mean_x < 0.02, "{mean_x} vs {}", throughput * sojourn);
}

#[test]
fn longrun_equilibrium_cost_without_holding() {
    let sc = linear(0.5, 0.0);
    let pol = sc.build_policy(PolicySpec::Equilibrium).unwrap();
    let est = estimate_longrun(&sc, &pol, &LongRunSettings::default(), sc.equilibrium_state(), 4).unwrap();
    assert!(est.rate.contains(2.375) || (est.rate.mean - 2.375).abs() < 0.01, "{:?}", est.rate);
    let zero = linear(0.0, 0.0).with(|s| s.r = 0.0).unwrap();
    let est = estimate_longrun(&zero, &pol, &LongRunSettings::default(), (47, 36), 4).unwrap();
    assert_eq!(est.rate.mean, 0.0);
}

#[test]
fn longrun_fluid_beats_equilibrium_on_baseline() {
    let sc = quadratic(0.5, 0.25);
    let fluid = sc.build_policy(PolicySpec::Fluid { settings: None }).unwrap();
    let eq = sc.build_policy(PolicySpec::Equilibrium).unwrap();
    let s = LongRunSettings {
        n_batches: 30,
        batch_length: 5000.0,
        ..LongRunSettings::default()
    };
    let a = estimate_longrun(&sc, &fluid, &s, sc.equilibrium_state(), 10).unwrap();
    let b = estimate_longrun(&sc, &eq, &s, sc.equilibrium_state(), 11).unwrap();
    assert!(a.rate.hi < b.rate.lo, "fluid {:?} vs equilibrium {:?}", a.rate, b.rate);
}
