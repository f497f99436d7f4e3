#![allow(dead_code)]

use returnctl::scenario::{ArrivalSpec, CostSpec, Scenario, ScenarioSpec};
use returnctl::SystemParams;

pub fn baseline_system() -> SystemParams {
    SystemParams {
        lambda_bar: 9.5,
        mu: 0.25,
        nu: 1.0 / 15.0,
        n_servers: 50,
        p_l: 0.1,
        p_u: 0.2,
    }
}

pub fn baseline(cost: CostSpec, h: f64) -> Scenario {
    Scenario::new(ScenarioSpec::markovian(baseline_system(), h, 1.0, cost)).unwrap()
}

pub fn quadratic(m: f64, h: f64) -> Scenario {
    baseline(CostSpec::Quadratic { m }, h)
}

pub fn linear(m: f64, h: f64) -> Scenario {
    baseline(CostSpec::Linear { m }, h)
}

pub fn piecewise() -> Scenario {
    baseline(
        CostSpec::Piecewise {
            knots: vec![(0.1, 0.5), (0.15, 0.1), (0.2, 0.0)],
        },
        0.25,
    )
}

pub fn sinusoidal(k: f64, f: f64) -> Scenario {
    quadratic(0.5, 0.25)
        .with(|s| s.arrivals = ArrivalSpec::Sinusoidal { k, f })
        .unwrap()
}
