mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use common::{baseline_system, linear, piecewise, quadratic};
use returnctl::fluid::{integrate, region_of};
use returnctl::{
    equilibrium_cost, simulate, validate, CostFunction, CostParams, FluidPolicy, FluidState,
    InterventionPolicy, PolicySpec, Region, Scenario, SimConfig,
};

fn cost_strategy() -> impl Strategy<Value = CostFunction> {
    prop_oneof![
        (0.01f64..3.0).prop_map(|m| CostFunction::linear(m, 0.1, 0.2)),
        (0.01f64..3.0).prop_map(|m| CostFunction::quadratic(m, 0.1, 0.2)),
        (0.11f64..0.19, 0.0f64..20.0, 0.0f64..20.0).prop_map(|(mid, s_hi, extra)| {
            // steeper on the left keeps the function convex
            let s_lo = s_hi + extra;
            let c_mid = s_hi * (0.2 - mid);
            CostFunction::piecewise(vec![(0.1, c_mid + s_lo * (mid - 0.1)), (mid, c_mid), (0.2, 0.0)]).unwrap()
        }),
    ]
}

fn fluid_policy() -> &'static FluidPolicy {
    static POLICY: OnceLock<FluidPolicy> = OnceLock::new();
    POLICY.get_or_init(|| quadratic(0.5, 0.25).build_fluid_policy().unwrap())
}

fn scenarios() -> &'static [Scenario; 3] {
    static SC: OnceLock<[Scenario; 3]> = OnceLock::new();
    SC.get_or_init(|| [quadratic(0.5, 0.25), linear(0.5, 0.25), piecewise()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn costs_are_decreasing_and_convex(c in cost_strategy(), a in 0.1f64..=0.2, b in 0.1f64..=0.2) {
        let (p1, p2) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(c.eval(p1) >= c.eval(p2) - 1e-12);
        let (_, up1) = c.subgradient(p1).unwrap();
        let (lo2, _) = c.subgradient(p2).unwrap();
        if p1 < p2 {
            prop_assert!(up1 <= lo2 + 1e-9);
        }
        prop_assert_eq!(c.eval(0.2), 0.0);
    }

    #[test]
    fn stability_bound_decides_validation(lambda in 1.0f64..20.0) {
        let mut sys = baseline_system();
        sys.lambda_bar = lambda;
        let res = validate(sys, CostParams { h: 0.25, r: 1.0, intervention: CostFunction::quadratic(0.5, 0.1, 0.2) });
        // mu N (1 - p_u) = 10
        prop_assert_eq!(res.is_ok(), lambda < 10.0);
    }

    #[test]
    fn long_run_cost_is_unimodal(c in cost_strategy(), lambda in 8.0f64..9.9) {
        let sc = Scenario::new({
            let mut s = quadratic(0.5, 0.25).spec().clone();
            s.lambda = lambda;
            s
        }).unwrap();
        let m = validate(*sc.model().system(), CostParams { intervention: c, ..sc.model().costs().clone() }).unwrap();
        let js: Vec<f64> = (0..=400).map(|i| equilibrium_cost(&m, 0.1 + 0.1 * i as f64 / 400.0).unwrap()).collect();
        // flat steps carry no sign
        let signs: Vec<bool> = js
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|d| d.abs() > 1e-12)
            .map(|d| d > 0.0)
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        // at most one change, and only from decreasing to increasing
        prop_assert!(changes <= 1);
        if changes == 1 {
            prop_assert!(!signs[0]);
        }
    }

    #[test]
    fn costates_dominate_equilibrium_marginals(tau in 0.0f64..200.0) {
        for sc in scenarios() {
            let cp = sc.control_problem();
            let eq = cp.equilibrium();
            let co = cp.costates_backward(tau);
            prop_assert!(co.gamma1 >= eq.psi_x && co.gamma2 >= eq.psi_y);
        }
    }

    #[test]
    fn phi_min_is_nondecreasing_in_tau(t1 in 0.0f64..100.0, t2 in 0.0f64..100.0) {
        let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for sc in scenarios() {
            let cp = sc.control_problem();
            prop_assert!(cp.phi_min(a) <= cp.phi_min(b) + 1e-12);
        }
    }

    #[test]
    fn policy_stays_in_bounds_and_equals_p_inf_on_corner(x in 0.0f64..200.0, y in 0.0f64..200.0) {
        let pol = fluid_policy();
        let m = pol.problem().model();
        let d = pol.query(FluidState::new(x, y));
        prop_assert!(m.p_l() <= d.p && d.p <= m.p_u());
        prop_assert_eq!(d.region, region_of(m, FluidState::new(x, y)));
        if d.region == Region::Absorbing {
            prop_assert_eq!(d.p, pol.problem().equilibrium().p_inf);
        }
    }

    #[test]
    fn regions_follow_their_definitions(x in 0.0f64..150.0, y in 0.0f64..150.0) {
        let m = scenarios()[0].model();
        let s = FluidState::new(x, y);
        let expected = if x > m.servers() {
            Region::Congested
        } else if y <= m.orbit_threshold() {
            Region::Absorbing
        } else {
            Region::OrbitHeavy
        };
        prop_assert_eq!(region_of(m, s), expected);
    }

    #[test]
    fn fluid_masses_stay_nonnegative(x in 0.0f64..150.0, y in 0.0f64..150.0, p in 0.1f64..=0.2) {
        let m = scenarios()[0].model();
        let traj = integrate(m, FluidState::new(x, y), |_, _| p, 30.0, 0.05).unwrap();
        prop_assert!(traj.states.iter().all(|s| s.x >= 0.0 && s.y >= 0.0));
    }

    #[test]
    fn simple_policy_intervenes_exactly_when_queue_is_nonempty(x in 0u64..200, y in 0u64..200) {
        let pol = scenarios()[0].build_policy(PolicySpec::Simple).unwrap();
        let p = pol.choose(x, y);
        if let InterventionPolicy::Simple { p_inf, p_l, .. } = pol {
            prop_assert_eq!(p, if x > 50 { p_l } else { p_inf });
        } else {
            prop_assert!(false, "unexpected policy variant");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_is_reproducible_and_conserves_customers(
        seed in any::<u64>(),
        x0 in 0u64..120,
        y0 in 0u64..120,
        which in 0usize..3,
    ) {
        let sc = &scenarios()[which];
        let pol = sc.build_policy(PolicySpec::Fluid { settings: None }).unwrap();
        let mut cfg = SimConfig::new(20.0, (x0, y0), seed);
        cfg.checkpoints = vec![5.0, 10.0, 20.0];
        let a = simulate(sc, &pol, &cfg).unwrap();
        let b = simulate(sc, &pol, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let l = &a.ledger;
        let lhs = l.arrivals as i64 + l.return_events as i64;
        let rhs = l.completions as i64 + a.final_state.0 as i64 - x0 as i64;
        prop_assert_eq!(lhs, rhs);
        prop_assert!(l.holding >= 0.0 && l.returns >= 0.0 && l.intervention >= 0.0);
        // cumulative snapshots grow and end at the full-run ledger
        for w in a.snapshots.windows(2) {
            prop_assert!(w[1].total() >= w[0].total() && w[1].completions >= w[0].completions);
        }
        prop_assert_eq!(a.snapshots.last().unwrap(), l);
    }
}
