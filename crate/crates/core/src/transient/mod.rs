//! Bias-optimal transient fluid policy.
//!
//! Inside the congested region the costates have closed forms as functions of
//! the remaining queue-clearing time `τ`, and the states sharing a `τ` lie on a
//! line `x + (1 - e^{-ντ}) y = a(τ)`. Outside of it the policy is recovered
//! numerically by integrating the joint state/costate system backward from the
//! boundary of the absorbing corner.

mod contour;
mod nearest;
mod policy;
mod shooting;

pub use contour::{ContourLine, ContourTable, TauSpacing};
pub use policy::{FluidPolicy, PolicyDecision, PolicySettings};
pub use shooting::{boundary_anchors, ShotSample, ShotTrajectory, ShootSettings};

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, EquilibriumSolution};
use crate::fluid::FluidState;
use crate::model::{CostFunction, Model};

/// Adjoint vector: marginal future cost of one Needy (`gamma1`) and one
/// Content (`gamma2`) customer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costate {
    pub gamma1: f64,
    pub gamma2: f64,
}

/// `e^{-u} + u - 1`, accurate for small `u`.
pub(crate) fn exp_excess(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        // u^2/2 - u^3/6 + u^4/24 - ...
        let mut term = u * u / 2.0;
        let mut sum = 0.0_f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            k += 1.0;
            term *= -u / k;
        }
        sum
    } else {
        (-u).exp_m1() + u
    }
}

/// A validated model together with its optimal equilibrium; entry point for all
/// transient computations.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    model: Model,
    eq: EquilibriumSolution,
}

impl ControlProblem {
    pub fn new(model: Model) -> Self {
        let eq = solve_equilibrium(&model);
        Self { model, eq }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn equilibrium(&self) -> &EquilibriumSolution {
        &self.eq
    }

    pub fn cost(&self) -> &CostFunction {
        self.model.cost()
    }

    /// Costates a clearing time `tau` before the queue empties.
    pub fn costates_backward(&self, tau: f64) -> Costate {
        let h = self.model.h();
        let nu = self.model.nu();
        Costate {
            gamma1: h * tau + self.eq.psi_x,
            gamma2: h / nu * exp_excess(nu * tau) + self.eq.psi_y,
        }
    }

    /// Minimizer of `C(p) + γ2 p` over `[p_l, p_u]`.
    pub fn argmin_phi(&self, gamma2: f64) -> f64 {
        self.model.cost().argmin_phi(gamma2)
    }

    /// Optimal return probability at clearing time `tau`; `p∞` at `tau = 0`.
    pub fn p_star(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            self.eq.p_inf
        } else {
            self.argmin_phi(self.costates_backward(tau).gamma2)
        }
    }

    /// `min_p C(p) + Γ2(τ) p`.
    pub fn phi_min(&self, tau: f64) -> f64 {
        let p = self.p_star(tau);
        self.model.cost().eval(p) + self.costates_backward(tau).gamma2 * p
    }

    /// `min_p φ - ψ_x`, evaluated so that it is exactly zero at `tau = 0`.
    fn phi_excess(&self, tau: f64) -> f64 {
        let p = self.p_star(tau);
        let c = self.model.cost();
        let nu = self.model.nu();
        (c.eval(p) - self.eq.c_inf)
            + self.eq.psi_y * (p - self.eq.p_inf)
            + self.model.h() / nu * exp_excess(nu * tau) * p
    }

    /// Pontryagin Hamiltonian at stationary arrivals.
    pub fn hamiltonian(&self, s: FluidState, p: f64, co: Costate) -> f64 {
        let m = &self.model;
        let n = m.servers();
        let busy = s.x.min(n);
        m.h() * (s.x - n).max(0.0) + m.r() * m.nu() * s.y + m.cost().eval(p) * m.mu() * busy
            - self.eq.j_inf
            + (m.lambda() + m.nu() * s.y - m.mu() * busy) * co.gamma1
            + (-m.nu() * s.y + m.mu() * p * busy) * co.gamma2
    }

    /// Contour of congested states whose optimal clearing time is `tau`,
    /// normalized to `x + slope_coeff * y = a`. Requires `h > 0`.
    pub fn contour_line(&self, tau: f64) -> ContourLine {
        let m = &self.model;
        let nu = m.nu();
        let n = m.servers();
        let mu_n = m.mu() * n;
        let slope_coeff = -(-nu * tau).exp_m1();
        let excess = (mu_n - m.lambda()) * tau - mu_n * self.phi_excess(tau) / m.h();
        let y_at_capacity = if tau > 0.0 {
            excess / slope_coeff
        } else {
            m.orbit_threshold()
        };
        ContourLine {
            tau,
            slope_coeff,
            a: n + excess,
            p_star: self.p_star(tau),
            excess,
            y_at_capacity,
        }
    }

    /// Signed distance-like residual `x + (1 - e^{-ντ}) y - a(τ)`; zero exactly on
    /// the contour, positive when the state needs longer than `tau` to clear.
    pub fn line_residual(&self, s: FluidState, tau: f64) -> f64 {
        let line = self.contour_line(tau);
        (s.x - self.model.servers()) + line.slope_coeff * s.y - line.excess
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, CostFunction, CostParams, SystemParams};

    pub(crate) fn problem(c: CostFunction) -> ControlProblem {
        ControlProblem::new(
            validate(
                SystemParams {
                    lambda_bar: 9.5,
                    mu: 0.25,
                    nu: 1.0 / 15.0,
                    n_servers: 50,
                    p_l: 0.1,
                    p_u: 0.2,
                },
                CostParams {
                    h: 0.25,
                    r: 1.0,
                    intervention: c,
                },
            )
            .unwrap(),
        )
    }

    #[test]
    fn exp_excess_is_continuous_across_branches() {
        for u in [1e-8_f64, 1e-5, 1e-4] {
            let taylor = u * u / 2.0 - u * u * u / 6.0 + u.powi(4) / 24.0;
            assert!((exp_excess(u) - taylor).abs() <= 1e-12 * taylor, "u={u}");
        }
        for u in [0.009_999_f64, 0.010_001, 0.5, 3.0] {
            let direct = (-u).exp() + u - 1.0;
            assert!((exp_excess(u) - direct).abs() <= 1e-10 * direct, "u={u}");
        }
        assert_eq!(exp_excess(0.0), 0.0);
    }

    #[test]
    fn costates_at_zero_are_equilibrium_marginals() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let co = cp.costates_backward(0.0);
        assert!((co.gamma1 - 0.24038).abs() < 1e-4);
        assert!((co.gamma2 - 1.24038).abs() < 1e-4);
        let d = cp.costates_backward(7.3).gamma1 - co.gamma1;
        assert!((d - 0.25 * 7.3).abs() < 1e-12);
    }

    #[test]
    fn costates_match_backward_ode_integration() {
        // independent oracle: integrate dΓ1/ds = h, dΓ2/ds = -ν(-Γ1 + Γ2 - r)
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let eq = *cp.equilibrium();
        let (h, nu, r) = (0.25, 1.0 / 15.0, 1.0);
        let mut z = [eq.psi_x, eq.psi_y];
        let ds = 1e-3;
        let mut f = |_s: f64, v: &[f64; 2]| [h, -nu * (-v[0] + v[1] - r)];
        for i in 0..10_000 {
            z = crate::ode::rk4_step(&mut f, i as f64 * ds, &z, ds);
        }
        let co = cp.costates_backward(10.0);
        assert!((co.gamma1 - z[0]).abs() < 1e-9);
        assert!((co.gamma2 - z[1]).abs() < 1e-9);
        assert!((co.gamma2 - 1.9157).abs() < 1e-3);
    }

    #[test]
    fn zero_tau_contour_is_capacity_line() {
        for c in [
            CostFunction::quadratic(0.5, 0.1, 0.2),
            CostFunction::linear(0.5, 0.1, 0.2),
            CostFunction::piecewise(vec![(0.1, 0.5), (0.15, 0.1), (0.2, 0.0)]).unwrap(),
        ] {
            let line = problem(c).contour_line(0.0);
            assert_eq!(line.a, 50.0);
            assert_eq!(line.slope_coeff, 0.0);
        }
    }

    #[test]
    fn hamiltonian_vanishes_at_equilibrium() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let eq = *cp.equilibrium();
        let h = cp.hamiltonian(eq.point(), eq.p_inf, cp.costates_backward(0.0));
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_zero_on_contours_and_minimized_by_p_star() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        for tau in [0.5, 3.0, 12.0, 40.0] {
            let line = cp.contour_line(tau);
            let y = 20.0;
            let s = FluidState::new(line.a - line.slope_coeff * y, y);
            let co = cp.costates_backward(tau);
            let h0 = cp.hamiltonian(s, line.p_star, co);
            assert!(h0.abs() < 1e-9 * cp.equilibrium().j_inf, "tau={tau}, H={h0}");
            for dp in [-0.01, 0.01] {
                let p = (line.p_star + dp).clamp(0.1, 0.2);
                if p != line.p_star {
                    assert!(cp.hamiltonian(s, p, co) > h0);
                }
            }
        }
    }
}
