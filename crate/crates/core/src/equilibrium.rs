//! Long-run average optimal constant policy and the induced terminal cost.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::fluid::{equilibrium_point, FluidState};
use crate::model::{CostShape, Model};

/// Bisection tolerance in `p` for strictly convex costs.
const BISECTION_TOL: f64 = 1e-10;

/// Optimal equilibrium of the fluid model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub p_inf: f64,
    pub j_inf: f64,
    pub x_inf: f64,
    pub y_inf: f64,
    /// Marginal terminal cost of a Needy customer, `(r p∞ + C(p∞))/(1 - p∞)`.
    pub psi_x: f64,
    /// Marginal terminal cost of a Content customer, `(r + C(p∞))/(1 - p∞)`.
    pub psi_y: f64,
    /// `C(p∞)`.
    pub c_inf: f64,
    /// Set when the optimum is a whole interval on which `C` is linear.
    pub minimizer_interval: Option<(f64, f64)>,
}

impl EquilibriumSolution {
    /// `Ψ(x, y) = ψ_x x + ψ_y y`.
    pub fn terminal_cost(&self, s: FluidState) -> f64 {
        self.psi_x * s.x + self.psi_y * s.y
    }

    pub fn point(&self) -> FluidState {
        FluidState::new(self.x_inf, self.y_inf)
    }
}

/// `J(p) = λ (r p + C(p)) / (1 - p)`.
pub fn equilibrium_cost(model: &Model, p: f64) -> Result<f64, ModelError> {
    let c = model.cost().value(p)?;
    Ok(model.lambda() * (model.r() * p + c) / (1.0 - p))
}

/// Sign function of `J'`: `q(p) = (1-p)C'(p) + C(p) + r`.
fn q_of(model: &Model, p: f64, slope: f64) -> f64 {
    (1.0 - p) * slope + model.cost().eval(p) + model.r()
}

/// Minimizes `J` using the sign of `q`, which is non-decreasing for convex `C`.
pub fn solve_equilibrium(model: &Model) -> EquilibriumSolution {
    let (p_l, p_u) = (model.p_l(), model.p_u());
    let cost = model.cost();
    let (p_inf, interval) = match cost.shape() {
        CostShape::Quadratic { .. } => {
            let q = |p: f64| q_of(model, p, cost.derivative(p));
            if q(p_l) >= 0.0 {
                (p_l, None)
            } else if q(p_u) <= 0.0 {
                (p_u, None)
            } else {
                let (mut lo, mut hi) = (p_l, p_u);
                while hi - lo > BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if q(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi), None)
            }
        }
        CostShape::Linear { .. } | CostShape::PiecewiseLinear { .. } => {
            // q is constant on each linear piece and jumps up at knots.
            let knots = cost.knots();
            let slopes = cost.piece_slopes();
            let qs: Vec<f64> = slopes
                .iter()
                .enumerate()
                .map(|(i, &s)| q_of(model, knots[i], s))
                .collect();
            let flat_tol = 1e-12 * (model.r() + cost.eval(p_l)).max(1.0);
            if let Some(j) = qs.iter().position(|q| q.abs() <= flat_tol) {
                let (a, b) = (knots[j], knots[j + 1]);
                (0.5 * (a + b), Some((a, b)))
            } else if qs[0] > 0.0 {
                (p_l, None)
            } else if qs[qs.len() - 1] < 0.0 {
                (p_u, None)
            } else {
                let j = qs.iter().position(|&q| q > 0.0).expect("sign change exists");
                (knots[j], None)
            }
        }
    };
    let c_inf = cost.eval(p_inf);
    let r = model.r();
    let psi_x = (r * p_inf + c_inf) / (1.0 - p_inf);
    let psi_y = (r + c_inf) / (1.0 - p_inf);
    let point = equilibrium_point(model, p_inf).expect("validated model is stable at p_inf");
    EquilibriumSolution {
        p_inf,
        j_inf: model.lambda() * psi_x,
        x_inf: point.x,
        y_inf: point.y,
        psi_x,
        psi_y,
        c_inf,
        minimizer_interval: interval,
    }
}
