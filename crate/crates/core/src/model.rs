//! System and cost parameters of the controlled Erlang-R queue.
//!
//! A [`Model`] can only be obtained through [`validate`], so every downstream
//! computation may assume the standing assumptions hold: `0 < p_l < p_u < 1`,
//! `p_u < 1 - λ/(μN)`, and a convex, non-negative, non-increasing intervention
//! cost with `C(p_u) = 0`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ModelError;

/// Absolute slack used when checking that a probability lies in the cost domain.
const DOMAIN_EPS: f64 = 1e-12;

/// Arrival, service, return and capacity parameters. Units are days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Exogenous (average) arrival rate, customers per day.
    pub lambda_bar: f64,
    /// Service rate per busy server.
    pub mu: f64,
    /// Return rate of a Content customer.
    pub nu: f64,
    pub n_servers: u32,
    pub p_l: f64,
    pub p_u: f64,
}

impl SystemParams {
    pub fn servers(&self) -> f64 {
        f64::from(self.n_servers)
    }

    /// Largest return probability for which the fluid model is stable.
    pub fn stability_bound(&self) -> f64 {
        1.0 - self.lambda_bar / (self.mu * self.servers())
    }

    /// Height `(μN - λ)/ν` of the empty-queue corner region.
    pub fn orbit_threshold(&self) -> f64 {
        (self.mu * self.servers() - self.lambda_bar) / self.nu
    }
}

/// Shape of the intervention cost on `[p_l, p_u]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CostShape {
    /// `C(p) = M (p_u - p)/(p_u - p_l)`.
    Linear { m: f64 },
    /// Linear interpolation of `(p, cost)` knots sorted by `p`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `C(p) = M ((p_u - p)/(p_u - p_l))^2`.
    Quadratic { m: f64 },
}

/// Convex, non-increasing intervention cost `C(p)` on a probability interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    shape: CostShape,
    p_l: f64,
    p_u: f64,
    /// Segment slopes for piecewise-linear shapes (empty otherwise).
    slopes: Vec<f64>,
}

impl CostFunction {
    pub fn linear(m: f64, p_l: f64, p_u: f64) -> Self {
        Self {
            shape: CostShape::Linear { m },
            p_l,
            p_u,
            slopes: Vec::new(),
        }
    }

    pub fn quadratic(m: f64, p_l: f64, p_u: f64) -> Self {
        Self {
            shape: CostShape::Quadratic { m },
            p_l,
            p_u,
            slopes: Vec::new(),
        }
    }

    /// Builds a piecewise-linear cost; knots must be strictly increasing in `p`
    /// and the interpolant convex (non-decreasing slopes).
    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if knots.len() < 2 {
            return Err(ModelError::NonConvexCost(
                "piecewise-linear cost needs at least two knots".into(),
            ));
        }
        if knots.iter().any(|&(p, c)| !p.is_finite() || !c.is_finite()) {
            return Err(ModelError::NonConvexCost("non-finite knot".into()));
        }
        let mut slopes = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let (p0, c0) = w[0];
            let (p1, c1) = w[1];
            if p1 <= p0 {
                return Err(ModelError::NonConvexCost(format!(
                    "knots not strictly increasing at p = {p1}"
                )));
            }
            slopes.push((c1 - c0) / (p1 - p0));
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] < w[0] - 1e-12 * w[0].abs().max(1.0) {
                return Err(ModelError::NonConvexCost(format!(
                    "slope decreases at knot p = {} ({} then {})",
                    knots[i + 1].0,
                    w[0],
                    w[1]
                )));
            }
        }
        let p_l = knots[0].0;
        let p_u = knots[knots.len() - 1].0;
        Ok(Self {
            shape: CostShape::PiecewiseLinear { knots },
            p_l,
            p_u,
            slopes,
        })
    }

    pub fn shape(&self) -> &CostShape {
        &self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.p_l, self.p_u)
    }

    pub fn is_linear(&self) -> bool {
        match &self.shape {
            CostShape::Linear { .. } => true,
            CostShape::PiecewiseLinear { .. } => self.slopes.len() == 1,
            CostShape::Quadratic { .. } => false,
        }
    }

    /// Breakpoints of the cost, including both domain endpoints. Smooth shapes
    /// report only the endpoints.
    pub fn knots(&self) -> Vec<f64> {
        match &self.shape {
            CostShape::PiecewiseLinear { knots } => knots.iter().map(|k| k.0).collect(),
            _ => vec![self.p_l, self.p_u],
        }
    }

    /// Slopes of the linear pieces (one entry for `Linear`, none for `Quadratic`).
    pub fn piece_slopes(&self) -> Vec<f64> {
        match &self.shape {
            CostShape::Linear { m } => vec![-m / (self.p_u - self.p_l)],
            CostShape::PiecewiseLinear { .. } => self.slopes.clone(),
            CostShape::Quadratic { .. } => Vec::new(),
        }
    }

    fn check_domain(&self, p: f64) -> Result<(), ModelError> {
        if p.is_nan() || p < self.p_l - DOMAIN_EPS || p > self.p_u + DOMAIN_EPS {
            return Err(ModelError::OutOfDomain {
                p,
                p_l: self.p_l,
                p_u: self.p_u,
            });
        }
        Ok(())
    }

    /// `C(p)`, rejecting probabilities outside the domain.
    pub fn value(&self, p: f64) -> Result<f64, ModelError> {
        self.check_domain(p)?;
        Ok(self.eval(p))
    }

    /// `C(p)` with `p` clamped into the domain. `C(p_u)` is exactly zero for the
    /// parametric shapes.
    pub fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(self.p_l, self.p_u);
        match &self.shape {
            CostShape::Linear { m } => m * (self.p_u - p) / (self.p_u - self.p_l),
            CostShape::Quadratic { m } => {
                let d = (self.p_u - p) / (self.p_u - self.p_l);
                m * d * d
            }
            CostShape::PiecewiseLinear { knots } => {
                let i = self.segment_of(knots, p);
                let (p0, c0) = knots[i];
                c0 + self.slopes[i] * (p - p0)
            }
        }
    }

    fn segment_of(&self, knots: &[(f64, f64)], p: f64) -> usize {
        let last = knots.len() - 2;
        (0..=last)
            .find(|&i| p <= knots[i + 1].0)
            .unwrap_or(last)
    }

    /// Subgradient interval `[left slope, right slope]` at `p`. Differentiable
    /// points give a degenerate interval; domain endpoints use the one-sided slope.
    pub fn subgradient(&self, p: f64) -> Result<(f64, f64), ModelError> {
        self.check_domain(p)?;
        let p = p.clamp(self.p_l, self.p_u);
        Ok(match &self.shape {
            CostShape::Linear { m } => {
                let s = -m / (self.p_u - self.p_l);
                (s, s)
            }
            CostShape::Quadratic { m } => {
                let w = self.p_u - self.p_l;
                let s = -2.0 * m * (self.p_u - p) / (w * w);
                (s, s)
            }
            CostShape::PiecewiseLinear { knots } => {
                let scale = (self.p_u - self.p_l).max(1.0);
                for i in 1..knots.len() - 1 {
                    if (p - knots[i].0).abs() <= DOMAIN_EPS * scale {
                        return Ok((self.slopes[i - 1], self.slopes[i]));
                    }
                }
                let s = self.slopes[self.segment_of(knots, p)];
                (s, s)
            }
        })
    }

    /// Derivative for smooth points; the left slope at kinks.
    pub fn derivative(&self, p: f64) -> f64 {
        let p = p.clamp(self.p_l, self.p_u);
        self.subgradient(p).map(|(lo, _)| lo).unwrap_or(f64::NAN)
    }

    /// Minimizer of `C(p) + γ2 p` over the domain. Flat optimal segments resolve
    /// to their smallest `p`.
    pub fn argmin_phi(&self, gamma2: f64) -> f64 {
        match &self.shape {
            CostShape::Quadratic { m } => {
                if gamma2 <= 0.0 {
                    return self.p_u;
                }
                let w = self.p_u - self.p_l;
                (self.p_u - gamma2 * w * w / (2.0 * m)).clamp(self.p_l, self.p_u)
            }
            CostShape::Linear { m } => {
                if gamma2 - m / (self.p_u - self.p_l) >= 0.0 {
                    self.p_l
                } else {
                    self.p_u
                }
            }
            CostShape::PiecewiseLinear { knots } => {
                // φ is convex piecewise linear; its minimum sits at the left end of
                // the first piece whose φ-slope is non-negative.
                for (i, s) in self.slopes.iter().enumerate() {
                    if s + gamma2 >= 0.0 {
                        return knots[i].0;
                    }
                }
                self.p_u
            }
        }
    }

    /// Every assumption violation of this cost on the interval `[p_l, p_u]`.
    pub fn violations(&self, p_l: f64, p_u: f64) -> Vec<ModelError> {
        let mut out = Vec::new();
        if (self.p_l - p_l).abs() > DOMAIN_EPS || (self.p_u - p_u).abs() > DOMAIN_EPS {
            out.push(ModelError::NonConvexCost(format!(
                "cost domain [{}, {}] does not match return interval [{p_l}, {p_u}]",
                self.p_l, self.p_u
            )));
        }
        match &self.shape {
            CostShape::Linear { m } | CostShape::Quadratic { m } => {
                if !(m.is_finite() && *m >= 0.0) {
                    out.push(ModelError::NonConvexCost(format!(
                        "maximum intervention cost M = {m} must be finite and non-negative"
                    )));
                }
            }
            CostShape::PiecewiseLinear { knots } => {
                let (_, c_last) = knots[knots.len() - 1];
                if c_last.abs() > 1e-12 {
                    out.push(ModelError::NonConvexCost(format!(
                        "C(p_u) must be 0, got {c_last}"
                    )));
                }
                if knots.iter().any(|k| k.1 < 0.0) {
                    out.push(ModelError::NonConvexCost("negative knot cost".into()));
                }
                if self.slopes.iter().any(|&s| s > 0.0) {
                    out.push(ModelError::NonConvexCost(
                        "cost must be non-increasing in p".into(),
                    ));
                }
            }
        }
        out
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            CostShape::Linear { m } => write!(f, "linear(M={m})"),
            CostShape::Quadratic { m } => write!(f, "quadratic(M={m})"),
            CostShape::PiecewiseLinear { knots } => write!(f, "piecewise({} knots)", knots.len()),
        }
    }
}

/// Holding, return and intervention costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Holding cost per queued customer per day.
    pub h: f64,
    /// Cost per return event.
    pub r: f64,
    pub intervention: CostFunction,
}

/// A parameter set that has passed [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    system: SystemParams,
    costs: CostParams,
}

impl Model {
    pub fn system(&self) -> &SystemParams {
        &self.system
    }

    pub fn costs(&self) -> &CostParams {
        &self.costs
    }

    pub fn cost(&self) -> &CostFunction {
        &self.costs.intervention
    }

    pub fn lambda(&self) -> f64 {
        self.system.lambda_bar
    }

    pub fn mu(&self) -> f64 {
        self.system.mu
    }

    pub fn nu(&self) -> f64 {
        self.system.nu
    }

    pub fn servers(&self) -> f64 {
        self.system.servers()
    }

    pub fn p_l(&self) -> f64 {
        self.system.p_l
    }

    pub fn p_u(&self) -> f64 {
        self.system.p_u
    }

    pub fn h(&self) -> f64 {
        self.costs.h
    }

    pub fn r(&self) -> f64 {
        self.costs.r
    }

    pub fn orbit_threshold(&self) -> f64 {
        self.system.orbit_threshold()
    }

    /// Copy with a different holding cost. Holding cost does not enter any
    /// invariant, so no re-validation is needed.
    pub fn with_holding_cost(&self, h: f64) -> Result<Model, Vec<ModelError>> {
        let mut costs = self.costs.clone();
        costs.h = h;
        validate(self.system, costs)
    }
}

/// Checks every standing assumption and reports all violations at once.
pub fn validate(params: SystemParams, costs: CostParams) -> Result<Model, Vec<ModelError>> {
    let mut errors = Vec::new();
    let SystemParams {
        lambda_bar,
        mu,
        nu,
        n_servers,
        p_l,
        p_u,
    } = params;
    for (name, v) in [("lambda", lambda_bar), ("mu", mu), ("nu", nu)] {
        if !(v.is_finite() && v > 0.0) {
            errors.push(ModelError::NonPositiveRate { name, value: v });
        }
    }
    if n_servers == 0 {
        errors.push(ModelError::NoServers);
    }
    let interval_ok = p_l.is_finite() && p_u.is_finite() && 0.0 < p_l && p_l < p_u && p_u < 1.0;
    if !interval_ok {
        errors.push(ModelError::BadProbabilityInterval { p_l, p_u });
    }
    if errors.is_empty() {
        let bound = params.stability_bound();
        if p_u >= bound {
            errors.push(ModelError::Unstable { p_u, bound });
        }
    }
    for (name, v) in [("h", costs.h), ("r", costs.r)] {
        if !(v.is_finite() && v >= 0.0) {
            errors.push(ModelError::NegativeCost { name, value: v });
        }
    }
    if interval_ok {
        errors.extend(costs.intervention.violations(p_l, p_u));
    }
    if errors.is_empty() {
        Ok(Model {
            system: params,
            costs,
        })
    } else {
        Err(errors)
    }
}
