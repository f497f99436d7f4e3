//! Deterministic fluid dynamics of the Needy/Content populations.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::FluidError;
use crate::model::Model;
use crate::ode::rk4_step;

/// Default integration step, in days.
pub const DEFAULT_DT: f64 = 0.01;

/// Fluid mass of Needy (`x`) and Content (`y`) customers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub x: f64,
    pub y: f64,
}

impl FluidState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.x >= 0.0 && self.y >= 0.0
    }
}

/// Partition of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `C`: queue non-empty, `x > N`.
    Congested,
    /// `A`: `x <= N` and `y <= (μN - λ)/ν`. Closed on both boundaries.
    Absorbing,
    /// `N`: empty queue but an orbit large enough to congest the system later.
    OrbitHeavy,
}

impl Region {
    pub fn tag(self) -> char {
        match self {
            Region::Congested => 'C',
            Region::Absorbing => 'A',
            Region::OrbitHeavy => 'N',
        }
    }
}

pub fn region_of(model: &Model, s: FluidState) -> Region {
    if s.x > model.servers() {
        Region::Congested
    } else if s.y <= model.orbit_threshold() {
        Region::Absorbing
    } else {
        Region::OrbitHeavy
    }
}

/// Right-hand side `(dx/dt, dy/dt)` at arrival rate `lambda_t` and return
/// probability `p`.
pub fn fluid_rhs(model: &Model, s: FluidState, p: f64, lambda_t: f64) -> (f64, f64) {
    let busy = s.x.min(model.servers());
    let served = model.mu() * busy;
    let returning = model.nu() * s.y;
    (lambda_t + returning - served, -returning + p * served)
}

/// Fixed point of the dynamics under a constant return probability `p`.
pub fn equilibrium_point(model: &Model, p: f64) -> Result<FluidState, FluidError> {
    let bound = model.system().stability_bound();
    if !(p < bound) {
        return Err(FluidError::UnstableProbability { p, bound });
    }
    let lambda = model.lambda();
    Ok(FluidState::new(
        lambda / (model.mu() * (1.0 - p)),
        lambda * p / (model.nu() * (1.0 - p)),
    ))
}

/// Upper bound on the time to reach region A from `s0` under any admissible
/// policy (stationary arrivals).
pub fn entry_time_bound(model: &Model, s0: FluidState) -> f64 {
    let n = model.servers();
    let lambda = model.lambda();
    let thr = model.orbit_threshold();
    let y_hat_inf = model.mu() * n * model.p_u() / model.nu();
    let t1 = if s0.y <= thr {
        0.0
    } else {
        ((s0.y - y_hat_inf) / (thr - y_hat_inf)).ln() / model.nu()
    };
    t1 + (s0.x + s0.y + lambda * t1) / (model.mu() * n * (1.0 - model.p_u()) - lambda) + 1.0
}

/// A uniformly sampled fluid path with the return probability applied on each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<FluidState>,
    /// `p` in force at each sample (the last entry repeats the final query).
    pub policy: Vec<f64>,
}

impl FluidTrajectory {
    pub fn last(&self) -> FluidState {
        *self.states.last().expect("trajectory has at least one state")
    }

    /// Linear interpolation of the state at time `t` (clamped to the horizon).
    pub fn state_at(&self, t: f64) -> FluidState {
        let tmax = *self.times.last().unwrap();
        let t = t.clamp(0.0, tmax);
        let i = ((t / self.dt).floor() as usize).min(self.states.len() - 1);
        if i + 1 >= self.states.len() {
            return self.states[i];
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let (a, b) = (self.states[i], self.states[i + 1]);
        FluidState::new(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y))
    }

    /// First sample time at which the path is in `region`.
    pub fn first_time_in(&self, model: &Model, region: Region) -> Option<f64> {
        self.states
            .iter()
            .position(|&s| region_of(model, s) == region)
            .map(|i| self.times[i])
    }

    /// First time `x` drops to `level` or below, linearly interpolated between samples.
    pub fn first_time_x_below(&self, level: f64) -> Option<f64> {
        if self.states[0].x <= level {
            return Some(self.times[0]);
        }
        for i in 1..self.states.len() {
            let (a, b) = (self.states[i - 1].x, self.states[i].x);
            if b <= level {
                let w = (a - level) / (a - b);
                return Some(self.times[i - 1] + w * (self.times[i] - self.times[i - 1]));
            }
        }
        None
    }

    /// Writes `t,x,y,p` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y,p")?;
        for ((t, s), p) in self.times.iter().zip(&self.states).zip(&self.policy) {
            writeln!(w, "{t},{},{},{p}", s.x, s.y)?;
        }
        Ok(())
    }
}

/// Integrates the stationary-arrival fluid model under a state/time feedback policy.
pub fn integrate<P>(
    model: &Model,
    s0: FluidState,
    policy: P,
    horizon: f64,
    dt: f64,
) -> Result<FluidTrajectory, FluidError>
where
    P: FnMut(FluidState, f64) -> f64,
{
    let lambda = model.lambda();
    integrate_with_rate(model, s0, policy, |_| lambda, horizon, dt)
}

/// Fixed-step RK4 integration with a time-varying arrival rate. Masses are
/// clamped at zero after every step.
pub fn integrate_with_rate<P, L>(
    model: &Model,
    s0: FluidState,
    mut policy: P,
    arrival_rate: L,
    horizon: f64,
    dt: f64,
) -> Result<FluidTrajectory, FluidError>
where
    P: FnMut(FluidState, f64) -> f64,
    L: Fn(f64) -> f64,
{
    if !(horizon > 0.0 && dt > 0.0 && horizon.is_finite()) {
        return Err(FluidError::BadSettings(format!(
            "need horizon > 0 and dt > 0, got T = {horizon}, dt = {dt}"
        )));
    }
    if !s0.is_valid() {
        return Err(FluidError::NonFiniteState { t: 0.0 });
    }
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut applied = Vec::with_capacity(steps + 1);
    let (p_l, p_u) = (model.p_l(), model.p_u());
    let mut z = [s0.x, s0.y];
    let mut t = 0.0;
    times.push(t);
    states.push(s0);
    for i in 0..steps {
        let h = if i + 1 == steps { horizon - t } else { dt };
        applied.push(policy(FluidState::new(z[0], z[1]), t).clamp(p_l, p_u));
        let mut rhs = |tt: f64, v: &[f64; 2]| {
            let s = FluidState::new(v[0].max(0.0), v[1].max(0.0));
            let p = policy(s, tt).clamp(p_l, p_u);
            let (dx, dy) = fluid_rhs(model, s, p, arrival_rate(tt));
            [dx, dy]
        };
        z = rk4_step(&mut rhs, t, &z, h);
        z[0] = z[0].max(0.0);
        z[1] = z[1].max(0.0);
        t = if i + 1 == steps {
            horizon
        } else {
            (i + 1) as f64 * dt
        };
        if !(z[0].is_finite() && z[1].is_finite()) {
            return Err(FluidError::NonFiniteState { t });
        }
        times.push(t);
        states.push(FluidState::new(z[0], z[1]));
    }
    let last = FluidState::new(z[0], z[1]);
    applied.push(policy(last, t).clamp(p_l, p_u));
    Ok(FluidTrajectory {
        dt,
        times,
        states,
        policy: applied,
    })
}

/// Running fluid cost rate `h(x-N)^+ + rνy + C(p)μ(x∧N)`.
pub fn running_cost(model: &Model, s: FluidState, p: f64) -> f64 {
    let n = model.servers();
    model.h() * (s.x - n).max(0.0)
        + model.r() * model.nu() * s.y
        + model.cost().eval(p) * model.mu() * s.x.min(n)
}

/// Trapezoidal integral of the running cost along a trajectory.
pub fn accumulated_cost(model: &Model, traj: &FluidTrajectory) -> f64 {
    let mut total = 0.0;
    for i in 1..traj.states.len() {
        let w = traj.times[i] - traj.times[i - 1];
        let p = traj.policy[i - 1];
        total += 0.5
            * w
            * (running_cost(model, traj.states[i - 1], p) + running_cost(model, traj.states[i], p));
    }
    total
}
