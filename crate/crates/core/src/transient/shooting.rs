use serde::{Deserialize, Serialize};

use super::{ControlProblem, Costate};
use crate::error::FluidError;
use crate::fluid::FluidState;
use crate::ode::rk4_step;

/// Sub-steps used for a step that crosses `x = N`.
const SWITCH_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootSettings {
    /// Backward integration horizon in days.
    pub horizon: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the anchor is always kept).
    pub record_every: usize,
    /// Stop once `x` exceeds this multiple of `N`.
    pub x_cap_factor: f64,
}

impl Default for ShootSettings {
    fn default() -> Self {
        Self {
            horizon: 60.0,
            dt: 0.01,
            record_every: 1,
            x_cap_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSample {
    /// Time before reaching the anchor.
    pub s: f64,
    pub state: FluidState,
    pub costate: Costate,
    pub p: f64,
}

/// Optimal trajectory traced backward from a point on the boundary of A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotTrajectory {
    pub anchor: FluidState,
    /// Samples in order of increasing backward time; `samples[0]` is the anchor.
    pub samples: Vec<ShotSample>,
}

/// `n` anchors spread uniformly in arc length along the boundary of A, measured
/// in coordinates scaled by `N` and the orbit threshold. The path runs from
/// `(N, 0)` up to the corner and then left to `(0, threshold)`.
pub fn boundary_anchors(cp: &ControlProblem, n: usize) -> Vec<FluidState> {
    let m = cp.model();
    let cap = m.servers();
    let thr = m.orbit_threshold();
    (0..n)
        .map(|k| {
            let l = if n == 1 { 0.0 } else { 2.0 * k as f64 / (n - 1) as f64 };
            if l <= 1.0 {
                FluidState::new(cap, l * thr)
            } else {
                FluidState::new((2.0 - l) * cap, thr)
            }
        })
        .collect()
}

impl ControlProblem {
    /// Forward-time right-hand side of the joint state/costate system with the
    /// Hamiltonian-minimizing control. `congested` selects the `γ1` regime.
    fn joint_rhs(&self, z: &[f64; 4], congested: bool) -> [f64; 4] {
        let m = self.model();
        let n = m.servers();
        let (x, y, g1, g2) = (z[0].max(0.0), z[1].max(0.0), z[2], z[3]);
        let p = self.argmin_phi(g2);
        let busy = x.min(n);
        let dx = m.lambda() + m.nu() * y - m.mu() * busy;
        let dy = -m.nu() * y + m.mu() * p * busy;
        let dg1 = if congested {
            -m.h()
        } else {
            m.mu() * (g1 - p * g2 - m.cost().eval(p))
        };
        let dg2 = m.nu() * (-g1 + g2 - m.r());
        [dx, dy, dg1, dg2]
    }

    /// Regime for a backward step from `z`; on `x = N` it follows the direction of travel.
    fn backward_regime(&self, z: &[f64; 4]) -> bool {
        let m = self.model();
        let n = m.servers();
        z[0] > n || (z[0] == n && m.lambda() + m.nu() * z[1] - m.mu() * n < 0.0)
    }

    /// One RK4 step of the time-reversed system with the `γ1` regime frozen; a
    /// step that changes regime is redone on a finer sub-grid.
    fn backward_step(&self, z: &[f64; 4], s: f64, dt: f64) -> [f64; 4] {
        let single = |z: &[f64; 4], s: f64, dt: f64| {
            let congested = self.backward_regime(z);
            let mut back = |_s: f64, v: &[f64; 4]| {
                let f = self.joint_rhs(v, congested);
                [-f[0], -f[1], -f[2], -f[3]]
            };
            rk4_step(&mut back, s, z, dt)
        };
        let next = single(z, s, dt);
        if self.backward_regime(&next) == self.backward_regime(z) {
            return next;
        }
        let h = dt / SWITCH_SUBSTEPS as f64;
        let mut w = *z;
        for k in 0..SWITCH_SUBSTEPS {
            w = single(&w, s + k as f64 * h, h);
        }
        w
    }

    /// Integrates the state and costates backward in time from `anchor`, starting
    /// from the equilibrium costates. Stops at the horizon, before a mass turns negative,
    /// or when `x` passes the cap.
    pub fn shoot_from_boundary(
        &self,
        anchor: FluidState,
        settings: &ShootSettings,
    ) -> Result<ShotTrajectory, FluidError> {
        if !(settings.horizon > 0.0 && settings.dt > 0.0 && settings.record_every >= 1) {
            return Err(FluidError::BadSettings(format!("{settings:?}")));
        }
        let eq = self.equilibrium();
        let x_cap = settings.x_cap_factor * self.model().servers();
        let mut z = [anchor.x, anchor.y, eq.psi_x, eq.psi_y];
        let sample = |s: f64, z: &[f64; 4], p: f64| ShotSample {
            s,
            state: FluidState::new(z[0], z[1]),
            costate: Costate {
                gamma1: z[2],
                gamma2: z[3],
            },
            p,
        };
        let mut samples = vec![sample(0.0, &z, eq.p_inf)];
        let steps = (settings.horizon / settings.dt).round().max(1.0) as usize;
        let mut prev = (0.0, z, true);
        for i in 1..=steps {
            let s = i as f64 * settings.dt;
            let next = self.backward_step(&z, s - settings.dt, settings.dt);
            if !next.iter().all(|v| v.is_finite()) {
                return Err(FluidError::NonFiniteState { t: -s });
            }
            if next[0] < 0.0 || next[1] < 0.0 {
                // a mass would turn negative: end on the last admissible state
                let (ps, pz, recorded) = prev;
                if !recorded {
                    samples.push(sample(ps, &pz, self.argmin_phi(pz[3])));
                }
                break;
            }
            z = next;
            let stop = z[0] > x_cap || i == steps;
            let record = i % settings.record_every == 0 || stop;
            if record {
                samples.push(sample(s, &z, self.argmin_phi(z[3])));
            }
            prev = (s, z, record);
            if stop {
                break;
            }
        }
        Ok(ShotTrajectory { anchor, samples })
    }
}
