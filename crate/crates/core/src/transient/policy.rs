use std::sync::OnceLock;

use log::debug;
use serde::{Deserialize, Serialize};

use super::contour::{ContourTable, TauSpacing};
use super::nearest::NearestIndex;
use super::shooting::{boundary_anchors, ShootSettings};
use super::ControlProblem;
use crate::error::FluidError;
use crate::fluid::{region_of, FluidState, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySettings {
    pub n_lines: usize,
    /// Initial table extent; queries beyond it extend by doubling.
    pub tau_max: f64,
    pub spacing: TauSpacing,
    pub n_anchors: usize,
    pub shoot: ShootSettings,
    /// Integer states cached for simulation cover `[0, k N] x [0, k N]`.
    pub lattice_factor: f64,
}

impl Default for PolicySettings {
    fn default() -> Self {
        Self {
            n_lines: 2000,
            tau_max: 50.0,
            spacing: TauSpacing::Geometric,
            n_anchors: 200,
            shoot: ShootSettings {
                record_every: 10,
                ..ShootSettings::default()
            },
            lattice_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub p: f64,
    pub region: Region,
    /// Clearing time, set in the congested region.
    pub tau: Option<f64>,
}

/// State-feedback fluid policy: `p∞` on A, contour lines on C, and
/// nearest-sample lookup over backward shots on N.
#[derive(Debug)]
pub struct FluidPolicy {
    cp: ControlProblem,
    settings: PolicySettings,
    table: Option<ContourTable>,
    shots: Option<NearestIndex>,
    scale: [f64; 2],
    lattice_dims: [usize; 2],
    lattice: Vec<OnceLock<f64>>,
}

impl FluidPolicy {
    /// With `h = 0` there is no congestion penalty and the policy is `p∞` everywhere.
    pub fn build(cp: ControlProblem, settings: PolicySettings) -> Result<Self, FluidError> {
        let m = cp.model();
        let thr = m.orbit_threshold();
        let scale = [1.0 / m.servers(), 1.0 / thr];
        let (table, shots) = if m.h() > 0.0 {
            let table =
                ContourTable::build_with(&cp, settings.tau_max, settings.n_lines, settings.spacing)?;
            let mut pts = Vec::new();
            for anchor in boundary_anchors(&cp, settings.n_anchors) {
                let shot = cp.shoot_from_boundary(anchor, &settings.shoot)?;
                pts.extend(
                    shot.samples
                        .iter()
                        .filter(|s| s.state.x <= m.servers())
                        .map(|s| [s.state.x * scale[0], s.state.y * scale[1], s.p]),
                );
            }
            debug!(
                "fluid policy: {} contour lines, {} shot samples",
                table.lines.len(),
                pts.len()
            );
            (Some(table), Some(NearestIndex::new(pts)))
        } else {
            (None, None)
        };
        let side = (settings.lattice_factor * m.servers()).ceil().max(0.0) as usize + 1;
        let lattice_dims = [side, side];
        let lattice = (0..side * side).map(|_| OnceLock::new()).collect();
        Ok(Self {
            cp,
            settings,
            table,
            shots,
            scale,
            lattice_dims,
            lattice,
        })
    }

    pub fn problem(&self) -> &ControlProblem {
        &self.cp
    }

    pub fn settings(&self) -> &PolicySettings {
        &self.settings
    }

    pub fn contour_table(&self) -> Option<&ContourTable> {
        self.table.as_ref()
    }

    pub fn n_shot_samples(&self) -> usize {
        self.shots.as_ref().map_or(0, NearestIndex::len)
    }

    pub fn query(&self, s: FluidState) -> PolicyDecision {
        let region = region_of(self.cp.model(), s);
        let p_inf = self.cp.equilibrium().p_inf;
        let (p, tau) = match (region, &self.table, &self.shots) {
            (Region::Congested, Some(table), _) => {
                let tau = table.tau_for_state(&self.cp, s);
                (self.cp.p_star(tau), Some(tau))
            }
            (Region::OrbitHeavy, _, Some(shots)) => {
                (shots.nearest(s.x * self.scale[0], s.y * self.scale[1]).0, None)
            }
            _ => (p_inf, None),
        };
        PolicyDecision { p, region, tau }
    }

    pub fn p(&self, s: FluidState) -> f64 {
        self.query(s).p
    }

    /// Cached lookup at an integer state, for simulation.
    pub fn p_at(&self, x: u64, y: u64) -> f64 {
        let [nx, ny] = self.lattice_dims;
        let (xi, yi) = (x as usize, y as usize);
        if xi < nx && yi < ny {
            *self.lattice[xi * ny + yi].get_or_init(|| self.p(FluidState::new(x as f64, y as f64)))
        } else {
            self.p(FluidState::new(x as f64, y as f64))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::integrate;
    use crate::model::CostFunction;
    use crate::transient::tests::problem;

    fn quadratic() -> FluidPolicy {
        FluidPolicy::build(
            problem(CostFunction::quadratic(0.5, 0.1, 0.2)),
            PolicySettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn absorbing_region_uses_equilibrium() {
        let pol = quadratic();
        let d = pol.query(FluidState::new(40.0, 10.0));
        assert_eq!(d.region, Region::Absorbing);
        assert!((d.p - 0.1876).abs() < 5e-4);
        assert_eq!(d.p, pol.problem().equilibrium().p_inf);
    }

    #[test]
    fn deep_congestion_uses_p_l_for_all_examples() {
        for c in [
            CostFunction::quadratic(0.5, 0.1, 0.2),
            CostFunction::linear(0.5, 0.1, 0.2),
            CostFunction::piecewise(vec![(0.1, 0.5), (0.15, 0.1), (0.2, 0.0)]).unwrap(),
        ] {
            let pol = FluidPolicy::build(problem(c), PolicySettings::default()).unwrap();
            let d = pol.query(FluidState::new(120.0, 120.0));
            assert_eq!(d.p, 0.1);
            assert!(d.tau.unwrap() > 0.0);
        }
    }

    #[test]
    fn quadratic_policy_is_monotone() {
        let pol = quadratic();
        let grid: Vec<f64> = (0..=50).map(|i| 3.0 * i as f64).collect();
        for &x in &grid {
            for w in grid.windows(2) {
                let (a, b) = (pol.p(FluidState::new(x, w[0])), pol.p(FluidState::new(x, w[1])));
                assert!(b <= a + 1e-3, "y-monotone at x={x}, y={}: {a} -> {b}", w[1]);
                let (a, b) = (pol.p(FluidState::new(w[0], x)), pol.p(FluidState::new(w[1], x)));
                assert!(b <= a + 1e-3, "x-monotone at y={x}, x={}: {a} -> {b}", w[1]);
            }
        }
    }

    #[test]
    fn forward_trajectory_clears_at_predicted_time() {
        let pol = quadratic();
        for s0 in [
            FluidState::new(80.0, 60.0),
            FluidState::new(65.0, 25.0),
            FluidState::new(120.0, 10.0),
        ] {
            let tau = pol.query(s0).tau.unwrap();
            let traj = integrate(pol.problem().model(), s0, |s, _| pol.p(s), tau + 5.0, 0.001)
                .unwrap();
            let cleared = traj.first_time_x_below(50.0).unwrap();
            assert!((cleared - tau).abs() < 1e-2, "{s0:?}: {cleared} vs {tau}");
        }
    }

    #[test]
    fn policy_applied_along_congested_path_rises_toward_equilibrium() {
        let pol = quadratic();
        let traj = integrate(
            pol.problem().model(),
            FluidState::new(80.0, 60.0),
            |s, _| pol.p(s),
            60.0,
            0.01,
        )
        .unwrap();
        let ps: Vec<f64> = traj
            .states
            .iter()
            .zip(&traj.policy)
            .take_while(|(s, _)| s.x > 50.0)
            .map(|(_, &p)| p)
            .collect();
        assert!(ps.len() > 10);
        assert!(ps.windows(2).all(|w| w[1] >= w[0] - 1e-9), "p rises back to p∞ forward in time");
    }

    #[test]
    fn zero_holding_cost_is_equilibrium_everywhere() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let m = cp.model().with_holding_cost(0.0).unwrap();
        let pol = FluidPolicy::build(ControlProblem::new(m), PolicySettings::default()).unwrap();
        let p_inf = pol.problem().equilibrium().p_inf;
        for s in [(10.0, 10.0), (200.0, 5.0), (10.0, 300.0)] {
            assert_eq!(pol.p(FluidState::new(s.0, s.1)), p_inf);
        }
    }

    #[test]
    fn lattice_cache_matches_direct_queries() {
        let pol = quadratic();
        for (x, y) in [(0u64, 0u64), (60, 30), (30, 80), (199, 199), (400, 3)] {
            let direct = pol.p(FluidState::new(x as f64, y as f64));
            assert_eq!(pol.p_at(x, y), direct);
            assert_eq!(pol.p_at(x, y), direct);
        }
    }
}
