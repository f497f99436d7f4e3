use serde::{Deserialize, Serialize};

use super::ControlProblem;
use crate::error::FluidError;
use crate::fluid::FluidState;

/// Bisection stopping width for clearing times, in days.
pub(crate) const TAU_TOL: f64 = 1e-8;

/// Iso-`τ` line `x + slope_coeff * y = a` in the congested region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourLine {
    pub tau: f64,
    /// `1 - e^{-ντ}`.
    pub slope_coeff: f64,
    pub a: f64,
    pub p_star: f64,
    /// `a - N`, kept separately to avoid cancellation.
    pub excess: f64,
    /// `y` where the line meets `x = N` (the orbit threshold for `τ = 0`).
    pub y_at_capacity: f64,
}

impl ContourLine {
    pub fn residual(&self, n: f64, s: FluidState) -> f64 {
        (s.x - n) + self.slope_coeff * s.y - self.excess
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauSpacing {
    Uniform,
    /// Geometric from a small first step, so lines are dense near `τ = 0`.
    Geometric,
}

/// Ordered family of contour lines on a `τ` grid starting at `τ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourTable {
    pub lines: Vec<ContourLine>,
    pub tau_max: f64,
    pub spacing: TauSpacing,
}

impl ContourTable {
    /// Uniformly spaced table on `[0, tau_max]`.
    pub fn build(cp: &ControlProblem, tau_max: f64, n_lines: usize) -> Result<Self, FluidError> {
        Self::build_with(cp, tau_max, n_lines, TauSpacing::Uniform)
    }

    pub fn build_with(
        cp: &ControlProblem,
        tau_max: f64,
        n_lines: usize,
        spacing: TauSpacing,
    ) -> Result<Self, FluidError> {
        if !(tau_max > 0.0 && tau_max.is_finite()) || n_lines < 2 {
            return Err(FluidError::BadSettings(format!(
                "contour table needs tau_max > 0 and at least 2 lines, got {tau_max}, {n_lines}"
            )));
        }
        if !(cp.model().h() > 0.0) {
            return Err(FluidError::BadSettings(
                "contour lines need a positive holding cost".into(),
            ));
        }
        let taus = tau_grid(tau_max, n_lines, spacing);
        let lines: Vec<ContourLine> = taus.iter().map(|&t| cp.contour_line(t)).collect();
        check_fan_out(&lines)?;
        Ok(Self {
            lines,
            tau_max,
            spacing,
        })
    }

    /// Clearing time of a congested state: bracket by line residual sign, then
    /// bisect. States with `x <= N` map to zero.
    pub fn tau_for_state(&self, cp: &ControlProblem, s: FluidState) -> f64 {
        let n = cp.model().servers();
        if s.x <= n {
            return 0.0;
        }
        // residual > 0 means the state lies beyond the line
        let lines = &self.lines;
        let last = lines.len() - 1;
        let (mut lo, mut hi) = if lines[last].residual(n, s) > 0.0 {
            let mut lo = self.tau_max;
            let mut hi = 2.0 * self.tau_max;
            while cp.line_residual(s, hi) > 0.0 {
                lo = hi;
                hi *= 2.0;
                assert!(hi.is_finite(), "clearing time diverged for {s:?}");
            }
            (lo, hi)
        } else {
            // first index with residual <= 0; residual(τ=0) = x - N > 0
            let (mut a, mut b) = (0usize, last);
            while b - a > 1 {
                let mid = (a + b) / 2;
                if lines[mid].residual(n, s) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            (lines[a].tau, lines[b].tau)
        };
        while hi - lo > TAU_TOL {
            let mid = 0.5 * (lo + hi);
            if cp.line_residual(s, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub(crate) fn tau_grid(tau_max: f64, n: usize, spacing: TauSpacing) -> Vec<f64> {
    let mut taus = Vec::with_capacity(n);
    taus.push(0.0);
    match spacing {
        TauSpacing::Uniform => {
            for i in 1..n {
                taus.push(tau_max * i as f64 / (n - 1) as f64);
            }
        }
        TauSpacing::Geometric => {
            if n == 2 {
                taus.push(tau_max);
            } else {
                let first = (tau_max * 1e-4).min(tau_max / (n - 1) as f64);
                let ratio = (tau_max / first).powf(1.0 / (n - 2) as f64);
                let mut t = first;
                for _ in 1..n - 1 {
                    taus.push(t);
                    t *= ratio;
                }
                taus.push(tau_max);
            }
        }
    }
    taus
}

/// Slopes and capacity-line intercepts must both be strictly increasing.
pub(crate) fn check_fan_out(lines: &[ContourLine]) -> Result<(), FluidError> {
    for w in lines.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(b.slope_coeff > a.slope_coeff && b.y_at_capacity > a.y_at_capacity) {
            return Err(FluidError::FanOutViolation { tau: b.tau });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostFunction;
    use crate::transient::tests::problem;

    #[test]
    fn two_line_table_starts_at_capacity() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let t = ContourTable::build(&cp, 30.0, 2).unwrap();
        assert_eq!(t.lines.len(), 2);
        assert_eq!(t.lines[0].a, 50.0);
        assert_eq!(t.lines[1].tau, 30.0);
    }

    #[test]
    fn quadratic_table_fans_out() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let t = ContourTable::build(&cp, 30.0, 500).unwrap();
        for w in t.lines.windows(2) {
            assert!(w[1].y_at_capacity > w[0].y_at_capacity);
        }
    }

    #[test]
    fn linear_cost_lines_switch_once() {
        let cp = problem(CostFunction::linear(0.5, 0.1, 0.2));
        let t = ContourTable::build(&cp, 100.0, 2000).unwrap();
        let ps: Vec<f64> = t.lines.iter().map(|l| l.p_star).collect();
        assert!(ps.iter().all(|&p| p == 0.1 || p == 0.2));
        let switches = ps.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(switches, 1);
        // switching time solves M/(p_u - p_l) = Γ2(τ)
        let i = ps.iter().position(|&p| p == 0.1).unwrap();
        let g_before = cp.costates_backward(t.lines[i - 1].tau).gamma2;
        let g_after = cp.costates_backward(t.lines[i].tau).gamma2;
        assert!(g_before < 5.0 && g_after >= 5.0);
    }

    #[test]
    fn bad_table_settings() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        assert!(ContourTable::build(&cp, 0.0, 10).is_err());
        assert!(ContourTable::build(&cp, 10.0, 1).is_err());
    }

    #[test]
    fn geometric_grid_is_increasing_and_ends_at_tau_max() {
        let g = tau_grid(50.0, 2000, TauSpacing::Geometric);
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 50.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g[1] < 0.01);
    }

    #[test]
    fn tau_for_state_boundary_and_ordering() {
        let cp = problem(CostFunction::quadratic(0.5, 0.1, 0.2));
        let t = ContourTable::build_with(&cp, 50.0, 2000, TauSpacing::Geometric).unwrap();
        assert_eq!(t.tau_for_state(&cp, FluidState::new(50.0, 20.0)), 0.0);
        let mut prev = 0.0;
        for x in [51.0, 60.0, 80.0, 120.0, 300.0, 900.0] {
            let tau = t.tau_for_state(&cp, FluidState::new(x, 30.0));
            assert!(tau > prev, "x={x}: {tau} <= {prev}");
            assert!(cp.line_residual(FluidState::new(x, 30.0), tau).abs() < 1e-6);
            prev = tau;
        }
        assert!(prev > 50.0, "far states extend past the table");
    }
}
