//! Discrete-event simulation of the stochastic queue under an intervention policy.
//!
//! Two engines share one bookkeeping layer: a Markovian engine that races the
//! aggregate exponential clocks, and a general engine with a per-customer
//! event calendar for non-exponential service and return times. Decisions are
//! made at service completions.

mod arrivals;
mod dist;
mod engine;

pub use arrivals::{sample_nhpp_next, ArrivalProcess};
pub use dist::DurationDist;

use std::ops::{Add, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{SimError, StatsError};
use crate::scenario::Scenario;
use crate::stats::{mean_ci, MeanCi};
use crate::transient::FluidPolicy;

/// Rule mapping the observed state at a decision epoch to a return probability.
#[derive(Debug, Clone)]
pub enum InterventionPolicy {
    Fluid(Arc<FluidPolicy>),
    Equilibrium { p_inf: f64 },
    /// `p_l` while the queue is non-empty, `p_inf` otherwise.
    Simple { p_inf: f64, p_l: f64, servers: u64 },
    Constant { p: f64 },
}

impl InterventionPolicy {
    pub fn choose(&self, x: u64, y: u64) -> f64 {
        match self {
            Self::Fluid(pol) => pol.p_at(x, y),
            Self::Equilibrium { p_inf } => *p_inf,
            Self::Simple { p_inf, p_l, servers } => {
                if x > *servers {
                    *p_l
                } else {
                    *p_inf
                }
            }
            Self::Constant { p } => *p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fluid(_) => "fluid",
            Self::Equilibrium { .. } => "equilibrium",
            Self::Simple { .. } => "simple",
            Self::Constant { .. } => "constant",
        }
    }
}

/// Which state the policy sees at a service completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionEpoch {
    /// The departing customer is already removed from `X`.
    #[default]
    PostDeparture,
    PreDeparture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Markovian when service and return times are both exponential.
    #[default]
    Auto,
    Markovian,
    General,
}

/// Costs and counters accumulated over a time window. Additive over disjoint windows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostLedger {
    /// `∫ h (X - N)⁺ dt`.
    pub holding: f64,
    /// `r` per return event.
    pub returns: f64,
    /// `C(p)` per service completion.
    pub intervention: f64,
    pub arrivals: u64,
    pub completions: u64,
    pub return_events: u64,
    /// Completions at which `p < p_u`.
    pub interventions: u64,
    /// Completions at which `p = p_l`.
    pub at_p_l: u64,
    /// `Σ (p_u - p)` over completions.
    pub sum_reduction: f64,
    /// `∫ (X - N)⁺ dt`.
    pub queue_area: f64,
    /// `∫ min(X, N) dt`.
    pub busy_area: f64,
    /// Time with every server busy.
    pub full_time: f64,
    pub elapsed: f64,
}

impl CostLedger {
    pub fn total(&self) -> f64 {
        self.holding + self.returns + self.intervention
    }

    /// Return plus intervention cost.
    pub fn direct(&self) -> f64 {
        self.returns + self.intervention
    }

    /// Completion-weighted applied `p`; exact when every completion used `p_u`.
    pub fn mean_p(&self, p_u: f64) -> Option<f64> {
        (self.completions > 0).then(|| p_u - self.sum_reduction / self.completions as f64)
    }

    pub fn mean_queue(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.queue_area / self.elapsed
        } else {
            0.0
        }
    }

    pub fn full_fraction(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.full_time / self.elapsed
        } else {
            0.0
        }
    }
}

impl Add for CostLedger {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            holding: self.holding + o.holding,
            returns: self.returns + o.returns,
            intervention: self.intervention + o.intervention,
            arrivals: self.arrivals + o.arrivals,
            completions: self.completions + o.completions,
            return_events: self.return_events + o.return_events,
            interventions: self.interventions + o.interventions,
            at_p_l: self.at_p_l + o.at_p_l,
            sum_reduction: self.sum_reduction + o.sum_reduction,
            queue_area: self.queue_area + o.queue_area,
            busy_area: self.busy_area + o.busy_area,
            full_time: self.full_time + o.full_time,
            elapsed: self.elapsed + o.elapsed,
        }
    }
}

/// Window difference `later - earlier` of two cumulative snapshots.
impl Sub for CostLedger {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            holding: self.holding - o.holding,
            returns: self.returns - o.returns,
            intervention: self.intervention - o.intervention,
            arrivals: self.arrivals - o.arrivals,
            completions: self.completions - o.completions,
            return_events: self.return_events - o.return_events,
            interventions: self.interventions - o.interventions,
            at_p_l: self.at_p_l - o.at_p_l,
            sum_reduction: self.sum_reduction - o.sum_reduction,
            queue_area: self.queue_area - o.queue_area,
            busy_area: self.busy_area - o.busy_area,
            full_time: self.full_time - o.full_time,
            elapsed: self.elapsed - o.elapsed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    Completion,
    Departure,
    Return,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Arrival => "arrival",
            Self::Completion => "completion",
            Self::Departure => "departure",
            Self::Return => "return",
        }
    }
}

/// State right after an event. A completion that sends the customer to the
/// orbit is logged as `Completion`, one that leaves for good as `Departure`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    pub x: u64,
    pub y: u64,
    /// Applied return probability at completions.
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub x: u64,
    pub y: u64,
}

/// Run configuration. Reproducible from `(scenario, policy, config)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub s0: (u64, u64),
    pub seed: u64,
    /// Independent random stream under the same seed, one per replication.
    pub stream: u64,
    /// Times at which cumulative ledger snapshots are taken; must be sorted.
    pub checkpoints: Vec<f64>,
    /// Record `(t, X, Y)` on the grid `0, step, 2 step, ...`.
    pub path_step: Option<f64>,
    pub record_events: bool,
    pub engine: Engine,
}

impl SimConfig {
    pub fn new(horizon: f64, s0: (u64, u64), seed: u64) -> Self {
        Self {
            horizon,
            s0,
            seed,
            stream: 0,
            checkpoints: Vec::new(),
            path_step: None,
            record_events: false,
            engine: Engine::Auto,
        }
    }

    pub fn stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub ledger: CostLedger,
    /// Cumulative ledgers at the configured checkpoints.
    pub snapshots: Vec<CostLedger>,
    pub path: Vec<PathPoint>,
    pub events: Vec<EventRecord>,
    pub s0: (u64, u64),
    pub final_state: (u64, u64),
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
}

impl RunResult {
    /// Event log as CSV with columns `t,X,Y,event`.
    pub fn write_events_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,X,Y,event")?;
        for e in &self.events {
            writeln!(w, "{},{},{},{}", e.t, e.x, e.y, e.kind.as_str())?;
        }
        Ok(())
    }
}

/// Simulates one replication.
pub fn simulate(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    cfg: &SimConfig,
) -> Result<RunResult, SimError> {
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
        return Err(SimError::InvalidScenario(format!(
            "horizon must be positive, got {}",
            cfg.horizon
        )));
    }
    if cfg.checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimError::InvalidScenario("checkpoints must be sorted".into()));
    }
    if matches!(cfg.path_step, Some(s) if !(s > 0.0)) {
        return Err(SimError::InvalidScenario("path step must be positive".into()));
    }
    let markovian = match cfg.engine {
        Engine::Auto => scenario.service.is_exponential() && scenario.returns.is_exponential(),
        Engine::Markovian => {
            if !(scenario.service.is_exponential() && scenario.returns.is_exponential()) {
                return Err(SimError::InvalidScenario(
                    "the Markovian engine needs exponential service and return times".into(),
                ));
            }
            true
        }
        Engine::General => false,
    };
    Ok(if markovian {
        engine::run_markovian(scenario, policy, cfg)
    } else {
        engine::run_general(scenario, policy, cfg)
    })
}

/// Long-run cost-rate estimate from one run by batch means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunEstimate {
    /// Cost per day.
    pub rate: MeanCi,
    pub batch_means: Vec<f64>,
    /// Post-warmup ledger over all batches.
    pub ledger: CostLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunSettings {
    pub warmup: f64,
    pub n_batches: usize,
    pub batch_length: f64,
    pub alpha: f64,
}

impl Default for LongRunSettings {
    fn default() -> Self {
        Self {
            warmup: 500.0,
            n_batches: 20,
            batch_length: 500.0,
            alpha: 0.05,
        }
    }
}

/// Discards `warmup` days, then estimates cost per day with a Student-t
/// interval over `n_batches` consecutive batches.
pub fn estimate_longrun(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    settings: &LongRunSettings,
    s0: (u64, u64),
    seed: u64,
) -> Result<LongRunEstimate, crate::Error> {
    if !(settings.warmup >= 0.0 && settings.batch_length > 0.0) {
        return Err(SimError::InvalidScenario("warmup and batch length must be positive".into()).into());
    }
    if settings.n_batches < 10 {
        return Err(StatsError::TooFewSamples {
            needed: 10,
            got: settings.n_batches,
        }
        .into());
    }
    let mut cfg = SimConfig::new(
        settings.warmup + settings.n_batches as f64 * settings.batch_length,
        s0,
        seed,
    );
    cfg.checkpoints = (0..=settings.n_batches)
        .map(|k| settings.warmup + k as f64 * settings.batch_length)
        .collect();
    let run = simulate(scenario, policy, &cfg)?;
    let batch_means: Vec<f64> = run
        .snapshots
        .windows(2)
        .map(|w| (w[1] - w[0]).total() / settings.batch_length)
        .collect();
    let rate = mean_ci(&batch_means, settings.alpha)?;
    Ok(LongRunEstimate {
        rate,
        batch_means,
        ledger: run.snapshots[settings.n_batches] - run.snapshots[0],
    })
}
