//! Optimal return-probability policies for multiserver queues whose customers
//! may come back after a delay, and a discrete-event simulator to evaluate them.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod fluid;
pub mod model;
pub mod ode;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod transient;

pub use equilibrium::{equilibrium_cost, solve_equilibrium, EquilibriumSolution};
pub use error::{Error, Result};
pub use fluid::{FluidState, FluidTrajectory, Region};
pub use model::{validate, CostFunction, CostParams, Model, SystemParams};
pub use transient::{ControlProblem, Costate, FluidPolicy, PolicySettings};
pub use scenario::{PolicyKind, PolicySpec, Scenario, ScenarioSpec};
pub use sim::{simulate, InterventionPolicy, RunResult, SimConfig};
