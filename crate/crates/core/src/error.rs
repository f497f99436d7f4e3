use thiserror::Error;

/// Violations of the model's standing assumptions and domain errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unstable: p_u = {p_u} must be below 1 - lambda/(mu N) = {bound}")]
    Unstable { p_u: f64, bound: f64 },
    #[error("intervention cost is not admissible: {0}")]
    NonConvexCost(String),
    #[error("need 0 < p_l < p_u < 1, got p_l = {p_l}, p_u = {p_u}")]
    BadProbabilityInterval { p_l: f64, p_u: f64 },
    #[error("rate {name} must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("need at least one server")]
    NoServers,
    #[error("cost {name} must be non-negative, got {value}")]
    NegativeCost { name: &'static str, value: f64 },
    #[error("p = {p} outside [{p_l}, {p_u}]")]
    OutOfDomain { p: f64, p_l: f64, p_u: f64 },
}

/// Numerical failures of the fluid and shooting integrators and policy synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluidError {
    #[error("return probability {p} is not below the stability bound {bound}")]
    UnstableProbability { p: f64, bound: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid integration settings: {0}")]
    BadSettings(String),
    #[error("contour lines intersect inside the congested region near tau = {tau}")]
    FanOutViolation { tau: f64 },
}

/// Simulation setup errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Statistical estimation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("denominator mean is not significantly different from zero; Fieller interval is unbounded")]
    UnboundedInterval,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// Errors surfaced by scenario loading and the experiment pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario failed validation: {}", join(.0))]
    Validation(Vec<ModelError>),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("scenario file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Vec<ModelError>> for Error {
    fn from(v: Vec<ModelError>) -> Self {
        Error::Validation(v)
    }
}

fn join(errs: &[ModelError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
