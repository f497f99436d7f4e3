//! Scenario files: model, arrival pattern, duration laws and policy in one JSON
//! document. See `scenarios/` for examples and the README for the schema.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, CostFunction, CostParams, Model, SystemParams};
use crate::sim::{ArrivalProcess, DecisionEpoch, DurationDist, InterventionPolicy};
use crate::transient::{ControlProblem, FluidPolicy, PolicySettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Linear {
        #[serde(rename = "M")]
        m: f64,
    },
    Quadratic {
        #[serde(rename = "M")]
        m: f64,
    },
    Piecewise { knots: Vec<(f64, f64)> },
}

/// Arrival pattern around the file's `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalSpec {
    #[default]
    Stationary,
    /// `lambda (1 + k sin(2πt/f))`.
    Sinusoidal { k: f64, f: f64 },
    /// Explicit weekday/weekend rates with a daily sinusoid; `lambda` is only
    /// used by the fluid model.
    CaseStudyWeekly {
        weekday: f64,
        weekend: f64,
        amplitude: f64,
    },
}

/// Duration law; exponential rates default to `mu` or `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DurationSpec {
    #[default]
    Exponential,
    LogNormal { log_mean: f64, log_sd: f64 },
    TruncatedExponential { mean: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fluid,
    Equilibrium,
    Simple,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fluid => "fluid",
            Self::Equilibrium => "equilibrium",
            Self::Simple => "simple",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fluid" => Ok(Self::Fluid),
            "equilibrium" => Ok(Self::Equilibrium),
            "simple" => Ok(Self::Simple),
            _ => Err(Error::Parse(format!("unknown policy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Fluid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        settings: Option<PolicySettings>,
    },
    Equilibrium,
    Simple,
    Constant { p: f64 },
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self::Fluid { settings: None }
    }
}

impl From<PolicyKind> for PolicySpec {
    fn from(k: PolicyKind) -> Self {
        match k {
            PolicyKind::Fluid => Self::Fluid { settings: None },
            PolicyKind::Equilibrium => Self::Equilibrium,
            PolicyKind::Simple => Self::Simple,
        }
    }
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub servers: u32,
    pub p_l: f64,
    pub p_u: f64,
    pub h: f64,
    pub r: f64,
    pub cost: CostSpec,
    #[serde(default)]
    pub arrivals: ArrivalSpec,
    #[serde(default)]
    pub service_dist: DurationSpec,
    #[serde(default)]
    pub return_dist: DurationSpec,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub decision_epoch: DecisionEpoch,
}

impl ScenarioSpec {
    /// Stationary Markovian scenario with the given costs.
    pub fn markovian(system: SystemParams, h: f64, r: f64, cost: CostSpec) -> Self {
        Self {
            name: String::new(),
            lambda: system.lambda_bar,
            mu: system.mu,
            nu: system.nu,
            servers: system.n_servers,
            p_l: system.p_l,
            p_u: system.p_u,
            h,
            r,
            cost,
            arrivals: ArrivalSpec::Stationary,
            service_dist: DurationSpec::Exponential,
            return_dist: DurationSpec::Exponential,
            policy: PolicySpec::default(),
            decision_epoch: DecisionEpoch::PostDeparture,
        }
    }

    fn cost_function(&self) -> std::result::Result<CostFunction, crate::error::ModelError> {
        Ok(match &self.cost {
            CostSpec::Linear { m } => CostFunction::linear(*m, self.p_l, self.p_u),
            CostSpec::Quadratic { m } => CostFunction::quadratic(*m, self.p_l, self.p_u),
            CostSpec::Piecewise { knots } => CostFunction::piecewise(knots.clone())?,
        })
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    model: Model,
    pub arrivals: ArrivalProcess,
    pub service: DurationDist,
    pub returns: DurationDist,
    pub decision: DecisionEpoch,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        let system = SystemParams {
            lambda_bar: spec.lambda,
            mu: spec.mu,
            nu: spec.nu,
            n_servers: spec.servers,
            p_l: spec.p_l,
            p_u: spec.p_u,
        };
        let cost = spec.cost_function().map_err(|e| Error::Validation(vec![e]))?;
        let model = validate(
            system,
            CostParams {
                h: spec.h,
                r: spec.r,
                intervention: cost,
            },
        )?;
        let arrivals = match spec.arrivals {
            ArrivalSpec::Stationary => ArrivalProcess::Stationary { rate: spec.lambda },
            ArrivalSpec::Sinusoidal { k, f } => ArrivalProcess::Sinusoidal {
                mean: spec.lambda,
                k,
                f,
            },
            ArrivalSpec::CaseStudyWeekly {
                weekday,
                weekend,
                amplitude,
            } => ArrivalProcess::CaseStudyWeekly {
                weekday,
                weekend,
                amplitude,
            },
        };
        arrivals.check()?;
        let dist = |d: DurationSpec, rate: f64| match d {
            DurationSpec::Exponential => DurationDist::Exponential { rate },
            DurationSpec::LogNormal { log_mean, log_sd } => DurationDist::LogNormal { log_mean, log_sd },
            DurationSpec::TruncatedExponential { mean, upper } => {
                DurationDist::TruncatedExponential { mean, upper }
            }
        };
        let service = dist(spec.service_dist, spec.mu);
        let returns = dist(spec.return_dist, spec.nu);
        service.check()?;
        returns.check()?;
        if let PolicySpec::Constant { p } = spec.policy {
            model.cost().value(p).map_err(|e| Error::Validation(vec![e]))?;
        }
        Ok(Self {
            decision: spec.decision_epoch,
            spec,
            model,
            arrivals,
            service,
            returns,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Edits the spec and re-validates.
    pub fn with(&self, edit: impl FnOnce(&mut ScenarioSpec)) -> Result<Self> {
        let mut spec = self.spec.clone();
        edit(&mut spec);
        Self::new(spec)
    }

    pub fn control_problem(&self) -> ControlProblem {
        ControlProblem::new(self.model.clone())
    }

    /// Fluid policy settings from the file, or defaults.
    pub fn policy_settings(&self) -> PolicySettings {
        match self.spec.policy {
            PolicySpec::Fluid {
                settings: Some(s),
            } => s,
            _ => PolicySettings::default(),
        }
    }

    pub fn build_fluid_policy(&self) -> Result<FluidPolicy> {
        Ok(FluidPolicy::build(self.control_problem(), self.policy_settings())?)
    }

    pub fn build_policy(&self, spec: PolicySpec) -> Result<InterventionPolicy> {
        let eq = crate::equilibrium::solve_equilibrium(&self.model);
        Ok(match spec {
            PolicySpec::Fluid { settings } => {
                let settings = settings.unwrap_or_else(|| self.policy_settings());
                InterventionPolicy::Fluid(Arc::new(FluidPolicy::build(self.control_problem(), settings)?))
            }
            PolicySpec::Equilibrium => InterventionPolicy::Equilibrium { p_inf: eq.p_inf },
            PolicySpec::Simple => InterventionPolicy::Simple {
                p_inf: eq.p_inf,
                p_l: self.model.p_l(),
                servers: u64::from(self.model.system().n_servers),
            },
            PolicySpec::Constant { p } => InterventionPolicy::Constant { p },
        })
    }

    /// The policy named in the file.
    pub fn file_policy(&self) -> Result<InterventionPolicy> {
        self.build_policy(self.spec.policy)
    }

    /// Rounded fluid equilibrium under `p∞`, a natural long-run starting state.
    pub fn equilibrium_state(&self) -> (u64, u64) {
        let eq = crate::equilibrium::solve_equilibrium(&self.model);
        (eq.x_inf.round() as u64, eq.y_inf.round() as u64)
    }
}
