//! Policy comparisons, parameter grids and the studies built on them.
//!
//! Every replication draws from its own random stream. Seeds for grid cells,
//! modes and policies are derived from one master seed by position, so any row
//! can be recomputed on its own.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::info;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fluid::{integrate, FluidState};
use crate::scenario::{ArrivalSpec, CostSpec, PolicyKind, PolicySpec, Scenario, ScenarioSpec};
use crate::sim::{simulate, CostLedger, InterventionPolicy, RunResult, SimConfig};
use crate::stats::{fieller_ci, mean_ci, MeanCi};
use crate::{Error, Result};

/// Mixes `key` into `seed`; distinct keys give unrelated seeds.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Total cost over `[0, horizon]` from `s0`.
    Finite { horizon: f64, s0: (u64, u64) },
    /// Cost per day after `warmup`, over `length` days, from the rounded equilibrium.
    LongRun { warmup: f64, length: f64 },
}

impl Mode {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Finite { .. } => "finite",
            Self::LongRun { .. } => "longrun",
        }
    }

    pub fn start(&self, scenario: &Scenario) -> (u64, u64) {
        match *self {
            Self::Finite { s0, .. } => s0,
            Self::LongRun { .. } => scenario.equilibrium_state(),
        }
    }
}

/// One cost sample per replication; replications run in parallel on streams `0..n_reps`.
pub fn replicate_costs(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    mode: Mode,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    replicate_ledgers(scenario, policy, mode, n_reps, seed).map(|ls| {
        ls.iter()
            .map(|l| match mode {
                Mode::Finite { .. } => l.total(),
                Mode::LongRun { .. } => l.total() / l.elapsed,
            })
            .collect()
    })
}

/// Ledger of each replication over the measured window.
pub fn replicate_ledgers(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    mode: Mode,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<CostLedger>> {
    let s0 = mode.start(scenario);
    (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = match mode {
                Mode::Finite { horizon, .. } => SimConfig::new(horizon, s0, seed).stream(i),
                Mode::LongRun { warmup, length } => {
                    let mut cfg = SimConfig::new(warmup + length, s0, seed).stream(i);
                    cfg.checkpoints = vec![warmup];
                    cfg
                }
            };
            let run = simulate(scenario, policy, &cfg)?;
            Ok(match mode {
                Mode::Finite { .. } => run.ledger,
                Mode::LongRun { .. } => run.ledger - run.snapshots[0],
            })
        })
        .collect()
}

/// Comparison of policy A against benchmark B. Positive reductions mean A is cheaper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub policy_a: String,
    pub policy_b: String,
    pub mode: Mode,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_b - mean_a`.
    pub abs_reduction: f64,
    /// `1 - mean_a / mean_b`.
    pub rel_reduction: f64,
    /// Fieller interval for `rel_reduction`; `None` when unbounded.
    pub rel_ci: Option<(f64, f64)>,
    /// `mean_a / mean_b - 1`.
    pub ratio_minus_one: f64,
    pub alpha: f64,
    pub n_reps: usize,
    pub seed: u64,
}

impl ComparisonResult {
    pub fn from_samples(
        names: (&str, &str),
        mode: Mode,
        a: &[f64],
        b: &[f64],
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        let ma = mean_ci(a, alpha)?.mean;
        let mb = mean_ci(b, alpha)?.mean;
        let ratio = ma / mb;
        let rel_ci = match fieller_ci(a, b, alpha) {
            Ok(ci) => Some((1.0 - ci.hi, 1.0 - ci.lo)),
            Err(crate::error::StatsError::UnboundedInterval) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            policy_a: names.0.to_owned(),
            policy_b: names.1.to_owned(),
            mode,
            mean_a: ma,
            mean_b: mb,
            abs_reduction: mb - ma,
            rel_reduction: 1.0 - ratio,
            rel_ci,
            ratio_minus_one: ratio - 1.0,
            alpha,
            n_reps: a.len().min(b.len()),
            seed,
        })
    }

    /// A is significantly cheaper than B.
    pub fn a_better(&self) -> bool {
        matches!(self.rel_ci, Some((lo, _)) if lo > 0.0)
    }

    /// A is significantly more expensive than B.
    pub fn a_worse(&self) -> bool {
        matches!(self.rel_ci, Some((_, hi)) if hi < 0.0)
    }
}

/// Independent replications of both policies; A uses `derive_seed(seed, 0)`, B `derive_seed(seed, 1)`.
pub fn compare_policies(
    scenario: &Scenario,
    a: &InterventionPolicy,
    b: &InterventionPolicy,
    mode: Mode,
    n_reps: usize,
    seed: u64,
    alpha: f64,
) -> Result<ComparisonResult> {
    let xs = replicate_costs(scenario, a, mode, n_reps, derive_seed(seed, 0))?;
    let ys = replicate_costs(scenario, b, mode, n_reps, derive_seed(seed, 1))?;
    ComparisonResult::from_samples((a.name(), b.name()), mode, &xs, &ys, alpha, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostForm {
    /// `10 M (p_u - p)`.
    Linear,
    /// `100 M (p_u - p)^2`.
    Quadratic,
}

impl CostForm {
    fn spec(self, m: f64) -> CostSpec {
        match self {
            Self::Linear => CostSpec::Linear { m },
            Self::Quadratic => CostSpec::Quadratic { m },
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Quadratic => "quadratic",
        }
    }
}

/// Long-run mode parameters for grid rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunPlan {
    pub warmup: f64,
    pub length: f64,
    pub n_reps: usize,
}

/// Cartesian parameter sweep. Cells vary cost form, `M`, `h`, `λ`, `ν` and the
/// arrival pattern; each cell is compared in every finite mode and, if set, the long run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub base: ScenarioSpec,
    pub lambdas: Vec<f64>,
    pub nus: Vec<f64>,
    pub hs: Vec<f64>,
    pub ms: Vec<f64>,
    pub cost_forms: Vec<CostForm>,
    pub arrivals: Vec<ArrivalSpec>,
    pub initial_states: Vec<(u64, u64)>,
    pub horizons: Vec<f64>,
    pub longrun: Option<LongRunPlan>,
    pub benchmarks: Vec<PolicyKind>,
    pub n_reps: usize,
    pub seed: u64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub index: usize,
    pub id: String,
    pub scenario: Scenario,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub scenario_id: String,
    pub benchmark: String,
    pub mode: String,
    pub s0_x: Option<u64>,
    pub s0_y: Option<u64>,
    pub mean_fluid: f64,
    pub mean_bench: f64,
    pub abs_red: f64,
    pub rel_red: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n_reps: usize,
    pub seed: u64,
}

impl GridRow {
    fn key(&self) -> (String, String, String, Option<u64>, Option<u64>) {
        (
            self.scenario_id.clone(),
            self.benchmark.clone(),
            self.mode.clone(),
            self.s0_x,
            self.s0_y,
        )
    }

    pub fn fluid_better(&self) -> bool {
        matches!(self.ci_lo, Some(lo) if lo > 0.0)
    }

    pub fn fluid_worse(&self) -> bool {
        matches!(self.ci_hi, Some(hi) if hi < 0.0)
    }
}

impl ExperimentGrid {
    fn template(base: ScenarioSpec) -> Self {
        Self {
            lambdas: vec![base.lambda],
            nus: vec![base.nu],
            hs: vec![base.h],
            ms: vec![0.5],
            cost_forms: vec![CostForm::Quadratic],
            arrivals: vec![ArrivalSpec::Stationary],
            initial_states: vec![(25, 65), (65, 25), (65, 65)],
            horizons: vec![90.0],
            longrun: Some(LongRunPlan {
                warmup: 500.0,
                length: 10_000.0,
                n_reps: 40,
            }),
            benchmarks: vec![PolicyKind::Equilibrium, PolicyKind::Simple],
            n_reps: 2000,
            seed: 0,
            alpha: 0.05,
            base,
        }
    }

    /// Varying `M` and `h` at the nominal system parameters.
    pub fn cost_grid(base: ScenarioSpec, form: CostForm) -> Self {
        Self {
            hs: vec![0.05, 0.1, 0.25, 0.5, 1.0],
            ms: vec![0.2, 0.5, 1.0],
            cost_forms: vec![form],
            ..Self::template(base)
        }
    }

    /// Varying `λ` and `ν` at the nominal costs `M = 0.5`, `h = 0.25`.
    pub fn rate_grid(base: ScenarioSpec, form: CostForm) -> Self {
        Self {
            lambdas: vec![9.0, 9.5, 9.8],
            nus: vec![1.0 / 10.0, 1.0 / 15.0, 1.0 / 20.0],
            hs: vec![0.25],
            cost_forms: vec![form],
            ..Self::template(base)
        }
    }

    /// Sinusoidal arrivals over amplitudes and periods (in days).
    pub fn time_varying_grid(base: ScenarioSpec, form: CostForm) -> Self {
        let mut arrivals = Vec::new();
        for f in [1.0, 7.0, 28.0] {
            for k in [0.0, 0.25, 0.5, 0.75, 1.0] {
                arrivals.push(ArrivalSpec::Sinusoidal { k, f });
            }
        }
        Self {
            hs: vec![0.25],
            cost_forms: vec![form],
            arrivals,
            ..Self::template(base)
        }
    }

    fn modes(&self) -> Vec<Mode> {
        let mut modes = Vec::new();
        for &horizon in &self.horizons {
            for &s0 in &self.initial_states {
                modes.push(Mode::Finite { horizon, s0 });
            }
        }
        if let Some(lr) = self.longrun {
            modes.push(Mode::LongRun {
                warmup: lr.warmup,
                length: lr.length,
            });
        }
        modes
    }

    /// All cells in a fixed order; fails on the first cell that does not validate.
    pub fn cells(&self) -> Result<Vec<GridCell>> {
        let mut cells = Vec::new();
        for &form in &self.cost_forms {
            for &m in &self.ms {
                for &h in &self.hs {
                    for &lambda in &self.lambdas {
                        for &nu in &self.nus {
                            for arr in &self.arrivals {
                                let id = format!(
                                    "{}-M{m}-h{h}-lam{lambda}-ret{:.1}-{}",
                                    form.as_str(),
                                    1.0 / nu,
                                    arrival_tag(arr)
                                );
                                let spec = ScenarioSpec {
                                    name: id.clone(),
                                    lambda,
                                    nu,
                                    h,
                                    cost: form.spec(m),
                                    arrivals: *arr,
                                    ..self.base.clone()
                                };
                                let scenario = Scenario::new(spec)?;
                                cells.push(GridCell {
                                    index: cells.len(),
                                    id,
                                    scenario,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }

    pub fn n_rows(&self) -> Result<usize> {
        Ok(self.cells()?.len() * self.modes().len() * self.benchmarks.len())
    }

    /// Rows of one cell. The fluid samples of a mode are shared by all benchmarks.
    pub fn run_cell(&self, cell: &GridCell) -> Result<Vec<GridRow>> {
        let cell_seed = derive_seed(self.seed, cell.index as u64);
        let fluid = cell.scenario.build_policy(PolicySpec::Fluid { settings: None })?;
        let mut rows = Vec::new();
        for (mi, mode) in self.modes().into_iter().enumerate() {
            let mode_seed = derive_seed(cell_seed, mi as u64);
            let reps = match mode {
                Mode::Finite { .. } => self.n_reps,
                Mode::LongRun { .. } => self.longrun.map_or(self.n_reps, |l| l.n_reps),
            };
            let a = replicate_costs(&cell.scenario, &fluid, mode, reps, derive_seed(mode_seed, 0))?;
            for &bench in &self.benchmarks {
                let slot = 1 + bench as u64;
                let pol = cell.scenario.build_policy(bench.into())?;
                let b = replicate_costs(&cell.scenario, &pol, mode, reps, derive_seed(mode_seed, slot))?;
                let c = ComparisonResult::from_samples(
                    ("fluid", bench.as_str()),
                    mode,
                    &a,
                    &b,
                    self.alpha,
                    mode_seed,
                )?;
                let s0 = match mode {
                    Mode::Finite { s0, .. } => Some(s0),
                    Mode::LongRun { .. } => None,
                };
                rows.push(GridRow {
                    scenario_id: cell.id.clone(),
                    benchmark: bench.as_str().to_owned(),
                    mode: mode.tag().to_owned(),
                    s0_x: s0.map(|s| s.0),
                    s0_y: s0.map(|s| s.1),
                    mean_fluid: c.mean_a,
                    mean_bench: c.mean_b,
                    abs_red: c.abs_reduction,
                    rel_red: c.rel_reduction,
                    ci_lo: c.rel_ci.map(|ci| ci.0),
                    ci_hi: c.rel_ci.map(|ci| ci.1),
                    n_reps: reps,
                    seed: mode_seed,
                });
            }
        }
        Ok(rows)
    }
}

fn arrival_tag(a: &ArrivalSpec) -> String {
    match a {
        ArrivalSpec::Stationary => "stationary".into(),
        ArrivalSpec::Sinusoidal { k, f } => format!("sin-k{k}-f{f}"),
        ArrivalSpec::CaseStudyWeekly { .. } => "weekly".into(),
    }
}

/// Reads a results CSV; a missing file reads as empty.
pub fn read_rows(path: &Path) -> Result<Vec<GridRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<GridRow>, _>>()
        .map_err(csv_err)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Writes rows through a temporary file renamed into place.
pub fn write_rows_atomic(path: &Path, rows: &[GridRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r).map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Runs every cell whose rows are not yet in `out`, rewriting the file after each
/// cell. Returns all rows in grid order.
pub fn run_grid(grid: &ExperimentGrid, out: Option<&Path>) -> Result<Vec<GridRow>> {
    let cells = grid.cells()?;
    let mut rows = match out {
        Some(p) => read_rows(p)?,
        None => Vec::new(),
    };
    let per_cell = grid.modes().len() * grid.benchmarks.len();
    for cell in &cells {
        let done = rows.iter().filter(|r| r.scenario_id == cell.id).count();
        if done >= per_cell {
            continue;
        }
        info!("grid cell {}/{}: {}", cell.index + 1, cells.len(), cell.id);
        rows.retain(|r| r.scenario_id != cell.id);
        rows.extend(grid.run_cell(cell)?);
        if let Some(p) = out {
            write_rows_atomic(p, &rows)?;
        }
    }
    let order: Vec<&str> = cells.iter().map(|c| c.id.as_str()).collect();
    rows.sort_by_key(|r| order.iter().position(|&id| id == r.scenario_id).unwrap_or(usize::MAX));
    let mut seen = BTreeSet::new();
    rows.retain(|r| seen.insert(r.key()));
    if let Some(p) = out {
        write_rows_atomic(p, &rows)?;
    }
    Ok(rows)
}

/// Completion-weighted applied return probability and busy-time fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionSummary {
    pub mean_p: f64,
    /// Fraction of time with all servers busy.
    pub full_fraction: f64,
    /// Fraction of completions that received any intervention.
    pub intervention_rate: f64,
    pub mean_queue: f64,
}

pub fn intervention_summary<'a>(
    ledgers: impl IntoIterator<Item = &'a CostLedger>,
    p_u: f64,
) -> InterventionSummary {
    let total = ledgers.into_iter().fold(CostLedger::default(), |acc, l| acc + *l);
    InterventionSummary {
        mean_p: total.mean_p(p_u).unwrap_or(f64::NAN),
        full_fraction: total.full_fraction(),
        intervention_rate: total.interventions as f64 / total.completions.max(1) as f64,
        mean_queue: total.mean_queue(),
    }
}

pub fn run_summary(runs: &[RunResult], p_u: f64) -> InterventionSummary {
    intervention_summary(runs.iter().map(|r| &r.ledger), p_u)
}

/// Long-run applied probability for one arrival pattern, with the policy built
/// for the stationary mean rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeVaryingPoint {
    pub k: f64,
    pub f: f64,
    /// Per-replication completion-weighted mean applied `p`.
    pub mean_p: MeanCi,
    pub summary: InterventionSummary,
    /// Cost per day.
    pub cost: MeanCi,
}

/// Sinusoidal arrivals around the scenario's rate, fluid policy fixed.
pub fn time_varying_study(
    scenario: &Scenario,
    ks: &[f64],
    fs: &[f64],
    plan: LongRunPlan,
    seed: u64,
) -> Result<Vec<TimeVaryingPoint>> {
    let fluid = scenario.build_policy(PolicySpec::Fluid { settings: None })?;
    let mode = Mode::LongRun {
        warmup: plan.warmup,
        length: plan.length,
    };
    let mut out = Vec::new();
    for (fi, &f) in fs.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let sc = scenario.with(|s| s.arrivals = ArrivalSpec::Sinusoidal { k, f })?;
            let key = (fi * ks.len() + ki) as u64;
            let ledgers = replicate_ledgers(&sc, &fluid, mode, plan.n_reps, derive_seed(seed, key))?;
            let p_u = sc.model().p_u();
            let ps: Vec<f64> = ledgers.iter().map(|l| l.mean_p(p_u).unwrap_or(f64::NAN)).collect();
            let costs: Vec<f64> = ledgers.iter().map(|l| l.total() / l.elapsed).collect();
            out.push(TimeVaryingPoint {
                k,
                f,
                mean_p: mean_ci(&ps, 0.05)?,
                summary: intervention_summary(&ledgers, p_u),
                cost: mean_ci(&costs, 0.05)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub h: f64,
    /// Return plus intervention cost per day.
    pub direct: MeanCi,
    pub mean_queue: MeanCi,
    pub summary: InterventionSummary,
}

/// Long-run direct cost against queue length as the holding cost varies; the
/// fluid policy is rebuilt for each `h`.
pub fn tradeoff_curve(
    scenario: &Scenario,
    hs: &[f64],
    plan: LongRunPlan,
    seed: u64,
) -> Result<Vec<TradeoffPoint>> {
    let mode = Mode::LongRun {
        warmup: plan.warmup,
        length: plan.length,
    };
    hs.iter()
        .enumerate()
        .map(|(i, &h)| {
            let sc = scenario.with(|s| s.h = h)?;
            let pol = sc.build_policy(PolicySpec::Fluid { settings: None })?;
            let ledgers = replicate_ledgers(&sc, &pol, mode, plan.n_reps, derive_seed(seed, i as u64))?;
            let direct: Vec<f64> = ledgers.iter().map(|l| l.direct() / l.elapsed).collect();
            let queue: Vec<f64> = ledgers.iter().map(CostLedger::mean_queue).collect();
            Ok(TradeoffPoint {
                h,
                direct: mean_ci(&direct, 0.05)?,
                mean_queue: mean_ci(&queue, 0.05)?,
                summary: intervention_summary(&ledgers, sc.model().p_u()),
            })
        })
        .collect()
}

/// Mean simulated path on a time grid against the fluid trajectory under the
/// same policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub fluid_x: Vec<f64>,
    pub fluid_y: Vec<f64>,
    /// `max_t |mean(t) - fluid(t)| / max_t |fluid(t)|`, worst of the two coordinates.
    pub sup_rel_error: f64,
}

pub fn tracking_error(
    scenario: &Scenario,
    s0: (u64, u64),
    horizon: f64,
    step: f64,
    n_reps: usize,
    seed: u64,
) -> Result<TrackingReport> {
    let fp = scenario.build_fluid_policy()?;
    let fp = std::sync::Arc::new(fp);
    let pol = InterventionPolicy::Fluid(fp.clone());
    let paths: Vec<Vec<(f64, f64)>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut cfg = SimConfig::new(horizon, s0, seed).stream(i);
            cfg.path_step = Some(step);
            let run = simulate(scenario, &pol, &cfg)?;
            Ok(run.path.iter().map(|p| (p.x as f64, p.y as f64)).collect())
        })
        .collect::<Result<_>>()?;
    let n_pts = paths[0].len();
    let times: Vec<f64> = (0..n_pts).map(|k| k as f64 * step).collect();
    let mut mean_x = vec![0.0; n_pts];
    let mut mean_y = vec![0.0; n_pts];
    for path in &paths {
        for (k, &(x, y)) in path.iter().enumerate() {
            mean_x[k] += x / n_reps as f64;
            mean_y[k] += y / n_reps as f64;
        }
    }
    let dt = (step / 100.0).min(0.01);
    let traj = integrate(
        scenario.model(),
        FluidState::new(s0.0 as f64, s0.1 as f64),
        |s, _| fp.p(s),
        horizon,
        dt,
    )?;
    let at = |t: f64| {
        let k = traj.times.partition_point(|&u| u < t - 0.5 * dt);
        traj.states[k.min(traj.states.len() - 1)]
    };
    let fluid_x: Vec<f64> = times.iter().map(|&t| at(t).x).collect();
    let fluid_y: Vec<f64> = times.iter().map(|&t| at(t).y).collect();
    let sup = |a: &[f64], b: &[f64]| {
        let num = a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let den = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        num / den
    };
    let sup_rel_error = sup(&mean_x, &fluid_x).max(sup(&mean_y, &fluid_y));
    Ok(TrackingReport {
        times,
        mean_x,
        mean_y,
        fluid_x,
        fluid_y,
        sup_rel_error,
    })
}
