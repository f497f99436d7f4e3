//! Command-line front end. Exit codes: 0 success, 1 usage or validation error,
//! 2 runtime failure. Errors go to stderr as one JSON object.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::experiments::{
    compare_policies, derive_seed, run_grid, tradeoff_curve, write_atomic, CostForm, ExperimentGrid,
    LongRunPlan, Mode,
};
use crate::fluid::FluidState;
use crate::scenario::{PolicyKind, PolicySpec, Scenario};
use crate::sim::{estimate_longrun, simulate, LongRunSettings, SimConfig};
use crate::{solve_equilibrium, Error, InterventionPolicy};

#[derive(Debug, Parser)]
#[command(name = "returnctl", version, about = "Return-probability control for queues with returns")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Finite,
    Longrun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Fluid,
    Equilibrium,
    Simple,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fluid => PolicyKind::Fluid,
            PolicyArg::Equilibrium => PolicyKind::Equilibrium,
            PolicyArg::Simple => PolicyKind::Simple,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    CostQuadratic,
    CostLinear,
    RateQuadratic,
    RateLinear,
    TimeVaryingQuadratic,
    TimeVaryingLinear,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal constant return probability and its long-run cost.
    SolveEquilibrium { scenario: PathBuf },
    /// Synthesizes the fluid policy and reports its contour table.
    BuildPolicy { scenario: PathBuf },
    /// Policy raster over a state window as CSV `x,y,p,region`.
    PolicyGrid {
        scenario: PathBuf,
        /// `x0:x1:y0:y1`.
        #[arg(long, default_value = "0:150:0:150")]
        window: String,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Policy decision at one state.
    PolicyQuery { scenario: PathBuf, x: f64, y: f64 },
    /// Simulates replications and reports ledgers.
    Simulate {
        scenario: PathBuf,
        /// Defaults to the scenario's own policy section.
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        #[arg(long, default_value_t = 90.0)]
        horizon: f64,
        /// Initial state `x,y`; defaults to the rounded equilibrium.
        #[arg(long)]
        s0: Option<String>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Batch-means long-run estimate instead of finite replications.
        #[arg(long)]
        longrun: bool,
        #[arg(long, default_value_t = 500.0)]
        warmup: f64,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        #[arg(long, default_value_t = 500.0)]
        batch_length: f64,
        /// Event log CSV of the first replication.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Fluid policy against a benchmark with a Fieller interval.
    Compare {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "equilibrium")]
        benchmark: PolicyArg,
        #[arg(long, value_enum, default_value = "finite")]
        mode: ModeArg,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        /// Finite horizon, or measured days per long-run replication.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value = "65,65")]
        s0: String,
        #[arg(long, default_value_t = 500.0)]
        warmup: f64,
    },
    /// Runs a parameter grid to a resumable CSV.
    RunGrid {
        /// Grid JSON, or a base scenario when `--preset` is given.
        input: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Holding-cost sweep: tradeoff curve and long-run reductions.
    Casestudy {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,1500,2000,2500,3000")]
        hs: Vec<f64>,
        #[arg(long, default_value_t = 40)]
        reps: usize,
        #[arg(long, default_value_t = 10_000.0)]
        horizon: f64,
        #[arg(long, default_value_t = 500.0)]
        warmup: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Run(Error::Validation(_) | Error::Parse(_)) => 1,
            Failure::Run(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Run(Error::Validation(_)) => "validation",
            Failure::Run(Error::Parse(_)) => "parse",
            Failure::Run(Error::Io(_)) => "io",
            Failure::Run(_) => "runtime",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Run(e) => e.to_string(),
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return report(&Failure::Usage(e.to_string().trim().to_owned()));
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> i32 {
    let v = json!({ "error": f.kind(), "message": f.message(), "exit_code": f.code() });
    eprintln!("{v}");
    f.code()
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let jobs = cli.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    pool.install(|| execute(cli))
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_path(path).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("cannot read {}: {io}", path.display())),
        e => Failure::Run(e),
    })
}

fn parse_state(s: &str) -> Result<(u64, u64), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => match (x.trim().parse(), y.trim().parse()) {
            (Ok(x), Ok(y)) => Ok((x, y)),
            _ => Err(Failure::Usage(format!("state '{s}' is not two non-negative integers"))),
        },
        _ => Err(Failure::Usage(format!("state '{s}' must be 'x,y'"))),
    }
}

fn parse_window(s: &str) -> Result<[f64; 4], Failure> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("window '{s}' must be x0:x1:y0:y1")))?;
    match v.as_slice() {
        &[x0, x1, y0, y1] if x0 >= 0.0 && y0 >= 0.0 && x1 >= x0 && y1 >= y0 => Ok([x0, x1, y0, y1]),
        _ => Err(Failure::Usage(format!("window '{s}' must be x0:x1:y0:y1 with x0 <= x1, y0 <= y1"))),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, bytes)?,
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Run(e.into()))?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, v: &T) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Run(Error::Parse(e.to_string())))?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Run(Error::Parse(e.to_string())))?;
    }
    w.into_inner().map_err(|e| Failure::Run(Error::Parse(e.to_string())))
}

fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::SolveEquilibrium { scenario } => {
            let sc = load(scenario)?;
            let eq = solve_equilibrium(sc.model());
            emit_json(out, &json!({ "scenario": sc.name(), "equilibrium": eq }))
        }
        Command::BuildPolicy { scenario } => {
            let sc = load(scenario)?;
            let pol = sc.build_fluid_policy()?;
            let lines: Vec<_> = pol
                .contour_table()
                .map(|t| t.lines.clone())
                .unwrap_or_default();
            emit_json(
                out,
                &json!({
                    "scenario": sc.name(),
                    "equilibrium": pol.problem().equilibrium(),
                    "settings": pol.settings(),
                    "shot_samples": pol.n_shot_samples(),
                    "contour_lines": lines,
                }),
            )
        }
        Command::PolicyGrid {
            scenario,
            window,
            step,
        } => {
            let sc = load(scenario)?;
            let [x0, x1, y0, y1] = parse_window(window)?;
            if !(*step > 0.0) {
                return Err(Failure::Usage("step must be positive".into()));
            }
            let pol = sc.build_fluid_policy()?;
            #[derive(Serialize)]
            struct Cell {
                x: f64,
                y: f64,
                p: f64,
                region: char,
            }
            let mut rows = Vec::new();
            for &x in &grid_points(x0, x1, *step) {
                for &y in &grid_points(y0, y1, *step) {
                    let d = pol.query(FluidState::new(x, y));
                    rows.push(Cell {
                        x,
                        y,
                        p: d.p,
                        region: d.region.tag(),
                    });
                }
            }
            emit(out, &csv_bytes(&rows)?)
        }
        Command::PolicyQuery { scenario, x, y } => {
            let sc = load(scenario)?;
            if !(*x >= 0.0 && *y >= 0.0) {
                return Err(Failure::Usage("state must be non-negative".into()));
            }
            let pol = sc.build_fluid_policy()?;
            emit_json(out, &pol.query(FluidState::new(*x, *y)))
        }
        Command::Simulate {
            scenario,
            policy,
            horizon,
            s0,
            reps,
            longrun,
            warmup,
            batches,
            batch_length,
            events,
        } => {
            let sc = load(scenario)?;
            let s0 = match s0 {
                Some(s) => parse_state(s)?,
                None => sc.equilibrium_state(),
            };
            let pol = match policy {
                Some(k) => sc.build_policy(PolicyKind::from(*k).into())?,
                None => sc.file_policy()?,
            };
            if *longrun {
                let settings = LongRunSettings {
                    warmup: *warmup,
                    n_batches: *batches,
                    batch_length: *batch_length,
                    alpha: 0.05,
                };
                let est = estimate_longrun(&sc, &pol, &settings, s0, cli.seed)?;
                return emit_json(out, &json!({ "policy": pol.name(), "longrun": est }));
            }
            if *reps == 0 {
                return Err(Failure::Usage("reps must be at least 1".into()));
            }
            let mut ledgers = Vec::with_capacity(*reps);
            for i in 0..*reps as u64 {
                let mut cfg = SimConfig::new(*horizon, s0, cli.seed).stream(i);
                cfg.record_events = i == 0 && events.is_some();
                let run = simulate(&sc, &pol, &cfg).map_err(Error::from)?;
                if let (0, Some(path)) = (i, events) {
                    let mut buf = Vec::new();
                    run.write_events_csv(&mut buf).map_err(|e| Failure::Run(e.into()))?;
                    write_atomic(path, &buf)?;
                }
                ledgers.push(json!({
                    "stream": i,
                    "total": run.ledger.total(),
                    "final_state": run.final_state,
                    "ledger": run.ledger,
                }));
            }
            emit_json(out, &json!({ "policy": pol.name(), "s0": s0, "horizon": horizon, "runs": ledgers }))
        }
        Command::Compare {
            scenario,
            benchmark,
            mode,
            reps,
            horizon,
            s0,
            warmup,
        } => {
            let sc = load(scenario)?;
            let mode = match mode {
                ModeArg::Finite => Mode::Finite {
                    horizon: horizon.unwrap_or(90.0),
                    s0: parse_state(s0)?,
                },
                ModeArg::Longrun => Mode::LongRun {
                    warmup: *warmup,
                    length: horizon.unwrap_or(10_000.0),
                },
            };
            if *reps < 2 {
                return Err(Failure::Usage("reps must be at least 2".into()));
            }
            let fluid = InterventionPolicy::Fluid(Arc::new(sc.build_fluid_policy()?));
            let bench = sc.build_policy(PolicyKind::from(*benchmark).into())?;
            let c = compare_policies(&sc, &fluid, &bench, mode, *reps, cli.seed, 0.05)?;
            emit_json(out, &c)
        }
        Command::RunGrid {
            input,
            preset,
            reps,
        } => {
            let mut grid = match preset {
                Some(p) => {
                    let base = load(input)?.spec().clone();
                    match p {
                        Preset::CostQuadratic => ExperimentGrid::cost_grid(base, CostForm::Quadratic),
                        Preset::CostLinear => ExperimentGrid::cost_grid(base, CostForm::Linear),
                        Preset::RateQuadratic => ExperimentGrid::rate_grid(base, CostForm::Quadratic),
                        Preset::RateLinear => ExperimentGrid::rate_grid(base, CostForm::Linear),
                        Preset::TimeVaryingQuadratic => {
                            ExperimentGrid::time_varying_grid(base, CostForm::Quadratic)
                        }
                        Preset::TimeVaryingLinear => ExperimentGrid::time_varying_grid(base, CostForm::Linear),
                    }
                }
                None => {
                    let text = std::fs::read_to_string(input).map_err(|e| Failure::Run(e.into()))?;
                    serde_json::from_str(&text).map_err(|e| Failure::Run(Error::Parse(e.to_string())))?
                }
            };
            grid.seed = cli.seed;
            if let Some(r) = reps {
                grid.n_reps = *r;
            }
            grid.cells()?;
            match out {
                Some(p) => {
                    run_grid(&grid, Some(p))?;
                    Ok(())
                }
                None => {
                    let rows = run_grid(&grid, None)?;
                    emit(None, &csv_bytes(&rows)?)
                }
            }
        }
        Command::Casestudy {
            scenario,
            hs,
            reps,
            horizon,
            warmup,
        } => {
            let sc = load(scenario)?;
            for &h in hs {
                sc.with(|s| s.h = h)?;
            }
            let plan = LongRunPlan {
                warmup: *warmup,
                length: *horizon,
                n_reps: *reps,
            };
            let curve = tradeoff_curve(&sc, hs, plan, derive_seed(cli.seed, 0))?;
            let mode = Mode::LongRun {
                warmup: *warmup,
                length: *horizon,
            };
            #[derive(Serialize)]
            struct Row {
                h: f64,
                direct: f64,
                mean_queue: f64,
                mean_p: f64,
                red_equilibrium: f64,
                red_equilibrium_lo: Option<f64>,
                red_equilibrium_hi: Option<f64>,
                red_simple: f64,
                red_simple_lo: Option<f64>,
                red_simple_hi: Option<f64>,
            }
            let mut rows = Vec::new();
            for (i, (&h, pt)) in hs.iter().zip(&curve).enumerate() {
                let s = sc.with(|s| s.h = h)?;
                let fluid = s.build_policy(PolicySpec::Fluid { settings: None })?;
                let seed = derive_seed(cli.seed, 1 + i as u64);
                let eq = compare_policies(&s, &fluid, &s.build_policy(PolicySpec::Equilibrium)?, mode, *reps, seed, 0.05)?;
                let simple = compare_policies(&s, &fluid, &s.build_policy(PolicySpec::Simple)?, mode, *reps, seed, 0.05)?;
                rows.push(Row {
                    h,
                    direct: pt.direct.mean,
                    mean_queue: pt.mean_queue.mean,
                    mean_p: pt.summary.mean_p,
                    red_equilibrium: eq.rel_reduction,
                    red_equilibrium_lo: eq.rel_ci.map(|c| c.0),
                    red_equilibrium_hi: eq.rel_ci.map(|c| c.1),
                    red_simple: simple.rel_reduction,
                    red_simple_lo: simple.rel_ci.map(|c| c.0),
                    red_simple_hi: simple.rel_ci.map(|c| c.1),
                });
            }
            emit(out, &csv_bytes(&rows)?)
        }
    }
}
