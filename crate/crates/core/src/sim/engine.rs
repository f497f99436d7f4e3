use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{
    sample_nhpp_next, CostLedger, DecisionEpoch, DurationDist, EventKind, EventRecord,
    InterventionPolicy, PathPoint, RunResult, SimConfig,
};
use crate::model::CostFunction;
use crate::scenario::Scenario;

/// Probabilities within this distance of `p_l` or `p_u` count as that level.
const LEVEL_EPS: f64 = 1e-12;

fn rng_for(cfg: &SimConfig) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);
    rng
}

/// State, ledger and output recording shared by both engines.
struct Book<'a> {
    cfg: &'a SimConfig,
    cost: &'a CostFunction,
    policy: &'a InterventionPolicy,
    decision: DecisionEpoch,
    h: f64,
    r: f64,
    n: u64,
    p_l: f64,
    p_u: f64,
    x: u64,
    y: u64,
    t: f64,
    ledger: CostLedger,
    next_checkpoint: usize,
    snapshots: Vec<CostLedger>,
    next_path: usize,
    path: Vec<PathPoint>,
    events: Vec<EventRecord>,
}

impl<'a> Book<'a> {
    fn new(scenario: &'a Scenario, policy: &'a InterventionPolicy, cfg: &'a SimConfig) -> Self {
        let m = scenario.model();
        Self {
            cfg,
            cost: m.cost(),
            policy,
            decision: scenario.decision,
            h: m.h(),
            r: m.r(),
            n: u64::from(m.system().n_servers),
            p_l: m.p_l(),
            p_u: m.p_u(),
            x: cfg.s0.0,
            y: cfg.s0.1,
            t: 0.0,
            ledger: CostLedger::default(),
            next_checkpoint: 0,
            snapshots: Vec::with_capacity(cfg.checkpoints.len()),
            next_path: 0,
            path: Vec::new(),
            events: Vec::new(),
        }
    }

    fn busy(&self) -> u64 {
        self.x.min(self.n)
    }

    fn accrue(&mut self, to: f64) {
        let dt = to - self.t;
        if dt > 0.0 {
            let q = self.x.saturating_sub(self.n) as f64;
            let busy = self.busy() as f64;
            let l = &mut self.ledger;
            l.holding += self.h * q * dt;
            l.queue_area += q * dt;
            l.busy_area += busy * dt;
            if self.x >= self.n {
                l.full_time += dt;
            }
            l.elapsed += dt;
            self.t = to;
        }
    }

    /// Advances the clock to `to` with the current state, emitting checkpoints
    /// and path samples on the way.
    fn advance(&mut self, to: f64) {
        loop {
            let cp = self.cfg.checkpoints.get(self.next_checkpoint).copied();
            let pt = self.cfg.path_step.map(|s| self.next_path as f64 * s);
            let cp = cp.filter(|&c| c <= to);
            let pt = pt.filter(|&p| p <= to);
            match (cp, pt) {
                (None, None) => break,
                (Some(c), p) if p.is_none_or(|p| c <= p) => {
                    self.accrue(c);
                    self.snapshots.push(self.ledger);
                    self.next_checkpoint += 1;
                }
                (_, Some(p)) => {
                    self.accrue(p);
                    self.path.push(PathPoint { t: p, x: self.x, y: self.y });
                    self.next_path += 1;
                }
                _ => unreachable!(),
            }
        }
        self.accrue(to);
    }

    fn log(&mut self, kind: EventKind, p: Option<f64>) {
        if self.cfg.record_events {
            self.events.push(EventRecord {
                t: self.t,
                kind,
                x: self.x,
                y: self.y,
                p,
            });
        }
    }

    fn arrival(&mut self) {
        self.x += 1;
        self.ledger.arrivals += 1;
        self.log(EventKind::Arrival, None);
    }

    fn returned(&mut self) {
        self.y -= 1;
        self.x += 1;
        self.ledger.return_events += 1;
        self.ledger.returns += self.r;
        self.log(EventKind::Return, None);
    }

    /// Service completion; returns whether the customer joins the orbit.
    fn completion(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let pre = self.x;
        self.x -= 1;
        let seen = match self.decision {
            DecisionEpoch::PostDeparture => self.x,
            DecisionEpoch::PreDeparture => pre,
        };
        let p = self.policy.choose(seen, self.y);
        let l = &mut self.ledger;
        l.completions += 1;
        l.sum_reduction += self.p_u - p;
        l.intervention += self.cost.eval(p);
        if p < self.p_u - LEVEL_EPS {
            l.interventions += 1;
        }
        if p <= self.p_l + LEVEL_EPS {
            l.at_p_l += 1;
        }
        let goes = rng.random::<f64>() < p;
        if goes {
            self.y += 1;
        }
        self.log(
            if goes {
                EventKind::Completion
            } else {
                EventKind::Departure
            },
            Some(p),
        );
        goes
    }

    fn finish(mut self) -> RunResult {
        let horizon = self.cfg.horizon;
        self.advance(horizon);
        // checkpoints past the horizon see the final ledger
        while self.snapshots.len() < self.cfg.checkpoints.len() {
            self.snapshots.push(self.ledger);
        }
        RunResult {
            ledger: self.ledger,
            snapshots: self.snapshots,
            path: self.path,
            events: self.events,
            s0: self.cfg.s0,
            final_state: (self.x, self.y),
            horizon,
            seed: self.cfg.seed,
            stream: self.cfg.stream,
        }
    }
}

fn exp_rate(d: &DurationDist) -> f64 {
    match *d {
        DurationDist::Exponential { rate } => rate,
        _ => unreachable!("checked by the caller"),
    }
}

/// Competing exponential clocks with aggregate rates; time-varying arrivals are
/// thinned from their bound.
pub(super) fn run_markovian(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    cfg: &SimConfig,
) -> RunResult {
    let mut rng = rng_for(cfg);
    let mut book = Book::new(scenario, policy, cfg);
    let arrivals = &scenario.arrivals;
    let lam = arrivals.bound();
    let mu = exp_rate(&scenario.service);
    let nu = exp_rate(&scenario.returns);
    loop {
        let service = mu * book.busy() as f64;
        let orbit = nu * book.y as f64;
        let total = lam + service + orbit;
        let e: f64 = rng.sample(Exp1);
        let t_next = book.t + e / total;
        if t_next > cfg.horizon {
            break;
        }
        book.advance(t_next);
        let u = rng.random::<f64>() * total;
        if u < lam {
            let accept = arrivals.accept_prob(t_next);
            if accept >= 1.0 || rng.random::<f64>() < accept {
                book.arrival();
            }
        } else if u < lam + service {
            book.completion(&mut rng);
        } else if book.y > 0 {
            book.returned();
        }
    }
    book.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Arrival,
    ServiceEnd,
    ReturnEnd,
}

#[derive(Debug, Clone, Copy)]
struct Ev {
    t: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Ev {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Ev {}
impl PartialOrd for Ev {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ev {
    fn cmp(&self, o: &Self) -> Ordering {
        self.t.total_cmp(&o.t).then(self.seq.cmp(&o.seq))
    }
}

struct Calendar {
    heap: BinaryHeap<Reverse<Ev>>,
    seq: u64,
}

impl Calendar {
    fn push(&mut self, t: f64, kind: Kind) {
        self.seq += 1;
        self.heap.push(Reverse(Ev {
            t,
            seq: self.seq,
            kind,
        }));
    }
}

/// Per-customer event calendar for general service and return laws.
pub(super) fn run_general(
    scenario: &Scenario,
    policy: &InterventionPolicy,
    cfg: &SimConfig,
) -> RunResult {
    let mut rng = rng_for(cfg);
    let mut book = Book::new(scenario, policy, cfg);
    let mut cal = Calendar {
        heap: BinaryHeap::new(),
        seq: 0,
    };
    for _ in 0..book.busy() {
        let s = scenario.service.sample(&mut rng);
        cal.push(s, Kind::ServiceEnd);
    }
    for _ in 0..book.y {
        let r = scenario.returns.sample(&mut rng);
        cal.push(r, Kind::ReturnEnd);
    }
    let first = sample_nhpp_next(&scenario.arrivals, 0.0, &mut rng);
    cal.push(first, Kind::Arrival);
    while let Some(Reverse(ev)) = cal.heap.pop() {
        if ev.t > cfg.horizon {
            break;
        }
        book.advance(ev.t);
        match ev.kind {
            Kind::Arrival => {
                book.arrival();
                if book.x <= book.n {
                    let s = scenario.service.sample(&mut rng);
                    cal.push(ev.t + s, Kind::ServiceEnd);
                }
                let next = sample_nhpp_next(&scenario.arrivals, ev.t, &mut rng);
                cal.push(next, Kind::Arrival);
            }
            Kind::ServiceEnd => {
                if book.completion(&mut rng) {
                    let r = scenario.returns.sample(&mut rng);
                    cal.push(ev.t + r, Kind::ReturnEnd);
                }
                if book.x >= book.n {
                    let s = scenario.service.sample(&mut rng);
                    cal.push(ev.t + s, Kind::ServiceEnd);
                }
            }
            Kind::ReturnEnd => {
                book.returned();
                if book.x <= book.n {
                    let s = scenario.service.sample(&mut rng);
                    cal.push(ev.t + s, Kind::ServiceEnd);
                }
            }
        }
    }
    book.finish()
}
