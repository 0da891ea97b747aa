//! Size tables and Monte-Carlo specificity of configuration monitors.

use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::compile::{
    determinize, minimize, minimize_relaxed, strip_self_loops, CompileError, Mode, MonitorArtifact, Provenance,
};
use crate::model::{ActionId, AnnotatedTs, StateId};
use crate::semilattice::{ConfigDomain, DomainMeta};
use crate::synth::{project, track};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("monitor action {0:?} is not an action of the model")]
    AlphabetMismatch(String),
    #[error("specificity needs a configuration monitor")]
    NotConfigMonitor,
    #[error("the monitor left its language in run {run}; was it synthesized from this model?")]
    OutOfLanguage { run: usize },
    #[error("cannot observe {k} of {actions} actions")]
    TooManyActions { k: usize, actions: usize },
    #[error("worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// One row of a size table. Sizes are `(states, transitions)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeRow {
    pub configurations: String,
    pub actions: usize,
    pub fts: (usize, usize),
    pub monitor: (usize, usize),
    pub minimized: (usize, usize),
    pub relaxed: (usize, usize),
    /// Wall time of synthesis through minimization; not part of any
    /// deterministic output.
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Sizes of the configuration monitor for `observable` (all actions if
/// `None`).
pub fn size_report(fts: &AnnotatedTs<ConfigDomain>, observable: Option<&[ActionId]>) -> Result<SizeRow, EvalError> {
    let start = Instant::now();
    let all: Vec<ActionId> = fts.ts().alphabet().ids().collect();
    let tracked = track(fts);
    let m = project(&tracked, observable.unwrap_or(&all));
    let det = determinize(&m)?;
    let min = minimize(&det);
    let elapsed = start.elapsed();
    let relaxed = strip_self_loops(&minimize_relaxed(&det));
    let size = |s, t| (s, t);
    Ok(SizeRow {
        configurations: fts.domain().universe_size().to_string(),
        actions: fts.ts().alphabet().len(),
        fts: size(fts.ts().num_states(), fts.ts().num_transitions()),
        monitor: size(det.num_states(), det.num_transitions()),
        minimized: size(min.num_states(), min.num_transitions()),
        relaxed: size(relaxed.num_states(), relaxed.num_transitions()),
        elapsed,
    })
}

/// What a run does when its configuration's system has no enabled action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadEnd {
    /// End the run and keep its verdict.
    Stop,
    /// Discard the run and start over with a fresh configuration.
    Resample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub dead_end: DeadEnd,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            runs: 10_000,
            steps: 200,
            seed: 0,
            dead_end: DeadEnd::Stop,
            workers: None,
        }
    }
}

/// Resampling gives up after this many dead-ended attempts and keeps the last.
const MAX_RESAMPLES: usize = 100;

/// Expected ruled-out percentage after the configured number of steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecificityReport {
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Runs that reached a state without enabled actions.
    pub dead_ends: usize,
}

/// A featured system paired with a configuration monitor over a subset of
/// its actions.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    fts: &'a AnnotatedTs<ConfigDomain>,
    /// Monitor action of each model action, `None` if unobserved.
    observed: Vec<Option<usize>>,
    width: usize,
    next: Vec<Option<u32>>,
    initial: u32,
    /// Ruled-out percentage of each monitor state.
    ruled_out: Vec<f64>,
}

struct Outcome {
    percent: f64,
    dead_end: bool,
}

impl<'a> Simulator<'a> {
    pub fn new(fts: &'a AnnotatedTs<ConfigDomain>, monitor: &MonitorArtifact) -> Result<Self, EvalError> {
        let DomainMeta::Config { universe, .. } = &monitor.domain else {
            return Err(EvalError::NotConfigMonitor);
        };
        let universe: f64 = universe.parse::<u128>().map_err(|_| EvalError::NotConfigMonitor)? as f64;
        let alphabet = fts.ts().alphabet();
        if let Some(a) = monitor.actions.iter().find(|a| alphabet.id(a).is_none()) {
            return Err(EvalError::AlphabetMismatch(a.clone()));
        }
        let observed = alphabet.names().iter().map(|n| monitor.action_id(n).map(ActionId::index)).collect();
        let ruled_out = monitor
            .states
            .iter()
            .map(|s| {
                let count: f64 = s.count.as_deref().and_then(|c| c.parse::<u128>().ok()).map_or(universe, |c| c as f64);
                if universe == 0.0 {
                    0.0
                } else {
                    (universe - count) / universe * 100.0
                }
            })
            .collect();
        Ok(Simulator {
            fts,
            observed,
            width: monitor.actions.len(),
            next: monitor.states.iter().flat_map(|s| s.next.iter().copied()).collect(),
            initial: monitor.initial,
            ruled_out,
        })
    }

    fn rng(seed: u64, run: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        rng
    }

    /// Successors of each state under one configuration.
    fn behaviour(&self, config: u128) -> (Vec<StateId>, Vec<Vec<(ActionId, StateId)>>) {
        let d = self.fts.domain();
        let ts = self.fts.ts();
        let alive: Vec<bool> = ts.states().map(|s| d.contains(self.fts.state_annot(s), config)).collect();
        let initial = ts.initial().iter().copied().filter(|s| alive[s.index()]).collect();
        let adj = ts
            .states()
            .map(|s| {
                self.fts
                    .outgoing(s)
                    .filter(|(t, g)| alive[t.target.index()] && d.contains(g, config))
                    .map(|(t, _)| (t.action, t.target))
                    .collect()
            })
            .collect();
        (initial, adj)
    }

    /// Ruled-out percentage after each step of one run (index 0 is before
    /// any step); shorter than `steps + 1` if the run dead-ends.
    pub fn trajectory(&self, seed: u64, run: usize, steps: usize) -> Result<Vec<f64>, EvalError> {
        let mut rng = Self::rng(seed, run);
        let mut out = Vec::new();
        self.walk(&mut rng, steps, run, |p| out.push(p))?;
        Ok(out)
    }

    /// Walks one configuration; reports the percentage after each step.
    fn walk(&self, rng: &mut ChaCha8Rng, steps: usize, run: usize, mut each: impl FnMut(f64)) -> Result<bool, EvalError> {
        let config = self.fts.domain().sample(rng);
        let (initial, adj) = self.behaviour(config);
        let mut q = self.initial;
        each(self.ruled_out[q as usize]);
        if initial.is_empty() {
            return Ok(true);
        }
        let mut s = initial[rng.random_range(0..initial.len())];
        for _ in 0..steps {
            let succ = &adj[s.index()];
            if succ.is_empty() {
                return Ok(true);
            }
            let (a, t) = succ[rng.random_range(0..succ.len())];
            s = t;
            if let Some(b) = self.observed[a.index()] {
                q = self.next[q as usize * self.width + b].ok_or(EvalError::OutOfLanguage { run })?;
            }
            each(self.ruled_out[q as usize]);
        }
        Ok(false)
    }

    fn run_one(&self, cfg: &SimulationConfig, run: usize) -> Result<Outcome, EvalError> {
        let mut rng = Self::rng(cfg.seed, run);
        let mut attempts = 0;
        loop {
            let mut last = 0.0;
            let dead_end = self.walk(&mut rng, cfg.steps, run, |p| last = p)?;
            attempts += 1;
            if !dead_end || cfg.dead_end == DeadEnd::Stop || attempts == MAX_RESAMPLES {
                return Ok(Outcome { percent: last, dead_end });
            }
        }
    }

    pub fn run(&self, cfg: &SimulationConfig) -> Result<SpecificityReport, EvalError> {
        let outcomes = with_workers(cfg.workers, || {
            (0..cfg.runs)
                .into_par_iter()
                .map(|i| self.run_one(cfg, i))
                .collect::<Result<Vec<_>, _>>()
        })??;
        // Sequential reduction in run order keeps the sums bit-identical.
        let n = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| o.percent).sum::<f64>() / n.max(1.0);
        let var = if outcomes.len() > 1 {
            outcomes.iter().map(|o| (o.percent - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(SpecificityReport {
            runs: cfg.runs,
            steps: cfg.steps,
            seed: cfg.seed,
            mean,
            stderr: (var / n.max(1.0)).sqrt(),
            dead_ends: outcomes.iter().filter(|o| o.dead_end).count(),
        })
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, EvalError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| EvalError::Workers(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn simulate_specificity(
    fts: &AnnotatedTs<ConfigDomain>,
    monitor: &MonitorArtifact,
    cfg: &SimulationConfig,
) -> Result<SpecificityReport, EvalError> {
    Simulator::new(fts, monitor)?.run(cfg)
}

/// The configuration monitor observing `observable`, strict and minimized.
pub fn config_monitor(fts: &AnnotatedTs<ConfigDomain>, observable: &[ActionId]) -> Result<MonitorArtifact, EvalError> {
    monitor_from(&track(fts), observable)
}

fn monitor_from(
    tracked: &crate::vts::Vts<ConfigDomain>,
    observable: &[ActionId],
) -> Result<MonitorArtifact, EvalError> {
    let names = tracked.alphabet();
    let obs = observable.iter().map(|&a| names.name(a)).join(",");
    let stages = vec!["track".into(), format!("project({obs})"), "determinize".into(), "minimize".into()];
    let d = minimize(&determinize(&project(tracked, observable))?);
    Ok(MonitorArtifact::new(&d, Mode::Strict, Provenance::new(b"", stages)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetResult {
    pub observable: Vec<String>,
    pub monitor_states: usize,
    pub report: SpecificityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub k: usize,
    /// C(|Act|, k).
    pub subsets: u128,
    /// True when the budget stopped the sweep early.
    pub truncated: bool,
    /// Evaluated subsets in lexicographic order.
    pub results: Vec<SubsetResult>,
}

impl SweepReport {
    /// The subset with the highest mean (first on ties).
    pub fn max(&self) -> Option<&SubsetResult> {
        self.results
            .iter()
            .reduce(|best, r| if r.report.mean > best.report.mean { r } else { best })
    }

    pub fn min(&self) -> Option<&SubsetResult> {
        self.results
            .iter()
            .reduce(|best, r| if r.report.mean < best.report.mean { r } else { best })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["observable", "monitor_states", "runs", "steps", "mean", "stderr", "dead_ends"])
            .expect("in-memory write");
        for r in &self.results {
            w.write_record([
                r.observable.join(" "),
                r.monitor_states.to_string(),
                r.report.runs.to_string(),
                r.report.steps.to_string(),
                format!("{:.4}", r.report.mean),
                format!("{:.4}", r.report.stderr),
                r.report.dead_ends.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Specificity of every `k`-subset of observable actions, evaluating at
/// most `budget` subsets.
pub fn sweep_observability(
    fts: &AnnotatedTs<ConfigDomain>,
    k: usize,
    cfg: &SimulationConfig,
    budget: Option<usize>,
) -> Result<SweepReport, EvalError> {
    let n = fts.ts().alphabet().len();
    if k > n {
        return Err(EvalError::TooManyActions { k, actions: n });
    }
    let subsets = binomial(n, k);
    let limit = budget.unwrap_or(usize::MAX);
    let tracked = track(fts);
    let mut results = Vec::new();
    for subset in fts.ts().alphabet().ids().combinations(k).take(limit) {
        let monitor = monitor_from(&tracked, &subset)?;
        let report = simulate_specificity(fts, &monitor, cfg)?;
        results.push(SubsetResult {
            observable: monitor.actions.clone(),
            monitor_states: monitor.num_states(),
            report,
        });
    }
    Ok(SweepReport {
        k,
        subsets,
        truncated: (results.len() as u128) < subsets,
        results,
    })
}

#[cfg(test)]
mod tests;
