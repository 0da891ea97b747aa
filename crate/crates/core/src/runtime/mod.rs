//! Online execution of compiled monitors.

mod dynamic;

use thiserror::Error;

use crate::compile::{ArtifactState, Mode, MonitorArtifact};
use crate::semilattice::DomainMeta;

pub use dynamic::DynDomain;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("configuration counts need a configuration monitor")]
    NotConfigDomain,
}

/// Ruled-out share of the configuration universe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountInfo {
    pub in_set: u128,
    pub ruled_out: u128,
    pub percent_ruled_out: f64,
}

/// A monitor being fed observations one at a time.
#[derive(Debug, Clone)]
pub struct MonitorSession<'a> {
    artifact: &'a MonitorArtifact,
    mode: Mode,
    /// `None` once out of language.
    state: Option<u32>,
    steps: usize,
}

impl<'a> MonitorSession<'a> {
    /// A session in the artifact's own mode.
    pub fn new(artifact: &'a MonitorArtifact) -> Self {
        Self::with_mode(artifact, artifact.mode)
    }

    pub fn with_mode(artifact: &'a MonitorArtifact, mode: Mode) -> Self {
        MonitorSession {
            artifact,
            mode,
            state: Some(artifact.initial),
            steps: 0,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> Option<u32> {
        self.state
    }

    pub fn reset(&mut self) {
        self.state = Some(self.artifact.initial);
        self.steps = 0;
    }

    /// Feeds one observation and returns the state reached, if still in
    /// the language.
    pub fn step(&mut self, action: &str) -> Result<Option<&'a ArtifactState>, RuntimeError> {
        self.steps += 1;
        let Some(a) = self.artifact.action_id(action) else {
            return match self.mode {
                Mode::Strict => Err(RuntimeError::UnknownAction(action.to_string())),
                Mode::Relaxed => Ok(self.current()),
            };
        };
        self.state = match (self.state, self.mode) {
            (None, _) => None,
            (Some(q), Mode::Strict) => self.artifact.step(q, a),
            (Some(q), Mode::Relaxed) => Some(self.artifact.step(q, a).unwrap_or(q)),
        };
        Ok(self.current())
    }

    pub fn current(&self) -> Option<&'a ArtifactState> {
        self.state.map(|q| &self.artifact.states[q as usize])
    }

    /// Canonical current verdict; `None` when out of language.
    pub fn verdict(&self) -> Option<&'a str> {
        self.current().map(|s| s.verdict.as_str())
    }

    /// Configuration counts of the current verdict; `Ok(None)` when out of
    /// language.
    pub fn current_count(&self) -> Result<Option<CountInfo>, RuntimeError> {
        let universe = universe(self.artifact)?;
        Ok(self.current().map(|s| count_info(s, universe)))
    }
}

fn universe(artifact: &MonitorArtifact) -> Result<u128, RuntimeError> {
    match &artifact.domain {
        DomainMeta::Config { universe, .. } => universe.parse().map_err(|_| RuntimeError::NotConfigDomain),
        _ => Err(RuntimeError::NotConfigDomain),
    }
}

fn count_info(s: &ArtifactState, universe: u128) -> CountInfo {
    let in_set: u128 = s.count.as_deref().and_then(|c| c.parse().ok()).unwrap_or(universe);
    let ruled_out = universe - in_set;
    CountInfo {
        in_set,
        ruled_out,
        percent_ruled_out: if universe == 0 {
            0.0
        } else {
            ruled_out as f64 / universe as f64 * 100.0
        },
    }
}

/// Action names of a trace file: one per line, `#` starts a comment.
pub fn parse_trace(text: &str) -> Result<Vec<(usize, String)>, RuntimeError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if line.split_whitespace().count() > 1 {
            return Err(RuntimeError::Trace {
                line: i + 1,
                message: format!("expected one action per line, got {line:?}"),
            });
        }
        out.push((i + 1, line.to_string()));
    }
    Ok(out)
}

/// One observation and the verdict after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub line: usize,
    pub action: String,
    /// `None` when out of language.
    pub verdict: Option<String>,
    pub state: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub initial: String,
    pub steps: Vec<TraceStep>,
}

impl Trajectory {
    /// The last verdict (the initial one for an empty trace).
    pub fn final_verdict(&self) -> Option<&str> {
        match self.steps.last() {
            Some(s) => s.verdict.as_deref(),
            None => Some(&self.initial),
        }
    }
}

/// Replays a trace file; unknown actions in strict mode are reported with
/// their line number.
pub fn replay(artifact: &MonitorArtifact, trace: &str, mode: Mode) -> Result<Trajectory, RuntimeError> {
    let mut session = MonitorSession::with_mode(artifact, mode);
    let initial = session.verdict().expect("sessions start in the language").to_string();
    let mut steps = Vec::new();
    for (line, action) in parse_trace(trace)? {
        session.step(&action).map_err(|e| RuntimeError::Trace {
            line,
            message: e.to_string(),
        })?;
        steps.push(TraceStep {
            line,
            verdict: session.verdict().map(str::to_string),
            state: session.state(),
            action,
        });
    }
    Ok(Trajectory { initial, steps })
}
