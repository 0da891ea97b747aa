//! Synthesis pipelines: stage lists, presets and their execution.

use std::fmt;

use thiserror::Error;

use crate::compile::{
    determinize, minimize, minimize_relaxed, strip_self_loops, CompileError, DeterministicVts, Mode, MonitorArtifact,
    Provenance,
};
use crate::model::{ActionId, AnnotatedTs, Model, TransitionSystem};
use crate::semilattice::{split_top_level, Lifted, VerdictDomain};
use crate::synth::{self, Bound, SynthError};
use crate::vts::Vts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("pipeline: {0}")]
    Syntax(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    /// Raised by the resolver of `specialize` stages.
    #[error("{0}")]
    Resolve(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    /// Annotation tracking of the model.
    Track,
    /// The model's state annotations read directly as a VTS.
    AsVts,
    /// Product with the system model at the given path.
    Specialize(String),
    Lookahead,
    /// Observability projection; `None` means the model's observable actions.
    Project(Option<Vec<String>>),
    Delay(Bound),
    Loss(Bound),
    Lift,
    Determinize,
    Minimize,
    MinimizeRelaxed,
    StripSelfLoops,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Track => f.write_str("track"),
            Stage::AsVts => f.write_str("as-vts"),
            Stage::Specialize(p) => write!(f, "specialize({p})"),
            Stage::Lookahead => f.write_str("lookahead"),
            Stage::Project(None) => f.write_str("project"),
            Stage::Project(Some(obs)) => write!(f, "project({})", obs.join(",")),
            Stage::Delay(b) => write!(f, "delay({b})"),
            Stage::Loss(b) => write!(f, "loss({b})"),
            Stage::Lift => f.write_str("lift"),
            Stage::Determinize => f.write_str("determinize"),
            Stage::Minimize => f.write_str("minimize"),
            Stage::MinimizeRelaxed => f.write_str("minimize-relaxed"),
            Stage::StripSelfLoops => f.write_str("strip-self-loops"),
        }
    }
}

impl Stage {
    fn parse(text: &str) -> Result<Stage, PipelineError> {
        let text = text.trim();
        let (name, arg) = match text.split_once('(') {
            Some((name, rest)) => {
                let arg = rest
                    .strip_suffix(')')
                    .ok_or_else(|| PipelineError::Syntax(format!("unbalanced parentheses in {text:?}")))?;
                (name.trim(), Some(arg.trim()))
            }
            None => (text, None),
        };
        let bound = |arg: Option<&str>| -> Result<Bound, PipelineError> {
            arg.ok_or_else(|| PipelineError::Syntax(format!("{name} needs a bound, e.g. {name}(1) or {name}(inf)")))?
                .parse()
                .map_err(PipelineError::Syntax)
        };
        let no_arg = |stage: Stage| match arg {
            None => Ok(stage),
            Some(_) => Err(PipelineError::Syntax(format!("stage {name} takes no argument"))),
        };
        match name {
            "track" => no_arg(Stage::Track),
            "as-vts" => no_arg(Stage::AsVts),
            "specialize" => match arg {
                Some(p) if !p.is_empty() => Ok(Stage::Specialize(p.to_string())),
                _ => Err(PipelineError::Syntax("specialize needs a model path".into())),
            },
            "lookahead" => no_arg(Stage::Lookahead),
            "project" => Ok(Stage::Project(arg.map(|a| {
                a.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }))),
            "delay" => Ok(Stage::Delay(bound(arg)?)),
            "loss" => Ok(Stage::Loss(bound(arg)?)),
            "lift" => no_arg(Stage::Lift),
            "determinize" | "det" => no_arg(Stage::Determinize),
            "minimize" | "min" => no_arg(Stage::Minimize),
            "minimize-relaxed" => no_arg(Stage::MinimizeRelaxed),
            "strip-self-loops" => no_arg(Stage::StripSelfLoops),
            "" => Err(PipelineError::Syntax("empty stage".into())),
            other => Err(PipelineError::Syntax(format!("unknown stage {other:?}"))),
        }
    }

    fn is_deterministic_stage(&self) -> bool {
        matches!(self, Stage::Minimize | Stage::MinimizeRelaxed | Stage::StripSelfLoops)
    }
}

/// Named stage lists.
pub const PRESETS: &[(&str, &str)] = &[
    ("config-monitor", "track,project,determinize,minimize"),
    ("diagnoser", "track,lift,project,determinize,minimize"),
    ("predictive-diagnoser", "track,lookahead,lift,project,determinize,minimize"),
];

/// An ordered, validated list of stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineSpec {
    stages: Vec<Stage>,
}

impl PipelineSpec {
    /// Parses a preset name or a comma-separated stage list such as
    /// `track,project(a,b),delay(2),det,min`.
    pub fn parse(text: &str) -> Result<PipelineSpec, PipelineError> {
        let text = text.trim();
        if let Some((_, stages)) = PRESETS.iter().find(|(name, _)| *name == text) {
            return PipelineSpec::parse(stages);
        }
        let stages = split_top_level(text)
            .into_iter()
            .map(Stage::parse)
            .collect::<Result<Vec<_>, _>>()?;
        PipelineSpec::new(stages)
    }

    pub fn new(stages: Vec<Stage>) -> Result<PipelineSpec, PipelineError> {
        let pre = |m: &str| Err(PipelineError::Precondition(m.to_string()));
        match stages.first() {
            Some(Stage::Track | Stage::AsVts) => {}
            _ => return pre("a pipeline starts with track or as-vts"),
        }
        if stages[1..].iter().any(|s| matches!(s, Stage::Track | Stage::AsVts)) {
            return pre("track and as-vts may only start a pipeline");
        }
        let Some(det) = stages.iter().position(|s| *s == Stage::Determinize) else {
            return pre("a monitor needs a determinize stage");
        };
        if stages[det + 1..].iter().any(|s| !s.is_deterministic_stage()) {
            return pre("only minimize, minimize-relaxed and strip-self-loops may follow determinize");
        }
        if let Some(s) = stages[..det].iter().find(|s| s.is_deterministic_stage()) {
            return Err(PipelineError::Precondition(format!("{s} requires determinize earlier")));
        }
        if stages.iter().filter(|s| **s == Stage::Lift).count() > 1 {
            return pre("lift may be applied at most once");
        }
        Ok(PipelineSpec { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Stages as recorded in provenance.
    pub fn describe(&self) -> Vec<String> {
        self.stages.iter().map(Stage::to_string).collect()
    }

    /// Language-relaxing pipelines produce monitors meant for relaxed runs.
    pub fn mode(&self) -> Mode {
        if self
            .stages
            .iter()
            .any(|s| matches!(s, Stage::MinimizeRelaxed | Stage::StripSelfLoops))
        {
            Mode::Relaxed
        } else {
            Mode::Strict
        }
    }
}

impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe().join(","))
    }
}

/// Size after one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: String,
    pub states: usize,
    pub transitions: usize,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub artifact: MonitorArtifact,
    pub report: Vec<StageReport>,
}

/// Loads the system model named by a `specialize` stage, returning it and
/// a digest recorded in provenance.
pub type Resolver<'r> = dyn Fn(&str) -> Result<(TransitionSystem, String), PipelineError> + 'r;

struct Run<'a, 'r> {
    model: &'a Model,
    resolve: &'r Resolver<'r>,
    mode: Mode,
    report: Vec<StageReport>,
    provenance: Vec<String>,
}

impl Run<'_, '_> {
    fn record(&mut self, stage: &Stage, states: usize, transitions: usize, extra: Option<String>) {
        self.report.push(StageReport {
            stage: stage.to_string(),
            states,
            transitions,
        });
        self.provenance.push(match extra {
            Some(e) => format!("{stage}@{e}"),
            None => stage.to_string(),
        });
    }

    fn observables<D: VerdictDomain>(&self, m: &Vts<D>, obs: &Option<Vec<String>>) -> Result<Vec<ActionId>, PipelineError> {
        let names: Vec<String> = match obs {
            Some(names) => names.clone(),
            None => {
                let model = self.model.alphabet();
                self.model
                    .observable_or_all()
                    .into_iter()
                    .map(|a| model.name(a).to_string())
                    .collect()
            }
        };
        names
            .iter()
            .map(|n| {
                m.alphabet()
                    .id(n)
                    .ok_or_else(|| PipelineError::Precondition(format!("cannot observe {n:?}: not an action of the monitor")))
            })
            .collect()
    }

    /// Applies a stage that keeps the verdict domain.
    fn vts_stage<D: VerdictDomain>(&mut self, m: Vts<D>, stage: &Stage) -> Result<Vts<D>, PipelineError> {
        let mut extra = None;
        let out = match stage {
            Stage::Specialize(path) => {
                let (ts, digest) = (self.resolve)(path)?;
                extra = Some(digest);
                synth::specialize(&m, &ts)?
            }
            Stage::Lookahead => synth::lookahead(&m),
            Stage::Project(obs) => {
                let obs = self.observables(&m, obs)?;
                synth::project(&m, &obs)
            }
            Stage::Delay(b) => synth::delay(&m, *b),
            Stage::Loss(b) => synth::loss(&m, *b),
            _ => unreachable!("handled by the caller"),
        };
        self.record(stage, out.num_states(), out.num_transitions(), extra);
        Ok(out)
    }

    fn plain<D: VerdictDomain>(&mut self, mut m: Vts<D>, stages: &[Stage]) -> Result<MonitorArtifact, PipelineError> {
        for (i, stage) in stages.iter().enumerate() {
            match stage {
                Stage::Lift => {
                    let lifted = synth::lift(&m);
                    self.record(stage, lifted.num_states(), lifted.num_transitions(), None);
                    return self.lifted(lifted, &stages[i + 1..]);
                }
                Stage::Determinize => return self.finish(&m, &stages[i..]),
                _ => m = self.vts_stage(m, stage)?,
            }
        }
        unreachable!("validated pipelines determinize")
    }

    fn lifted<D: VerdictDomain>(&mut self, mut m: Vts<Lifted<D>>, stages: &[Stage]) -> Result<MonitorArtifact, PipelineError> {
        for (i, stage) in stages.iter().enumerate() {
            match stage {
                Stage::Determinize => return self.finish(&m, &stages[i..]),
                _ => m = self.vts_stage(m, stage)?,
            }
        }
        unreachable!("validated pipelines determinize")
    }

    fn finish<D: VerdictDomain>(&mut self, m: &Vts<D>, stages: &[Stage]) -> Result<MonitorArtifact, PipelineError> {
        let mut d: DeterministicVts<D> = determinize(m)?;
        self.record(&stages[0], d.num_states(), d.num_transitions(), None);
        for stage in &stages[1..] {
            d = match stage {
                Stage::Minimize => minimize(&d),
                Stage::MinimizeRelaxed => minimize_relaxed(&d),
                Stage::StripSelfLoops => strip_self_loops(&d),
                _ => unreachable!("validated"),
            };
            self.record(stage, d.num_states(), d.num_transitions(), None);
        }
        // Provenance is filled in once every stage has been recorded.
        Ok(MonitorArtifact::new(&d, self.mode, Provenance::new(b"", Vec::new())))
    }
}

fn source<D: VerdictDomain>(a: &AnnotatedTs<D>, stage: &Stage) -> Vts<D> {
    match stage {
        Stage::Track => synth::track(a),
        _ => Vts::from_state_annotations(a).pruned(),
    }
}

/// Runs `spec` on `model`, whose source text `model_bytes` is hashed into
/// the artifact's provenance.
pub fn run_pipeline(
    model: &Model,
    model_bytes: &[u8],
    spec: &PipelineSpec,
    resolve: &Resolver<'_>,
) -> Result<SynthOutput, PipelineError> {
    let mut run = Run {
        model,
        resolve,
        mode: spec.mode(),
        report: Vec::new(),
        provenance: Vec::new(),
    };
    let first = &spec.stages[0];
    let mut artifact = crate::with_annotated!(&model.body, a => {
        let m = source(a, first);
        run.record(first, m.num_states(), m.num_transitions(), None);
        run.plain(m, &spec.stages[1..])?
    }, plain _p => {
        return Err(PipelineError::Precondition(
            "the model carries no verdict annotations (declare a domain)".into(),
        ))
    });
    artifact.provenance = Provenance::new(model_bytes, run.provenance);
    Ok(SynthOutput {
        artifact,
        report: run.report,
    })
}

/// A resolver for pipelines without `specialize` stages.
pub fn no_resolver(path: &str) -> Result<(TransitionSystem, String), PipelineError> {
    Err(PipelineError::Resolve(format!("cannot load {path:?} here")))
}

#[cfg(test)]
mod tests;
