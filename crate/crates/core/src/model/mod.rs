//! Transition systems, annotated transition systems and the model file format.

mod format;
mod ts;

use std::sync::Arc;

use thiserror::Error;

use crate::semilattice::{
    BoolDomain, ConfigDomain, Configuration, DomainError, FaultDomain, Truth3, Truth5, VerdictDomain,
};

pub use format::{ActionSpec, FaultSpec, ModelSpec, StateSpec, TransitionSpec};
pub(crate) use ts::collect_marked;
pub use ts::{word_projection, ActionId, Alphabet, StateId, Transition, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("malformed model document: {0}")]
    Json(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("duplicate {kind} {name:?}")]
    Duplicate { kind: &'static str, name: String },
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("empty guard on transition {0}")]
    EmptyGuard(String),
    #[error("no initial state")]
    NoInitialState,
    #[error("{context}: {source}")]
    Domain { context: String, source: DomainError },
    #[error("invalid model: {0}")]
    Invalid(String),
}

impl ModelError {
    pub(crate) fn domain(context: impl Into<String>, source: DomainError) -> Self {
        ModelError::Domain {
            context: context.into(),
            source,
        }
    }
}

/// A transition system with verdicts on its states (`f`) and transitions (`g`).
#[derive(Debug, Clone)]
pub struct AnnotatedTs<D: VerdictDomain> {
    domain: D,
    ts: TransitionSystem,
    state_annot: Vec<D::Verdict>,
    trans_annot: Vec<D::Verdict>,
}

impl<D: VerdictDomain> AnnotatedTs<D> {
    /// Builds the system; every transition must occur once.
    pub fn new(
        domain: D,
        alphabet: Arc<Alphabet>,
        initial: Vec<StateId>,
        state_annot: Vec<D::Verdict>,
        transitions: Vec<(Transition, D::Verdict)>,
    ) -> Result<Self, ModelError> {
        let ts = TransitionSystem::new(
            alphabet,
            state_annot.len(),
            initial,
            transitions.iter().map(|(t, _)| *t).collect(),
        )?;
        if ts.num_transitions() != transitions.len() {
            let mut seen = std::collections::HashSet::new();
            let dup = transitions.iter().find(|(t, _)| !seen.insert(*t)).unwrap().0;
            return Err(ModelError::DuplicateTransition(format!(
                "{} -{}-> {}",
                dup.source,
                ts.alphabet().name(dup.action),
                dup.target
            )));
        }
        let mut slots: Vec<Option<D::Verdict>> = vec![None; transitions.len()];
        for (t, v) in transitions {
            slots[ts.transition_index(&t).unwrap()] = Some(v);
        }
        Ok(AnnotatedTs {
            domain,
            ts,
            state_annot,
            trans_annot: slots.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn ts(&self) -> &TransitionSystem {
        &self.ts
    }

    pub fn state_annot(&self, s: StateId) -> &D::Verdict {
        &self.state_annot[s.index()]
    }

    /// Annotation of the `i`-th transition of [`TransitionSystem::transitions`].
    pub fn trans_annot(&self, i: usize) -> &D::Verdict {
        &self.trans_annot[i]
    }

    /// Transitions with their annotations, in canonical order.
    pub fn annotated_transitions(&self) -> impl Iterator<Item = (&Transition, &D::Verdict)> {
        self.ts.transitions().iter().zip(&self.trans_annot)
    }

    /// Outgoing transitions of `s` with their annotations.
    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (&Transition, &D::Verdict)> {
        let out = self.ts.outgoing(s);
        let start = if out.is_empty() {
            0
        } else {
            self.ts.transition_index(&out[0]).unwrap()
        };
        out.iter().zip(&self.trans_annot[start..start + out.len()])
    }
}

/// The behavior of one configuration: keeps exactly the transitions whose
/// guard contains `config`.
pub fn project_config(
    fts: &AnnotatedTs<ConfigDomain>,
    config: Configuration,
) -> Result<TransitionSystem, ModelError> {
    let domain = fts.domain();
    if !domain.feature_model().is_valid(config) {
        return Err(ModelError::domain(
            "project",
            DomainError::InvalidVerdict {
                text: domain.format_config(config),
                reason: "configuration is not valid".into(),
            },
        ));
    }
    let kept = fts
        .annotated_transitions()
        .filter(|(_, g)| domain.contains(g, config))
        .map(|(t, _)| *t)
        .collect();
    TransitionSystem::new(
        fts.ts().alphabet().clone(),
        fts.ts().num_states(),
        fts.ts().initial().to_vec(),
        kept,
    )
}

/// A model and the verdict domain its annotations live in.
#[derive(Debug, Clone)]
pub enum ModelBody {
    Plain(TransitionSystem),
    Config(AnnotatedTs<ConfigDomain>),
    Faults(AnnotatedTs<FaultDomain>),
    BoolExpr(AnnotatedTs<BoolDomain>),
    Truth3(AnnotatedTs<Truth3>),
    Truth5(AnnotatedTs<Truth5>),
}

/// Calls `$body` with `$a` bound to the annotated system of any annotated model.
#[macro_export]
#[doc(hidden)]
macro_rules! with_annotated {
    ($model:expr, $a:ident => $body:expr, plain $p:ident => $plain:expr) => {
        match $model {
            $crate::model::ModelBody::Plain($p) => $plain,
            $crate::model::ModelBody::Config($a) => $body,
            $crate::model::ModelBody::Faults($a) => $body,
            $crate::model::ModelBody::BoolExpr($a) => $body,
            $crate::model::ModelBody::Truth3($a) => $body,
            $crate::model::ModelBody::Truth5($a) => $body,
        }
    };
}

/// A parsed model file.
#[derive(Debug, Clone)]
pub struct Model {
    pub state_names: Vec<String>,
    /// Actions marked observable, if any action is.
    pub observable: Option<Vec<ActionId>>,
    /// Fault mapping from action to fault class (or event expression).
    pub faults: Vec<(ActionId, String)>,
    pub body: ModelBody,
}

impl Model {
    /// Parses the line-oriented or the structured (JSON) form.
    pub fn parse(text: &str, backend: crate::semilattice::Backend) -> Result<Model, ModelError> {
        ModelSpec::parse(text)?.build(backend)
    }

    pub fn ts(&self) -> &TransitionSystem {
        with_annotated!(&self.body, a => a.ts(), plain p => p)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.ts().alphabet()
    }

    pub fn domain_name(&self) -> &'static str {
        match self.body {
            ModelBody::Plain(_) => "plain",
            ModelBody::Config(_) => "config",
            ModelBody::Faults(_) => "faults",
            ModelBody::BoolExpr(_) => "boolexpr",
            ModelBody::Truth3(_) => "truth3",
            ModelBody::Truth5(_) => "truth5",
        }
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    /// The feature model's configuration domain, for featured systems.
    pub fn fts(&self) -> Option<&AnnotatedTs<ConfigDomain>> {
        match &self.body {
            ModelBody::Config(a) => Some(a),
            _ => None,
        }
    }

    /// Observable actions, defaulting to the whole alphabet.
    pub fn observable_or_all(&self) -> Vec<ActionId> {
        self.observable
            .clone()
            .unwrap_or_else(|| self.alphabet().ids().collect())
    }

    pub fn to_spec(&self) -> ModelSpec {
        format::to_spec(self)
    }

    /// Graph description with states labeled by name and annotation.
    pub fn to_dot(&self) -> String {
        let labels: (Vec<String>, Vec<String>) = with_annotated!(&self.body, a => {
            let d = a.domain();
            let states = a
                .ts()
                .states()
                .map(|s| format!("{}\\n{}", self.state_names[s.index()], d.canonical(a.state_annot(s))))
                .collect();
            let edges = a
                .annotated_transitions()
                .map(|(t, g)| format!("{} : {}", d.canonical(g), a.ts().alphabet().name(t.action)))
                .collect();
            (states, edges)
        }, plain p => {
            let states = self.state_names.clone();
            let edges = p.transitions().iter().map(|t| p.alphabet().name(t.action).to_string()).collect();
            (states, edges)
        });
        let ts = self.ts();
        crate::dot::render(
            ts.initial(),
            &labels.0,
            ts.transitions().iter().zip(&labels.1).map(|(t, l)| (t.source, l.as_str(), t.target)),
        )
    }
}
