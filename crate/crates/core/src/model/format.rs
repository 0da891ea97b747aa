//! Model files: a line-oriented syntax and an equivalent JSON document.
//!
//! ```text
//! # comment
//! features s e
//! validity s | e
//! state init initial
//! state signed
//! action sign observable
//! transition init sign signed guard [{s},{s,e}]
//! fault pump_fault F_p
//! ```
//!
//! Also accepted: `states a b c`, `actions a b`, `initial a`,
//! `observable a b`, `events e1 e2`, `domain truth3|truth5`, and `annot <v>`
//! on states and transitions.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActionId, Alphabet, AnnotatedTs, Model, ModelBody, ModelError, StateId, Transition, TransitionSystem};
use crate::formula::{is_identifier, Formula};
use crate::semilattice::{
    Backend, BoolDomain, ConfigDomain, FaultDomain, FaultSet, FeatureModel, Truth3, Truth5, VerdictDomain,
};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
    pub states: Vec<StateSpec>,
    pub actions: Vec<ActionSpec>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<FaultSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub initial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annot: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub source: String,
    pub action: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annot: Option<String>,
}

/// Maps an action to a fault class (or, with events, to an event expression).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub action: String,
    pub class: String,
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

fn name(line: usize, kind: &str, text: &str) -> Result<String, ModelError> {
    if is_identifier(text) {
        Ok(text.to_string())
    } else {
        Err(syntax(line, format!("invalid {kind} name {text:?}")))
    }
}

/// Splits off the first whitespace-delimited word.
fn split_word(text: &str) -> (&str, &str) {
    let text = text.trim_start();
    match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim_start()),
        None => (text, ""),
    }
}

impl ModelSpec {
    /// Parses either syntax; documents starting with `{` are JSON.
    pub fn parse(text: &str) -> Result<ModelSpec, ModelError> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }

    pub fn from_json(text: &str) -> Result<ModelSpec, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model specs serialize")
    }

    pub fn from_text(text: &str) -> Result<ModelSpec, ModelError> {
        let mut spec = ModelSpec::default();
        let mut initial_marks = Vec::new();
        let mut observable_marks = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (keyword, rest) = split_word(content);
            let words = || rest.split_whitespace();
            match keyword {
                "domain" => {
                    if spec.domain.replace(rest.to_string()).is_some() {
                        return Err(syntax(line, "domain declared twice"));
                    }
                }
                "features" => {
                    for w in words() {
                        spec.features.push(name(line, "feature", w)?);
                    }
                }
                "validity" => {
                    if rest.is_empty() {
                        return Err(syntax(line, "missing validity formula"));
                    }
                    if spec.validity.replace(rest.to_string()).is_some() {
                        return Err(syntax(line, "validity declared twice"));
                    }
                }
                "events" => {
                    for w in words() {
                        spec.events.push(name(line, "event", w)?);
                    }
                }
                "states" => {
                    for w in words() {
                        spec.states.push(StateSpec {
                            name: name(line, "state", w)?,
                            initial: false,
                            annot: None,
                        });
                    }
                }
                "state" => {
                    let (n, mut rest) = split_word(rest);
                    if n.is_empty() {
                        return Err(syntax(line, "missing state name"));
                    }
                    let mut state = StateSpec {
                        name: name(line, "state", n)?,
                        initial: false,
                        annot: None,
                    };
                    while !rest.is_empty() {
                        let (w, tail) = split_word(rest);
                        match w {
                            "initial" => state.initial = true,
                            "annot" if !tail.is_empty() => {
                                state.annot = Some(tail.to_string());
                                break;
                            }
                            _ => return Err(syntax(line, format!("unexpected {w:?} in state declaration"))),
                        }
                        rest = tail;
                    }
                    spec.states.push(state);
                }
                "initial" => initial_marks.extend(words().map(|w| (line, w.to_string()))),
                "actions" => {
                    for w in words() {
                        spec.actions.push(ActionSpec {
                            name: name(line, "action", w)?,
                            observable: false,
                        });
                    }
                }
                "action" => {
                    let ws: Vec<&str> = words().collect();
                    let observable = match ws.as_slice() {
                        [_] => false,
                        [_, "observable"] => true,
                        _ => return Err(syntax(line, "expected: action <name> [observable]")),
                    };
                    spec.actions.push(ActionSpec {
                        name: name(line, "action", ws[0])?,
                        observable,
                    });
                }
                "observable" => observable_marks.extend(words().map(|w| (line, w.to_string()))),
                "transition" => {
                    let (source, rest) = split_word(rest);
                    let (action, rest) = split_word(rest);
                    let (target, rest) = split_word(rest);
                    if target.is_empty() {
                        return Err(syntax(line, "expected: transition <source> <action> <target> ..."));
                    }
                    let mut t = TransitionSpec {
                        source: source.to_string(),
                        action: action.to_string(),
                        target: target.to_string(),
                        guard: None,
                        annot: None,
                    };
                    if !rest.is_empty() {
                        let (kind, value) = split_word(rest);
                        if value.is_empty() {
                            return Err(syntax(line, format!("missing value after {kind:?}")));
                        }
                        match kind {
                            "guard" => t.guard = Some(value.to_string()),
                            "annot" => t.annot = Some(value.to_string()),
                            _ => return Err(syntax(line, format!("unexpected {kind:?} in transition"))),
                        }
                    }
                    spec.transitions.push(t);
                }
                "fault" => {
                    let (action, class) = split_word(rest);
                    if class.is_empty() {
                        return Err(syntax(line, "expected: fault <action> <class>"));
                    }
                    spec.faults.push(FaultSpec {
                        action: action.to_string(),
                        class: class.to_string(),
                    });
                }
                _ => return Err(syntax(line, format!("unknown keyword {keyword:?}"))),
            }
        }
        for (line, n) in initial_marks {
            let s = spec
                .states
                .iter_mut()
                .find(|s| s.name == n)
                .ok_or_else(|| syntax(line, format!("unknown state {n:?}")))?;
            s.initial = true;
        }
        for (line, n) in observable_marks {
            let a = spec
                .actions
                .iter_mut()
                .find(|a| a.name == n)
                .ok_or_else(|| syntax(line, format!("unknown action {n:?}")))?;
            a.observable = true;
        }
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(d) = &self.domain {
            writeln!(out, "domain {d}").unwrap();
        }
        if !self.features.is_empty() {
            writeln!(out, "features {}", self.features.join(" ")).unwrap();
        }
        if let Some(v) = &self.validity {
            writeln!(out, "validity {v}").unwrap();
        }
        if !self.events.is_empty() {
            writeln!(out, "events {}", self.events.join(" ")).unwrap();
        }
        for s in &self.states {
            write!(out, "state {}", s.name).unwrap();
            if s.initial {
                out.push_str(" initial");
            }
            if let Some(a) = &s.annot {
                write!(out, " annot {a}").unwrap();
            }
            out.push('\n');
        }
        for a in &self.actions {
            write!(out, "action {}", a.name).unwrap();
            if a.observable {
                out.push_str(" observable");
            }
            out.push('\n');
        }
        for t in &self.transitions {
            write!(out, "transition {} {} {}", t.source, t.action, t.target).unwrap();
            if let Some(g) = &t.guard {
                write!(out, " guard {g}").unwrap();
            } else if let Some(a) = &t.annot {
                write!(out, " annot {a}").unwrap();
            }
            out.push('\n');
        }
        for f in &self.faults {
            writeln!(out, "fault {} {}", f.action, f.class).unwrap();
        }
        out
    }

    fn domain_kind(&self) -> Result<&'static str, ModelError> {
        let mut implied = Vec::new();
        if !self.features.is_empty() || self.validity.is_some() {
            implied.push("config");
        }
        if !self.events.is_empty() {
            implied.push("boolexpr");
        } else if !self.faults.is_empty() {
            implied.push("faults");
        }
        let declared = match self.domain.as_deref().map(str::trim) {
            None => None,
            Some("truth3") => Some("truth3"),
            Some("truth5") => Some("truth5"),
            Some("config") => Some("config"),
            Some("faults") => Some("faults"),
            Some("boolexpr") => Some("boolexpr"),
            Some("plain") => Some("plain"),
            Some(other) => return Err(ModelError::Invalid(format!("unknown domain {other:?}"))),
        };
        match (declared, implied.as_slice()) {
            (Some(d), []) => Ok(d),
            (Some(d), [i]) if d == *i => Ok(d),
            (None, []) => Ok("plain"),
            (None, [i]) => Ok(i),
            _ => Err(ModelError::Invalid(format!(
                "conflicting verdict domains: {}",
                declared.into_iter().chain(implied.iter().copied()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Validates the specification and compiles annotations.
    pub fn build(&self, backend: Backend) -> Result<Model, ModelError> {
        let mut state_index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if !is_identifier(&s.name) {
                return Err(ModelError::Invalid(format!("invalid state name {:?}", s.name)));
            }
            if state_index.insert(s.name.as_str(), StateId(i as u32)).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "state",
                    name: s.name.clone(),
                });
            }
        }
        for a in &self.actions {
            if !is_identifier(&a.name) {
                return Err(ModelError::Invalid(format!("invalid action name {:?}", a.name)));
            }
        }
        let alphabet = Arc::new(Alphabet::new(self.actions.iter().map(|a| a.name.clone()))?);
        let initial: Vec<StateId> = self
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.initial)
            .map(|(i, _)| StateId(i as u32))
            .collect();
        if initial.is_empty() {
            return Err(ModelError::NoInitialState);
        }
        let state = |n: &str| state_index.get(n).copied().ok_or_else(|| ModelError::UnknownState(n.to_string()));
        let action = |n: &str| alphabet.id(n).ok_or_else(|| ModelError::UnknownAction(n.to_string()));
        let mut transitions = Vec::with_capacity(self.transitions.len());
        let mut seen = HashSet::new();
        for t in &self.transitions {
            let tr = Transition::new(state(&t.source)?, action(&t.action)?, state(&t.target)?);
            if !seen.insert(tr) {
                return Err(ModelError::DuplicateTransition(describe(t)));
            }
            transitions.push(tr);
        }
        let mut faults = Vec::new();
        for f in &self.faults {
            let a = action(&f.action)?;
            if faults.iter().any(|(b, _)| *b == a) {
                return Err(ModelError::Duplicate {
                    kind: "fault mapping for action",
                    name: f.action.clone(),
                });
            }
            faults.push((a, f.class.trim().to_string()));
        }
        let observable = self.actions.iter().any(|a| a.observable).then(|| {
            self.actions
                .iter()
                .enumerate()
                .filter(|(_, a)| a.observable)
                .map(|(i, _)| ActionId(i as u32))
                .collect()
        });

        let kind = self.domain_kind()?;
        if kind != "config" {
            if let Some(t) = self.transitions.iter().find(|t| t.guard.is_some()) {
                return Err(ModelError::Invalid(format!(
                    "guard on transition {} outside a featured model",
                    describe(t)
                )));
            }
        }
        let body = match kind {
            "plain" => {
                if let Some(t) = self.transitions.iter().find(|t| t.annot.is_some()) {
                    return Err(ModelError::Invalid(format!("annotation on transition {} without a domain", describe(t))));
                }
                ModelBody::Plain(TransitionSystem::new(alphabet.clone(), self.states.len(), initial, transitions)?)
            }
            "config" => {
                let validity = self
                    .validity
                    .as_deref()
                    .map(|v| Formula::parse(v).map_err(|e| ModelError::Invalid(format!("validity: {e}"))))
                    .transpose()?;
                let mut names = HashSet::new();
                for f in &self.features {
                    if !names.insert(f) {
                        return Err(ModelError::Duplicate {
                            kind: "feature",
                            name: f.clone(),
                        });
                    }
                }
                let domain = ConfigDomain::new(FeatureModel::new(self.features.clone(), validity), backend)
                    .map_err(|e| ModelError::domain("feature model", e))?;
                let annots = self.annotate(&domain, &transitions, |t| {
                    Ok(match &t.guard {
                        None => None,
                        Some(g) => Some(parse_guard(&domain, g).map_err(|e| match e {
                            GuardError::Empty => ModelError::EmptyGuard(describe(t)),
                            GuardError::Domain(e) => ModelError::domain(format!("guard of {}", describe(t)), e),
                        })?),
                    })
                })?;
                ModelBody::Config(self.assemble(domain, alphabet.clone(), initial, annots)?)
            }
            "faults" => {
                let mut classes: Vec<String> = Vec::new();
                for (_, c) in &faults {
                    if !is_identifier(c) {
                        return Err(ModelError::Invalid(format!("invalid fault class {c:?}")));
                    }
                    if !classes.contains(c) {
                        classes.push(c.clone());
                    }
                }
                let domain = FaultDomain::new(classes).map_err(|e| ModelError::domain("fault classes", e))?;
                let by_action: HashMap<ActionId, FaultSet> = faults
                    .iter()
                    .map(|(a, c)| (*a, FaultSet::singleton(domain.class_index(c).unwrap())))
                    .collect();
                let annots = self.annotate(&domain, &transitions, |t| {
                    Ok(by_action.get(&action(&t.action)?).copied())
                })?;
                ModelBody::Faults(self.assemble(domain, alphabet.clone(), initial, annots)?)
            }
            "boolexpr" => {
                let domain = BoolDomain::new(self.events.clone()).map_err(|e| ModelError::domain("events", e))?;
                let mut by_action = HashMap::new();
                for (a, expr) in &faults {
                    let v = domain
                        .parse_verdict(expr)
                        .map_err(|e| ModelError::domain(format!("fault expression of {}", alphabet.name(*a)), e))?;
                    by_action.insert(*a, v);
                }
                let annots = self.annotate(&domain, &transitions, |t| Ok(by_action.get(&action(&t.action)?).cloned()))?;
                ModelBody::BoolExpr(self.assemble(domain, alphabet.clone(), initial, annots)?)
            }
            "truth3" => {
                let annots = self.annotate(&Truth3, &transitions, |_| Ok(None))?;
                ModelBody::Truth3(self.assemble(Truth3, alphabet.clone(), initial, annots)?)
            }
            "truth5" => {
                let annots = self.annotate(&Truth5, &transitions, |_| Ok(None))?;
                ModelBody::Truth5(self.assemble(Truth5, alphabet.clone(), initial, annots)?)
            }
            _ => unreachable!(),
        };
        Ok(Model {
            state_names: self.states.iter().map(|s| s.name.clone()).collect(),
            observable,
            faults,
            body,
        })
    }

    /// State and transition annotations: explicit `annot`, else `derived`, else top.
    #[allow(clippy::type_complexity)]
    fn annotate<D: VerdictDomain>(
        &self,
        domain: &D,
        transitions: &[Transition],
        derived: impl Fn(&TransitionSpec) -> Result<Option<D::Verdict>, ModelError>,
    ) -> Result<(Vec<D::Verdict>, Vec<(Transition, D::Verdict)>), ModelError> {
        let top = domain.top().expect("model domains have a top element");
        let parse = |text: &str, what: String| {
            domain.parse_verdict(text).map_err(|e| ModelError::domain(what, e))
        };
        let states = self
            .states
            .iter()
            .map(|s| match &s.annot {
                Some(a) => parse(a, format!("annotation of state {}", s.name)),
                None => Ok(top.clone()),
            })
            .collect::<Result<_, _>>()?;
        let trans = self
            .transitions
            .iter()
            .zip(transitions)
            .map(|(t, tr)| {
                let v = match &t.annot {
                    Some(a) => parse(a, format!("annotation of {}", describe(t)))?,
                    None => derived(t)?.unwrap_or_else(|| top.clone()),
                };
                Ok((*tr, v))
            })
            .collect::<Result<_, ModelError>>()?;
        Ok((states, trans))
    }

    #[allow(clippy::type_complexity)]
    fn assemble<D: VerdictDomain>(
        &self,
        domain: D,
        alphabet: Arc<Alphabet>,
        initial: Vec<StateId>,
        (states, trans): (Vec<D::Verdict>, Vec<(Transition, D::Verdict)>),
    ) -> Result<AnnotatedTs<D>, ModelError> {
        AnnotatedTs::new(domain, alphabet, initial, states, trans)
    }
}

enum GuardError {
    Empty,
    Domain(crate::semilattice::DomainError),
}

fn parse_guard(domain: &ConfigDomain, text: &str) -> Result<crate::semilattice::ConfigSet, GuardError> {
    let text = text.trim();
    if let Some(body) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        if body.trim().is_empty() {
            return Err(GuardError::Empty);
        }
        return domain.parse_verdict(text).map_err(GuardError::Domain);
    }
    let f = Formula::parse(text).map_err(|e| {
        GuardError::Domain(crate::semilattice::DomainError::InvalidVerdict {
            text: text.to_string(),
            reason: e.to_string(),
        })
    })?;
    domain
        .from_formula(&f)
        .map_err(GuardError::Domain)?
        .ok_or(GuardError::Empty)
}

fn describe(t: &TransitionSpec) -> String {
    format!("{} -{}-> {}", t.source, t.action, t.target)
}

/// Regenerates a specification from a built model.
pub(super) fn to_spec(model: &Model) -> ModelSpec {
    let ts = model.ts();
    let alphabet = ts.alphabet();
    let observable = model.observable.clone().unwrap_or_default();
    let mut spec = ModelSpec {
        actions: alphabet
            .ids()
            .map(|a| ActionSpec {
                name: alphabet.name(a).to_string(),
                observable: observable.contains(&a),
            })
            .collect(),
        faults: model
            .faults
            .iter()
            .map(|(a, c)| FaultSpec {
                action: alphabet.name(*a).to_string(),
                class: c.clone(),
            })
            .collect(),
        ..ModelSpec::default()
    };
    let name = |s: StateId| model.state_names[s.index()].clone();
    let plain_transition = |t: &Transition| TransitionSpec {
        source: name(t.source),
        action: alphabet.name(t.action).to_string(),
        target: name(t.target),
        guard: None,
        annot: None,
    };

    fn annotations<D: VerdictDomain>(
        a: &AnnotatedTs<D>,
        spec: &mut ModelSpec,
        names: &[String],
        as_guard: bool,
        plain: &dyn Fn(&Transition) -> TransitionSpec,
    ) {
        let d = a.domain();
        let top = d.top();
        spec.states = a
            .ts()
            .states()
            .map(|s| StateSpec {
                name: names[s.index()].clone(),
                initial: a.ts().initial().contains(&s),
                annot: (Some(a.state_annot(s)) != top.as_ref()).then(|| d.canonical(a.state_annot(s))),
            })
            .collect();
        spec.transitions = a
            .annotated_transitions()
            .map(|(t, v)| {
                let mut ts = plain(t);
                if Some(v) != top.as_ref() {
                    if as_guard {
                        ts.guard = Some(d.canonical(v));
                    } else {
                        ts.annot = Some(d.canonical(v));
                    }
                }
                ts
            })
            .collect();
    }

    match &model.body {
        ModelBody::Plain(p) => {
            spec.states = p
                .states()
                .map(|s| StateSpec {
                    name: name(s),
                    initial: p.initial().contains(&s),
                    annot: None,
                })
                .collect();
            spec.transitions = p.transitions().iter().map(plain_transition).collect();
        }
        ModelBody::Config(a) => {
            let fm = a.domain().feature_model();
            spec.features = fm.features.clone();
            spec.validity = Some(fm.validity.to_string());
            annotations(a, &mut spec, &model.state_names, true, &plain_transition);
        }
        ModelBody::Faults(a) => annotations(a, &mut spec, &model.state_names, false, &plain_transition),
        ModelBody::BoolExpr(a) => {
            spec.events = a.domain().events().to_vec();
            annotations(a, &mut spec, &model.state_names, false, &plain_transition);
        }
        ModelBody::Truth3(a) => {
            spec.domain = Some("truth3".into());
            annotations(a, &mut spec, &model.state_names, false, &plain_transition);
        }
        ModelBody::Truth5(a) => {
            spec.domain = Some("truth5".into());
            annotations(a, &mut spec, &model.state_names, false, &plain_transition);
        }
    }
    spec
}
