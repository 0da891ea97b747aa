//! Transformations producing and refining verdict transition systems.
//!
//! Every transformation returns a VTS whose states are all reachable,
//! numbered in canonical breadth-first order.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{ActionId, Alphabet, AnnotatedTs, StateId, Transition, TransitionSystem};
use crate::semilattice::{
    meet_opt, BoolDomain, BoolFn, DomainError, FaultDomain, FaultSet, Lifted, Possibilities, VerdictDomain,
};
use crate::vts::Vts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("monitor is not action-enabled: action {action:?} is disabled in some state")]
    NotActionEnabled { action: String },
    #[error("action {0:?} is not part of the system's alphabet")]
    UnknownAction(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A state of the tracking construction: a model state and the running
/// meet of the transition annotations along the way there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrackedState<V> {
    pub origin: StateId,
    /// `None` stands for top (also in domains without a top element).
    pub accumulated: Option<V>,
}

/// Annotation tracking, keeping the states of each result state.
///
/// Only reachable pairs are built. Pairs whose verdict would be the
/// sentinel bottom are dropped together with everything behind them.
pub fn track_with_origins<D: VerdictDomain>(a: &AnnotatedTs<D>) -> (Vts<D>, Vec<TrackedState<D::Verdict>>) {
    let d = a.domain();
    let top = d.top();
    let mut index: HashMap<TrackedState<D::Verdict>, StateId> = HashMap::new();
    let mut states: Vec<TrackedState<D::Verdict>> = Vec::new();
    let mut verdicts = Vec::new();
    let mut queue = VecDeque::new();
    let mut add = |st: TrackedState<D::Verdict>,
                   states: &mut Vec<TrackedState<D::Verdict>>,
                   verdicts: &mut Vec<D::Verdict>,
                   queue: &mut VecDeque<StateId>|
     -> Option<StateId> {
        if let Some(&id) = index.get(&st) {
            return Some(id);
        }
        let nu = meet_opt(d, st.accumulated.as_ref(), a.state_annot(st.origin))?;
        let id = StateId(states.len() as u32);
        index.insert(st.clone(), id);
        states.push(st);
        verdicts.push(nu);
        queue.push_back(id);
        Some(id)
    };
    let mut initial = Vec::new();
    for &s in a.ts().initial() {
        let st = TrackedState {
            origin: s,
            accumulated: top.clone(),
        };
        if let Some(id) = add(st, &mut states, &mut verdicts, &mut queue) {
            initial.push(id);
        }
    }
    let mut transitions = Vec::new();
    while let Some(q) = queue.pop_front() {
        let TrackedState { origin, accumulated } = states[q.index()].clone();
        for (t, g) in a.outgoing(origin) {
            let Some(acc) = meet_opt(d, accumulated.as_ref(), g) else {
                continue;
            };
            let st = TrackedState {
                origin: t.target,
                accumulated: Some(acc),
            };
            if let Some(id) = add(st, &mut states, &mut verdicts, &mut queue) {
                transitions.push(Transition::new(q, t.action, id));
            }
        }
    }
    let vts = Vts::from_parts(d.clone(), a.ts().alphabet().clone(), initial, transitions, verdicts);
    let (ts, old) = vts.ts().prune();
    let verdicts = old.iter().map(|q| vts.verdict(*q).clone()).collect();
    let origins = old.iter().map(|q| states[q.index()].clone()).collect();
    (Vts::new(d.clone(), ts, verdicts), origins)
}

/// Annotation tracking: the most specific verdicts under full observation.
pub fn track<D: VerdictDomain>(a: &AnnotatedTs<D>) -> Vts<D> {
    track_with_origins(a).0
}

/// Product of an action-enabled VTS with a system, synchronizing on the
/// VTS's actions (matched by name); other system actions leave the VTS
/// state unchanged.
pub fn specialize<D: VerdictDomain>(m: &Vts<D>, ts: &TransitionSystem) -> Result<Vts<D>, SynthError> {
    let sync: Vec<ActionId> = m
        .alphabet()
        .ids()
        .map(|a| {
            let name = m.alphabet().name(a);
            ts.alphabet().id(name).ok_or_else(|| SynthError::UnknownAction(name.to_string()))
        })
        .collect::<Result<_, _>>()?;
    if let Some(a) = m.alphabet().ids().find(|&a| m.ts().states().any(|q| !m.ts().enabled(q, a))) {
        return Err(SynthError::NotActionEnabled {
            action: m.alphabet().name(a).to_string(),
        });
    }
    // System action -> monitor action.
    let mut to_m = vec![None; ts.alphabet().len()];
    for (i, &a) in sync.iter().enumerate() {
        to_m[a.index()] = Some(ActionId(i as u32));
    }
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |p: (StateId, StateId), pairs: &mut Vec<(StateId, StateId)>, queue: &mut VecDeque<StateId>| {
        *index.entry(p).or_insert_with(|| {
            let id = StateId(pairs.len() as u32);
            pairs.push(p);
            queue.push_back(id);
            id
        })
    };
    let mut initial = Vec::new();
    for &s in ts.initial() {
        for &q in m.ts().initial() {
            initial.push(intern((s, q), &mut pairs, &mut queue));
        }
    }
    let mut transitions = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (s, q) = pairs[id.index()];
        for t in ts.outgoing(s) {
            match to_m[t.action.index()] {
                Some(ma) => {
                    for q2 in m.ts().successors(q, ma).collect::<Vec<_>>() {
                        let target = intern((t.target, q2), &mut pairs, &mut queue);
                        transitions.push(Transition::new(id, t.action, target));
                    }
                }
                None => {
                    let target = intern((t.target, q), &mut pairs, &mut queue);
                    transitions.push(Transition::new(id, t.action, target));
                }
            }
        }
    }
    let verdicts = pairs.iter().map(|(_, q)| m.verdict(*q).clone()).collect();
    Ok(Vts::from_parts(m.domain().clone(), ts.alphabet().clone(), initial, transitions, verdicts).pruned())
}

/// Lookahead refinement: monotonic states take the join of their
/// successors' verdicts, iterated to the fixpoint.
///
/// States without successors keep their verdict.
pub fn lookahead<D: VerdictDomain>(m: &Vts<D>) -> Vts<D> {
    let d = m.domain();
    let ts = m.ts();
    let refinable: Vec<bool> = ts
        .states()
        .map(|q| !ts.outgoing(q).is_empty() && m.is_state_monotonic(q))
        .collect();
    let mut current: Vec<D::Verdict> = m.verdicts().to_vec();
    loop {
        let next: Vec<D::Verdict> = ts
            .states()
            .map(|q| {
                if refinable[q.index()] {
                    let succ = ts.outgoing(q).iter().map(|t| &current[t.target.index()]);
                    crate::semilattice::join_all(d, succ).expect("non-empty successors")
                } else {
                    m.verdict(q).clone()
                }
            })
            .collect();
        if next == current {
            break;
        }
        current = next;
    }
    m.with_verdicts(current).pruned()
}

/// States reachable from `q` in at most `bound` steps over `actions`
/// (all actions if `None`; unbounded if `bound` is `None`).
fn closure(ts: &TransitionSystem, q: StateId, actions: Option<&[ActionId]>, bound: Option<usize>) -> Vec<StateId> {
    let mut mark = vec![false; ts.num_states()];
    mark[q.index()] = true;
    let mut frontier = vec![q];
    let mut steps = 0;
    while !frontier.is_empty() && bound.is_none_or(|b| steps < b) {
        let mut next = Vec::new();
        for &s in &frontier {
            for t in ts.outgoing(s) {
                if actions.is_none_or(|acts| acts.contains(&t.action)) && !mark[t.target.index()] {
                    mark[t.target.index()] = true;
                    next.push(t.target);
                }
            }
        }
        frontier = next;
        steps += 1;
    }
    crate::model::collect_marked(&mark)
}

fn joined_closure<D: VerdictDomain>(m: &Vts<D>, closures: &[Vec<StateId>]) -> Vec<D::Verdict> {
    closures
        .iter()
        .map(|c| m.join_of(c).expect("closures contain their origin"))
        .collect()
}

/// Observability projection onto the actions `observable`.
///
/// The result's alphabet consists of the observable actions, in the order
/// of the original alphabet.
pub fn project<D: VerdictDomain>(m: &Vts<D>, observable: &[ActionId]) -> Vts<D> {
    let ts = m.ts();
    let mut obs: Vec<ActionId> = observable.to_vec();
    obs.sort_unstable();
    obs.dedup();
    let hidden: Vec<ActionId> = ts.alphabet().ids().filter(|a| obs.binary_search(a).is_err()).collect();
    let alphabet = Arc::new(
        Alphabet::new(obs.iter().map(|&a| ts.alphabet().name(a).to_string())).expect("distinct names"),
    );
    let mut renumber = vec![None; ts.alphabet().len()];
    for (i, a) in obs.iter().enumerate() {
        renumber[a.index()] = Some(ActionId(i as u32));
    }
    let closures: Vec<Vec<StateId>> = ts.states().map(|q| closure(ts, q, Some(&hidden), None)).collect();
    let mut transitions = Vec::new();
    for q in ts.states() {
        for &q1 in &closures[q.index()] {
            for t in ts.outgoing(q1) {
                if let Some(a) = renumber[t.action.index()] {
                    transitions.push(Transition::new(q, a, t.target));
                }
            }
        }
    }
    let verdicts = joined_closure(m, &closures);
    Vts::from_parts(m.domain().clone(), alphabet, ts.initial().to_vec(), transitions, verdicts).pruned()
}

/// A bound on consecutive delayed or lost observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Finite(usize),
    Unbounded,
}

impl Bound {
    fn steps(self) -> Option<usize> {
        match self {
            Bound::Finite(b) => Some(b),
            Bound::Unbounded => None,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(b) => write!(f, "{b}"),
            Bound::Unbounded => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "inf" | "unbounded" => Ok(Bound::Unbounded),
            n => n.parse().map(Bound::Finite).map_err(|_| format!("invalid bound {n:?}")),
        }
    }
}

/// Robustness against observations delayed by up to `bound` steps: each
/// verdict joins the verdicts reachable within `bound` steps.
pub fn delay<D: VerdictDomain>(m: &Vts<D>, bound: Bound) -> Vts<D> {
    let ts = m.ts();
    let closures: Vec<Vec<StateId>> = ts.states().map(|q| closure(ts, q, None, bound.steps())).collect();
    m.with_verdicts(joined_closure(m, &closures)).pruned()
}

/// Robustness against runs of up to `bound` consecutive lost observations.
pub fn loss<D: VerdictDomain>(m: &Vts<D>, bound: Bound) -> Vts<D> {
    let ts = m.ts();
    let closures: Vec<Vec<StateId>> = ts.states().map(|q| closure(ts, q, None, bound.steps())).collect();
    let mut transitions = Vec::new();
    for q in ts.states() {
        for &q1 in &closures[q.index()] {
            for t in ts.outgoing(q1) {
                transitions.push(Transition::new(q, t.action, t.target));
            }
        }
    }
    let verdicts = joined_closure(m, &closures);
    Vts::from_parts(m.domain().clone(), ts.alphabet().clone(), ts.initial().to_vec(), transitions, verdicts).pruned()
}

/// Possibility lifting: every verdict becomes a singleton set.
pub fn lift<D: VerdictDomain>(m: &Vts<D>) -> Vts<Lifted<D>> {
    m.map_verdicts(Lifted::new(m.domain().clone()), |v| Lifted::<D>::singleton(v.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Necessary,
    Possible,
}

/// A query such as `necessary: e1 | e2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalQuery {
    pub modality: Modality,
    pub formula: Formula,
}

impl std::str::FromStr for ModalQuery {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (mode, body) = s
            .split_once(':')
            .ok_or_else(|| format!("expected \"necessary: <formula>\" or \"possible: <formula>\", got {s:?}"))?;
        let modality = match mode.trim() {
            "necessary" | "nec" => Modality::Necessary,
            "possible" | "pos" => Modality::Possible,
            other => return Err(format!("unknown modality {other:?}")),
        };
        let formula = Formula::parse(body).map_err(|e| e.to_string())?;
        Ok(ModalQuery { modality, formula })
    }
}

fn quantify<T>(modality: Modality, worlds: &[T], holds: impl Fn(&T) -> bool) -> bool {
    match modality {
        Modality::Necessary => worlds.iter().all(holds),
        Modality::Possible => worlds.iter().any(holds),
    }
}

/// Evaluates a query on a diagnosis over boolean event expressions: each
/// possibility is a set of worlds `W`, and `φ` holds in it iff `W ⊆ ⟦φ⟧`.
pub fn modal_query(
    domain: &Lifted<BoolDomain>,
    verdict: &Possibilities<BoolFn>,
    query: &ModalQuery,
) -> Result<bool, SynthError> {
    let phi = domain.inner().from_formula(&query.formula)?;
    let worlds: Vec<&BoolFn> = verdict.iter().collect();
    Ok(quantify(query.modality, &worlds, |w| w.implies(&phi)))
}

/// Evaluates a query on a diagnosis over fault classes: each possibility
/// is the single world in which exactly its classes occurred.
pub fn modal_query_faults(
    domain: &Lifted<FaultDomain>,
    verdict: &Possibilities<FaultSet>,
    query: &ModalQuery,
) -> Result<bool, SynthError> {
    let faults = domain.inner();
    if let Some(v) = query.formula.unknown_variable(|v| faults.class_index(v).is_some()) {
        return Err(SynthError::Domain(DomainError::UnknownName(v)));
    }
    let worlds: Vec<FaultSet> = verdict.iter().copied().collect();
    Ok(quantify(query.modality, &worlds, |w| {
        query.formula.eval(&|v| w.contains(faults.class_index(v).unwrap()))
    }))
}
