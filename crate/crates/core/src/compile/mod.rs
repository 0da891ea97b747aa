//! Determinization and minimization into runnable monitors.

mod artifact;
mod minimize;

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::model::{ActionId, Alphabet, StateId, Transition};
use crate::semilattice::VerdictDomain;
use crate::vts::Vts;

pub use artifact::{ArtifactError, ArtifactState, MonitorArtifact, Provenance, ARTIFACT_FORMAT, ARTIFACT_VERSION};
pub use minimize::{minimize, minimize_relaxed};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("the monitor has no initial state")]
    EmptyLanguage,
}

/// How a monitor treats actions it has no transition for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Missing transitions leave the language.
    Strict,
    /// Missing transitions (and unknown actions) keep the current state.
    Relaxed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Relaxed => "relaxed",
        })
    }
}

/// A deterministic VTS with a dense, partial transition table.
#[derive(Debug, Clone)]
pub struct DeterministicVts<D: VerdictDomain> {
    domain: D,
    alphabet: Arc<Alphabet>,
    initial: StateId,
    /// `next[q * |Act| + a]`.
    next: Vec<Option<StateId>>,
    verdicts: Vec<D::Verdict>,
}

impl<D: VerdictDomain> DeterministicVts<D> {
    /// Builds from a table; states unreachable from `initial` are dropped
    /// and the rest renumbered breadth-first.
    pub fn from_table(
        domain: D,
        alphabet: Arc<Alphabet>,
        initial: StateId,
        next: Vec<Option<StateId>>,
        verdicts: Vec<D::Verdict>,
    ) -> Self {
        let k = alphabet.len();
        assert_eq!(next.len(), verdicts.len() * k, "one table row per state");
        let mut order = vec![initial];
        let mut new_id = vec![None; verdicts.len()];
        new_id[initial.index()] = Some(StateId(0));
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for t in next[q.index() * k..(q.index() + 1) * k].iter().flatten() {
                if new_id[t.index()].is_none() {
                    new_id[t.index()] = Some(StateId(order.len() as u32));
                    order.push(*t);
                }
            }
            i += 1;
        }
        let mut table = Vec::with_capacity(order.len() * k);
        for &q in &order {
            table.extend(next[q.index() * k..(q.index() + 1) * k].iter().map(|t| t.and_then(|t| new_id[t.index()])));
        }
        DeterministicVts {
            domain,
            alphabet,
            initial: StateId(0),
            next: table,
            verdicts: order.iter().map(|q| verdicts[q.index()].clone()).collect(),
        }
    }

    /// Reads a deterministic VTS; `None` if it is not deterministic or has
    /// no initial state.
    pub fn from_vts(m: &Vts<D>) -> Option<Self> {
        let ts = m.ts();
        if !ts.is_deterministic() || ts.initial().is_empty() {
            return None;
        }
        let k = ts.alphabet().len();
        let mut next = vec![None; ts.num_states() * k];
        for t in ts.transitions() {
            next[t.source.index() * k + t.action.index()] = Some(t.target);
        }
        Some(Self::from_table(
            m.domain().clone(),
            ts.alphabet().clone(),
            ts.initial()[0],
            next,
            m.verdicts().to_vec(),
        ))
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.verdicts.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.next.iter().flatten().count()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.verdicts.len() as u32).map(StateId)
    }

    pub fn step(&self, q: StateId, a: ActionId) -> Option<StateId> {
        self.next[q.index() * self.alphabet.len() + a.index()]
    }

    /// The transition row of `q`, indexed by action.
    pub fn row(&self, q: StateId) -> &[Option<StateId>] {
        let k = self.alphabet.len();
        &self.next[q.index() * k..(q.index() + 1) * k]
    }

    pub fn verdict(&self, q: StateId) -> &D::Verdict {
        &self.verdicts[q.index()]
    }

    pub fn verdicts(&self) -> &[D::Verdict] {
        &self.verdicts
    }

    pub fn run(&self, word: &[ActionId]) -> Option<StateId> {
        word.iter().try_fold(self.initial, |q, &a| self.step(q, a))
    }

    /// Verdict yielded for `word`; `None` outside the language.
    pub fn yielded(&self, word: &[ActionId]) -> Option<&D::Verdict> {
        self.run(word).map(|q| self.verdict(q))
    }

    pub fn is_monotonic(&self) -> bool {
        self.states().all(|q| {
            self.row(q)
                .iter()
                .flatten()
                .all(|t| self.domain.leq(self.verdict(*t), self.verdict(q)))
        })
    }

    /// Structural equality up to state renaming. Both sides are numbered
    /// breadth-first from the initial state, so this compares tables.
    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.alphabet.names() == other.alphabet.names()
            && self.next == other.next
            && self
                .verdicts
                .iter()
                .zip(&other.verdicts)
                .all(|(a, b)| self.domain.canonical(a) == other.domain.canonical(b))
            && self.verdicts.len() == other.verdicts.len()
    }

    pub fn to_vts(&self) -> Vts<D> {
        let k = self.alphabet.len();
        let transitions = self
            .next
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| Transition::new(StateId((i / k) as u32), ActionId((i % k) as u32), t)))
            .collect();
        Vts::from_parts(
            self.domain.clone(),
            self.alphabet.clone(),
            vec![self.initial],
            transitions,
            self.verdicts.clone(),
        )
    }

    pub fn to_dot(&self) -> String {
        self.to_vts().to_dot()
    }
}

/// Subset construction over reachable subsets; each subset's verdict is the
/// join of its members' verdicts.
pub fn determinize<D: VerdictDomain>(m: &Vts<D>) -> Result<DeterministicVts<D>, CompileError> {
    let ts = m.ts();
    if ts.initial().is_empty() {
        return Err(CompileError::EmptyLanguage);
    }
    let k = ts.alphabet().len();
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    let mut subsets: Vec<Vec<StateId>> = Vec::new();
    let mut verdicts = Vec::new();
    let mut next = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |set: Vec<StateId>,
                      subsets: &mut Vec<Vec<StateId>>,
                      verdicts: &mut Vec<D::Verdict>,
                      queue: &mut VecDeque<StateId>| {
        if let Some(&id) = index.get(&set) {
            return id;
        }
        let id = StateId(subsets.len() as u32);
        verdicts.push(m.join_of(&set).expect("subsets are non-empty"));
        index.insert(set.clone(), id);
        subsets.push(set);
        queue.push_back(id);
        id
    };
    intern(ts.initial().to_vec(), &mut subsets, &mut verdicts, &mut queue);
    while let Some(p) = queue.pop_front() {
        next.resize((p.index() + 1) * k, None);
        for a in ts.alphabet().ids() {
            let succ = ts.post(&subsets[p.index()], Some(&[a]));
            if !succ.is_empty() {
                let id = intern(succ, &mut subsets, &mut verdicts, &mut queue);
                next[p.index() * k + a.index()] = Some(id);
            }
        }
    }
    Ok(DeterministicVts::from_table(
        m.domain().clone(),
        ts.alphabet().clone(),
        StateId(0),
        next,
        verdicts,
    ))
}

/// Removes every transition from a state to itself.
pub fn strip_self_loops<D: VerdictDomain>(d: &DeterministicVts<D>) -> DeterministicVts<D> {
    let k = d.alphabet.len();
    let next = d
        .next
        .iter()
        .enumerate()
        .map(|(i, t)| t.filter(|t| t.index() != i / k))
        .collect();
    DeterministicVts {
        next,
        ..d.clone()
    }
}
