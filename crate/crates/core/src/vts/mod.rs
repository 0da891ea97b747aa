//! Verdict transition systems and their semantics.

mod check;

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{ActionId, Alphabet, AnnotatedTs, StateId, Transition, TransitionSystem};
use crate::semilattice::{join_all, VerdictDomain};

pub use check::{check_sound_complete, refinement_counterexample, refines, refines_exact, verdict_equivalent, SoundnessReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VtsError {
    #[error("out-of-language")]
    OutOfLanguage,
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
}

/// A transition system whose states carry verdicts.
#[derive(Debug, Clone)]
pub struct Vts<D: VerdictDomain> {
    domain: D,
    ts: TransitionSystem,
    verdicts: Vec<D::Verdict>,
}

impl<D: VerdictDomain> Vts<D> {
    pub fn new(domain: D, ts: TransitionSystem, verdicts: Vec<D::Verdict>) -> Self {
        assert_eq!(ts.num_states(), verdicts.len(), "one verdict per state");
        Vts { domain, ts, verdicts }
    }

    /// Builds a VTS from parts; duplicate transitions are merged.
    pub fn from_parts(
        domain: D,
        alphabet: Arc<Alphabet>,
        initial: Vec<StateId>,
        transitions: Vec<Transition>,
        verdicts: Vec<D::Verdict>,
    ) -> Self {
        let ts = TransitionSystem::new(alphabet, verdicts.len(), initial, transitions)
            .expect("transition endpoints are states");
        Vts::new(domain, ts, verdicts)
    }

    /// Reads an annotated system's state annotations as verdicts.
    pub fn from_state_annotations(a: &AnnotatedTs<D>) -> Self {
        let verdicts = a.ts().states().map(|s| a.state_annot(s).clone()).collect();
        Vts::new(a.domain().clone(), a.ts().clone(), verdicts)
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn ts(&self) -> &TransitionSystem {
        &self.ts
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.ts.alphabet()
    }

    pub fn num_states(&self) -> usize {
        self.ts.num_states()
    }

    pub fn num_transitions(&self) -> usize {
        self.ts.num_transitions()
    }

    pub fn verdict(&self, q: StateId) -> &D::Verdict {
        &self.verdicts[q.index()]
    }

    pub fn verdicts(&self) -> &[D::Verdict] {
        &self.verdicts
    }

    pub fn into_parts(self) -> (D, TransitionSystem, Vec<D::Verdict>) {
        (self.domain, self.ts, self.verdicts)
    }

    /// Join of the verdicts of `states`; `None` if the set is empty.
    pub fn join_of(&self, states: &[StateId]) -> Option<D::Verdict> {
        join_all(&self.domain, states.iter().map(|q| self.verdict(*q))).ok()
    }

    /// Verdict yielded for `word`; `None` when `word` is out of language.
    pub fn yielded(&self, word: &[ActionId]) -> Option<D::Verdict> {
        self.join_of(&self.ts.exec(word))
    }

    pub fn yielded_verdict(&self, word: &[ActionId]) -> Result<D::Verdict, VtsError> {
        self.yielded(word).ok_or(VtsError::OutOfLanguage)
    }

    /// Yielded verdict for a word given by action names.
    pub fn yielded_named(&self, word: &[&str]) -> Result<D::Verdict, VtsError> {
        let w = self
            .alphabet()
            .word(word)
            .map_err(|e| VtsError::AlphabetMismatch(e.to_string()))?;
        self.yielded_verdict(&w)
    }

    /// Pairs (q, q') with q' a successor of q whose verdict is not at least
    /// as specific as ν(q). Empty iff the VTS is monotonic.
    pub fn monotonicity_violations(&self) -> Vec<(StateId, StateId)> {
        let mut out: Vec<(StateId, StateId)> = self
            .ts
            .transitions()
            .iter()
            .filter(|t| !self.domain.leq(self.verdict(t.target), self.verdict(t.source)))
            .map(|t| (t.source, t.target))
            .collect();
        out.dedup();
        out
    }

    pub fn is_monotonic(&self) -> bool {
        self.monotonicity_violations().is_empty()
    }

    pub fn is_state_monotonic(&self, q: StateId) -> bool {
        self.ts
            .outgoing(q)
            .iter()
            .all(|t| self.domain.leq(self.verdict(t.target), self.verdict(q)))
    }

    /// Drops unreachable states and renumbers breadth-first.
    pub fn pruned(&self) -> Self {
        let (ts, old) = self.ts.prune();
        let verdicts = old.iter().map(|q| self.verdict(*q).clone()).collect();
        Vts::new(self.domain.clone(), ts, verdicts)
    }

    /// Same structure with every verdict mapped into another domain.
    pub fn map_verdicts<E: VerdictDomain>(&self, domain: E, f: impl Fn(&D::Verdict) -> E::Verdict) -> Vts<E> {
        Vts::new(domain, self.ts.clone(), self.verdicts.iter().map(f).collect())
    }

    pub fn with_verdicts(&self, verdicts: Vec<D::Verdict>) -> Self {
        Vts::new(self.domain.clone(), self.ts.clone(), verdicts)
    }

    /// Number of distinct verdicts.
    pub fn distinct_verdicts(&self) -> usize {
        self.verdicts.iter().collect::<HashSet<_>>().len()
    }

    /// Graph description with states labeled by verdicts.
    pub fn to_dot(&self) -> String {
        let labels: Vec<String> = self.verdicts.iter().map(|v| self.domain.canonical(v)).collect();
        crate::dot::render(
            self.ts.initial(),
            &labels,
            self.ts
                .transitions()
                .iter()
                .map(|t| (t.source, self.alphabet().name(t.action), t.target)),
        )
    }
}

#[cfg(test)]
mod tests;
