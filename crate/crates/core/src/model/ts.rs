use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite set of named actions with dense ids in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, ActionId>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), ActionId(i as u32)).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "action",
                    name: n.clone(),
                });
            }
        }
        Ok(Alphabet { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, a: ActionId) -> &str {
        &self.names[a.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<ActionId> {
        self.index.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.names.len() as u32).map(ActionId)
    }

    /// Resolves a word given as action names.
    pub fn word<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<ActionId>, ModelError> {
        names
            .iter()
            .map(|n| {
                self.id(n.as_ref())
                    .ok_or_else(|| ModelError::UnknownAction(n.as_ref().to_string()))
            })
            .collect()
    }

    /// Resolves a whitespace-separated word.
    pub fn parse_word(&self, text: &str) -> Result<Vec<ActionId>, ModelError> {
        self.word(&text.split_whitespace().collect::<Vec<_>>())
    }

    pub fn format_word(&self, word: &[ActionId]) -> String {
        word.iter().map(|&a| self.name(a)).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub action: ActionId,
    pub target: StateId,
}

impl Transition {
    pub fn new(source: StateId, action: ActionId, target: StateId) -> Self {
        Transition {
            source,
            action,
            target,
        }
    }
}

/// A transition system with dense state ids.
///
/// Transitions are kept sorted by (source, action, target), so iteration
/// order is deterministic and the outgoing transitions of a state form a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    alphabet: Arc<Alphabet>,
    num_states: usize,
    initial: Vec<StateId>,
    transitions: Vec<Transition>,
    offsets: Vec<usize>,
}

impl TransitionSystem {
    /// Builds a system; initial states and transitions are sorted and deduplicated.
    pub fn new(
        alphabet: Arc<Alphabet>,
        num_states: usize,
        mut initial: Vec<StateId>,
        mut transitions: Vec<Transition>,
    ) -> Result<Self, ModelError> {
        let check = |s: StateId| {
            if s.index() < num_states {
                Ok(())
            } else {
                Err(ModelError::UnknownState(s.to_string()))
            }
        };
        for &s in &initial {
            check(s)?;
        }
        for t in &transitions {
            check(t.source)?;
            check(t.target)?;
            if t.action.index() >= alphabet.len() {
                return Err(ModelError::UnknownAction(format!("#{}", t.action.0)));
            }
        }
        initial.sort_unstable();
        initial.dedup();
        transitions.sort_unstable();
        transitions.dedup();
        let mut offsets = vec![0; num_states + 1];
        for t in &transitions {
            offsets[t.source.index() + 1] += 1;
        }
        for i in 0..num_states {
            offsets[i + 1] += offsets[i];
        }
        Ok(TransitionSystem {
            alphabet,
            num_states,
            initial,
            transitions,
            offsets,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states as u32).map(StateId)
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    /// Index of a transition in [`Self::transitions`].
    pub fn transition_index(&self, t: &Transition) -> Option<usize> {
        let out = self.outgoing(t.source);
        out.binary_search(t).ok().map(|i| self.offsets[t.source.index()] + i)
    }

    pub fn outgoing(&self, s: StateId) -> &[Transition] {
        &self.transitions[self.offsets[s.index()]..self.offsets[s.index() + 1]]
    }

    pub fn successors(&self, s: StateId, a: ActionId) -> impl Iterator<Item = StateId> + '_ {
        let out = self.outgoing(s);
        let start = out.partition_point(|t| t.action < a);
        out[start..].iter().take_while(move |t| t.action == a).map(|t| t.target)
    }

    pub fn enabled(&self, s: StateId, a: ActionId) -> bool {
        self.successors(s, a).next().is_some()
    }

    /// States reachable from `from` by one action in `actions` (all actions if `None`).
    pub fn post(&self, from: &[StateId], actions: Option<&[ActionId]>) -> Vec<StateId> {
        let mut mark = vec![false; self.num_states];
        for &s in from {
            for t in self.outgoing(s) {
                if actions.is_none_or(|acts| acts.contains(&t.action)) {
                    mark[t.target.index()] = true;
                }
            }
        }
        collect_marked(&mark)
    }

    /// States reached by reading `word` from the initial states.
    pub fn exec(&self, word: &[ActionId]) -> Vec<StateId> {
        let mut current = self.initial.clone();
        for &a in word {
            if current.is_empty() {
                break;
            }
            current = self.post(&current, Some(&[a]));
        }
        current
    }

    pub fn accepts(&self, word: &[ActionId]) -> bool {
        !self.exec(word).is_empty()
    }

    /// One initial state and at most one successor per state and action.
    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1
            && self
                .transitions
                .windows(2)
                .all(|w| (w[0].source, w[0].action) != (w[1].source, w[1].action))
    }

    /// Every action of `actions` is enabled in every state.
    pub fn is_action_enabled(&self, actions: &[ActionId]) -> bool {
        self.states()
            .all(|s| actions.iter().all(|&a| self.enabled(s, a)))
    }

    /// States reachable from the initial states, in canonical breadth-first
    /// order: initial states ascending, then successors by transition order.
    pub fn bfs_order(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            if !seen[s.index()] {
                seen[s.index()] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for t in self.outgoing(s) {
                if !seen[t.target.index()] {
                    seen[t.target.index()] = true;
                    queue.push_back(t.target);
                }
            }
        }
        order
    }

    /// Drops unreachable states and renumbers the rest in [`Self::bfs_order`].
    ///
    /// Returns the new system and, for each new state, its old id.
    pub fn prune(&self) -> (TransitionSystem, Vec<StateId>) {
        let order = self.bfs_order();
        let mut renumber = vec![None; self.num_states];
        for (new, old) in order.iter().enumerate() {
            renumber[old.index()] = Some(StateId(new as u32));
        }
        let initial = self.initial.iter().map(|s| renumber[s.index()].unwrap()).collect();
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| {
                Some(Transition::new(renumber[t.source.index()]?, t.action, renumber[t.target.index()]?))
            })
            .collect();
        let ts = TransitionSystem::new(self.alphabet.clone(), order.len(), initial, transitions)
            .expect("renumbered system is well-formed");
        (ts, order)
    }
}

pub(crate) fn collect_marked(mark: &[bool]) -> Vec<StateId> {
    mark.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| StateId(i as u32))
        .collect()
}

/// Removes the symbols of `word` outside `keep`, preserving order.
pub fn word_projection(word: &[ActionId], keep: &[ActionId]) -> Vec<ActionId> {
    word.iter().copied().filter(|a| keep.contains(a)).collect()
}
