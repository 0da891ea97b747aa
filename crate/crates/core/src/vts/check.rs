//! Refinement, verdict-equivalence and configuration-monitor correctness.

use std::collections::{HashMap, VecDeque};

use super::{Vts, VtsError};
use crate::model::{project_config, ActionId, AnnotatedTs, StateId, TransitionSystem};
use crate::semilattice::{ConfigDomain, VerdictDomain};

/// Maps each action of `m` to the equally named action of `other`.
fn action_map<D: VerdictDomain>(m: &Vts<D>, other: &Vts<D>) -> Result<Vec<ActionId>, VtsError> {
    let (a, b) = (m.alphabet(), other.alphabet());
    if a.len() != b.len() {
        return Err(VtsError::AlphabetMismatch(format!("{} vs {} actions", a.len(), b.len())));
    }
    a.ids()
        .map(|x| {
            b.id(a.name(x))
                .ok_or_else(|| VtsError::AlphabetMismatch(format!("action {:?} missing", a.name(x))))
        })
        .collect()
}

/// A shortest word witnessing that `m` does not refine `other`, exploring
/// words up to `bound` (all words if `None`).
///
/// Explores pairs of reachable state sets breadth-first; since both
/// components are finite, the exhaustive search terminates.
pub fn refinement_counterexample<D: VerdictDomain>(
    m: &Vts<D>,
    other: &Vts<D>,
    bound: Option<usize>,
) -> Result<Option<Vec<ActionId>>, VtsError> {
    let map = action_map(m, other)?;
    type Key = (Vec<StateId>, Vec<StateId>);
    let start: Key = (m.ts().initial().to_vec(), other.ts().initial().to_vec());
    let mut parent: HashMap<Key, Option<(Key, ActionId)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(start.clone(), None);
    queue.push_back((start, 0usize));
    let word_to = |key: &Key, parent: &HashMap<Key, Option<(Key, ActionId)>>| {
        let mut word = Vec::new();
        let mut k = key.clone();
        while let Some(Some((prev, a))) = parent.get(&k) {
            word.push(*a);
            k = prev.clone();
        }
        word.reverse();
        word
    };
    while let Some((key, depth)) = queue.pop_front() {
        let (p, q) = &key;
        match (m.join_of(p), other.join_of(q)) {
            (None, None) => continue,
            (Some(v), Some(w)) if m.domain().leq(&v, &w) => {}
            _ => return Ok(Some(word_to(&key, &parent))),
        }
        if bound.is_some_and(|b| depth >= b) {
            continue;
        }
        for a in m.alphabet().ids() {
            let next = (m.ts().post(p, Some(&[a])), other.ts().post(q, Some(&[map[a.index()]])));
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((key.clone(), a)));
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(None)
}

/// Bounded refinement check over all words up to `depth`.
pub fn refines<D: VerdictDomain>(m: &Vts<D>, other: &Vts<D>, depth: usize) -> Result<bool, VtsError> {
    Ok(refinement_counterexample(m, other, Some(depth))?.is_none())
}

/// Exact refinement check on the product of the subset constructions.
pub fn refines_exact<D: VerdictDomain>(m: &Vts<D>, other: &Vts<D>) -> Result<bool, VtsError> {
    Ok(refinement_counterexample(m, other, None)?.is_none())
}

/// Exact verdict-equivalence: refinement in both directions.
pub fn verdict_equivalent<D: VerdictDomain>(m: &Vts<D>, other: &Vts<D>) -> Result<bool, VtsError> {
    Ok(refines_exact(m, other)? && refines_exact(other, m)?)
}

/// Counterexamples to soundness and completeness of a configuration monitor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SoundnessReport {
    pub words_checked: usize,
    /// (word, configuration) reported without a witnessing trace.
    pub unsound: Vec<(String, String)>,
    /// (word, configuration) with a witnessing trace but not reported.
    pub incomplete: Vec<(String, String)>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.unsound.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.incomplete.is_empty()
    }
}

/// Reachable states of one configuration's system, closed under the
/// actions the monitor does not observe.
struct Projected {
    ts: TransitionSystem,
    hidden: Vec<ActionId>,
}

impl Projected {
    fn close(&self, mut set: Vec<StateId>) -> Vec<StateId> {
        if self.hidden.is_empty() {
            return set;
        }
        loop {
            let mut next = self.ts.post(&set, Some(&self.hidden));
            next.extend_from_slice(&set);
            next.sort_unstable();
            next.dedup();
            if next.len() == set.len() {
                return set;
            }
            set = next;
        }
    }
}

/// Checks every word up to `depth` over the monitor's alphabet.
///
/// A configuration witnesses a word if its system has a trace whose
/// restriction to the monitor's alphabet is that word; for a monitor over
/// the full alphabet this is plain membership in its language.
pub fn check_sound_complete(
    monitor: &Vts<ConfigDomain>,
    fts: &AnnotatedTs<ConfigDomain>,
    depth: usize,
) -> Result<SoundnessReport, VtsError> {
    let fts_alpha = fts.ts().alphabet();
    let to_fts: Vec<ActionId> = monitor
        .alphabet()
        .ids()
        .map(|a| {
            let name = monitor.alphabet().name(a);
            fts_alpha
                .id(name)
                .ok_or_else(|| VtsError::AlphabetMismatch(format!("action {name:?} not in the model")))
        })
        .collect::<Result<_, _>>()?;
    let hidden: Vec<ActionId> = fts_alpha.ids().filter(|a| !to_fts.contains(a)).collect();
    let md = monitor.domain();
    let configs = fts.domain().all_configurations();
    let systems: Vec<Projected> = configs
        .iter()
        .map(|&c| Projected {
            ts: project_config(fts, c).expect("enumerated configurations are valid"),
            hidden: hidden.clone(),
        })
        .collect();

    let mut report = SoundnessReport::default();
    // (observed word, monitor states, per-configuration system states)
    type Frame = (Vec<ActionId>, Vec<StateId>, Vec<Vec<StateId>>);
    let mut stack: Vec<Frame> = vec![(
        Vec::new(),
        monitor.ts().initial().to_vec(),
        systems.iter().map(|p| p.close(p.ts.initial().to_vec())).collect(),
    )];
    while let Some((word, mstates, csets)) = stack.pop() {
        report.words_checked += 1;
        let verdict = monitor.join_of(&mstates);
        let text = monitor.alphabet().format_word(&word);
        for (i, &c) in configs.iter().enumerate() {
            let witnessed = !csets[i].is_empty();
            let reported = verdict.as_ref().is_some_and(|v| md.contains(v, c));
            if reported && !witnessed {
                report.unsound.push((text.clone(), md.format_config(c)));
            } else if witnessed && !reported {
                report.incomplete.push((text.clone(), md.format_config(c)));
            }
        }
        if word.len() >= depth || (mstates.is_empty() && csets.iter().all(Vec::is_empty)) {
            continue;
        }
        for a in monitor.alphabet().ids().collect::<Vec<_>>().into_iter().rev() {
            let fa = to_fts[a.index()];
            let next_m = monitor.ts().post(&mstates, Some(&[a]));
            let next_c = systems
                .iter()
                .zip(&csets)
                .map(|(p, set)| p.close(p.ts.post(set, Some(&[fa]))))
                .collect();
            let mut w = word.clone();
            w.push(a);
            stack.push((w, next_m, next_c));
        }
    }
    Ok(report)
}
