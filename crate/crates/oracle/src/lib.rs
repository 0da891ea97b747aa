//! Brute-force reference semantics. Everything here works on explicit runs
//! and words and shares no algorithm with the library it checks.

pub mod gen;
pub mod suite;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use vtsynth::compile::{DeterministicVts, MonitorArtifact};
use vtsynth::model::{ActionId, AnnotatedTs, StateId, TransitionSystem};
use vtsynth::semilattice::{ConfigDomain, Configuration, VerdictDomain};
use vtsynth::vts::Vts;

/// Every word over `k` actions of length at most `max_len`, shortest first.
pub fn words(k: usize, max_len: usize) -> Vec<Vec<ActionId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..k {
                let mut w2: Vec<ActionId> = w.clone();
                w2.push(ActionId(a as u32));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All runs of `ts` on `word`, as sequences of transition indices
/// (prefixed by the initial state).
pub fn runs(ts: &TransitionSystem, word: &[ActionId]) -> Vec<(StateId, Vec<usize>)> {
    let mut out = Vec::new();
    for &s in ts.initial() {
        let mut partial = vec![(s, s, Vec::new())];
        for &a in word {
            let mut next = Vec::new();
            for (start, at, path) in &partial {
                for (i, t) in ts.transitions().iter().enumerate() {
                    if t.source == *at && t.action == a {
                        let mut p = path.clone();
                        p.push(i);
                        next.push((*start, t.target, p));
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(start, _, p)| (start, p)));
    }
    out
}

fn join_opt<D: VerdictDomain>(d: &D, acc: Option<D::Verdict>, v: &D::Verdict) -> Option<D::Verdict> {
    Some(match acc {
        None => v.clone(),
        Some(a) => d.join(&a, v),
    })
}

/// Join over runs of the meet of the final state's annotation with every
/// transition annotation along the run; runs with an undefined meet do not
/// count. `None` if no run counts.
pub fn tracked_verdict<D: VerdictDomain>(a: &AnnotatedTs<D>, word: &[ActionId]) -> Option<D::Verdict> {
    let d = a.domain();
    let ts = a.ts();
    let mut result = None;
    'runs: for (start, path) in runs(ts, word) {
        let last = path.last().map_or(start, |&i| ts.transitions()[i].target);
        let mut acc = a.state_annot(last).clone();
        for &i in &path {
            match d.meet(&acc, a.trans_annot(i)) {
                Some(m) => acc = m,
                None => continue 'runs,
            }
        }
        result = join_opt(d, result, &acc);
    }
    result
}

fn join_states<D: VerdictDomain>(m: &Vts<D>, states: impl IntoIterator<Item = StateId>) -> Option<D::Verdict> {
    states.into_iter().fold(None, |acc, s| join_opt(m.domain(), acc, m.verdict(s)))
}

/// Join of the verdicts of all run endpoints.
pub fn vts_verdict<D: VerdictDomain>(m: &Vts<D>, word: &[ActionId]) -> Option<D::Verdict> {
    let ts = m.ts();
    join_states(m, runs(ts, word).into_iter().map(|(s, p)| p.last().map_or(s, |&i| ts.transitions()[i].target)))
}

/// Which unobserved actions may be slipped between observed ones.
struct Gaps<'a> {
    insertable: &'a dyn Fn(ActionId) -> bool,
    /// Longest run of consecutive insertions.
    max: usize,
    trailing_only: bool,
}

/// States reachable by some actual word whose observation is `observed`.
fn explore<D: VerdictDomain>(m: &Vts<D>, observed: &[ActionId], gaps: &Gaps) -> BTreeSet<StateId> {
    let ts = m.ts();
    let mut seen = HashSet::new();
    let mut stack: Vec<(usize, StateId, usize)> = ts.initial().iter().map(|&s| (0, s, 0)).collect();
    let mut ends = BTreeSet::new();
    while let Some(node @ (pos, s, lost)) = stack.pop() {
        if !seen.insert(node) {
            continue;
        }
        if pos == observed.len() {
            ends.insert(s);
        }
        for t in ts.transitions().iter().filter(|t| t.source == s) {
            if pos < observed.len() && t.action == observed[pos] {
                stack.push((pos + 1, t.target, 0));
            }
            let may_insert = lost < gaps.max && (!gaps.trailing_only || pos == observed.len());
            if may_insert && (gaps.insertable)(t.action) {
                // Counting past |Q| consecutive insertions reaches nothing new.
                stack.push((pos, t.target, (lost + 1).min(ts.num_states() + 1)));
            }
        }
    }
    ends
}

/// Verdict of the projection onto `observable` (in its alphabet order) for
/// a word over the projected alphabet.
pub fn projected_verdict<D: VerdictDomain>(
    m: &Vts<D>,
    observable: &[ActionId],
    word: &[ActionId],
) -> Option<D::Verdict> {
    let mut obs = observable.to_vec();
    obs.sort();
    obs.dedup();
    let original: Vec<ActionId> = word.iter().map(|a| obs[a.index()]).collect();
    let hidden = |a: ActionId| !obs.contains(&a);
    let gaps = Gaps {
        insertable: &hidden,
        max: usize::MAX,
        trailing_only: false,
    };
    join_states(m, explore(m, &original, &gaps))
}

/// Verdict of the `bound`-delayed system: everything reachable within
/// `bound` more steps after the word. `None` bound means unbounded.
pub fn delayed_verdict<D: VerdictDomain>(m: &Vts<D>, bound: Option<usize>, word: &[ActionId]) -> Option<D::Verdict> {
    let ts = m.ts();
    let here: Vec<StateId> = runs(ts, word)
        .into_iter()
        .map(|(s, p)| p.last().map_or(s, |&i| ts.transitions()[i].target))
        .collect();
    if here.is_empty() {
        return None;
    }
    // Longer suffixes reach nothing new.
    let b = bound.unwrap_or(usize::MAX).min(ts.num_states());
    let mut reached: BTreeSet<StateId> = here.iter().copied().collect();
    for suffix in words(ts.alphabet().len(), b) {
        for &s in &here {
            let mut cur = vec![s];
            for &a in &suffix {
                cur = cur
                    .iter()
                    .flat_map(|&q| ts.transitions().iter().filter(move |t| t.source == q && t.action == a))
                    .map(|t| t.target)
                    .collect();
            }
            reached.extend(cur);
        }
    }
    join_states(m, reached)
}

/// Verdict under at most `bound` consecutive lost actions (`None`:
/// unbounded), losses allowed anywhere including after the last
/// observation.
pub fn lossy_verdict<D: VerdictDomain>(m: &Vts<D>, bound: Option<usize>, word: &[ActionId]) -> Option<D::Verdict> {
    let any = |_| true;
    let gaps = Gaps {
        insertable: &any,
        max: bound.unwrap_or(usize::MAX),
        trailing_only: false,
    };
    join_states(m, explore(m, word, &gaps))
}

/// A shortest word of length at most `max_len` after which `p` and `q`
/// differ in verdict or in being defined, by breadth-first search over
/// pairs of states.
pub fn distinguishing_word<D: VerdictDomain>(
    d: &DeterministicVts<D>,
    p: StateId,
    q: StateId,
    max_len: usize,
) -> Option<Vec<ActionId>> {
    let differ = |x: Option<StateId>, y: Option<StateId>| match (x, y) {
        (None, None) => false,
        (Some(x), Some(y)) => d.domain().canonical(d.verdict(x)) != d.domain().canonical(d.verdict(y)),
        _ => true,
    };
    let mut seen = HashSet::new();
    let mut layer = vec![(Some(p), Some(q), Vec::new())];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (x, y, w) in layer {
            if differ(x, y) {
                return Some(w);
            }
            if len == max_len || (x.is_none() && y.is_none()) || !seen.insert((x, y)) {
                continue;
            }
            for a in d.alphabet().ids() {
                let mut w2 = w.clone();
                w2.push(a);
                next.push((x.and_then(|x| d.step(x, a)), y.and_then(|y| d.step(y, a)), w2));
            }
        }
        layer = next;
    }
    None
}

/// Whether configuration `config` can perform `word` in the featured system
/// (both guards and state annotations must admit it).
pub fn config_accepts(fts: &AnnotatedTs<ConfigDomain>, config: Configuration, word: &[ActionId]) -> bool {
    let d = fts.domain();
    let ts = fts.ts();
    runs(ts, word).into_iter().any(|(start, path)| {
        d.contains(fts.state_annot(start), config)
            && path.iter().all(|&i| {
                d.contains(fts.trans_annot(i), config) && d.contains(fts.state_annot(ts.transitions()[i].target), config)
            })
    })
}

/// Configurations that can produce some behaviour observed as `observed`
/// (a word over `observable`, in original action ids).
pub fn configs_explaining(
    fts: &AnnotatedTs<ConfigDomain>,
    observable: &[ActionId],
    observed: &[ActionId],
) -> Vec<Configuration> {
    let d = fts.domain();
    let ts = fts.ts();
    d.all_configurations()
        .into_iter()
        .filter(|&c| {
            let alive = |s: StateId| d.contains(fts.state_annot(s), c);
            let mut seen = HashSet::new();
            let mut stack: Vec<(usize, StateId)> = ts.initial().iter().copied().filter(|&s| alive(s)).map(|s| (0, s)).collect();
            while let Some((pos, s)) = stack.pop() {
                if !seen.insert((pos, s)) {
                    continue;
                }
                if pos == observed.len() {
                    return true;
                }
                for (i, t) in ts.transitions().iter().enumerate() {
                    if t.source != s || !d.contains(fts.trans_annot(i), c) || !alive(t.target) {
                        continue;
                    }
                    if t.action == observed[pos] {
                        stack.push((pos + 1, t.target));
                    } else if !observable.contains(&t.action) {
                        stack.push((pos, t.target));
                    }
                }
            }
            false
        })
        .collect()
}

/// Checks that a configuration monitor observing `observable` yields, for
/// every observation of length at most `max_len`, exactly the configurations
/// able to explain it, and is undefined exactly when none can.
pub fn check_config_monitor(
    fts: &AnnotatedTs<ConfigDomain>,
    observable: &[ActionId],
    monitor: &MonitorArtifact,
    max_len: usize,
) -> Result<(), String> {
    let d = fts.domain();
    let names = fts.ts().alphabet();
    let obs_names: Vec<&str> = monitor.actions.iter().map(String::as_str).collect();
    let mut expected_names: Vec<&str> = observable.iter().map(|&a| names.name(a)).collect();
    expected_names.sort_by_key(|n| names.id(n));
    if obs_names != expected_names {
        return Err(format!("monitor observes {obs_names:?}, expected {expected_names:?}"));
    }
    for w in words(obs_names.len(), max_len) {
        let original: Vec<ActionId> = w.iter().map(|a| names.id(obs_names[a.index()]).unwrap()).collect();
        let explaining = configs_explaining(fts, observable, &original);
        let state = w.iter().try_fold(monitor.initial, |q, a| monitor.step(q, *a));
        let shown = names.format_word(&original);
        match state {
            None if explaining.is_empty() => {}
            None => return Err(format!("incomplete: {shown:?} is explained by {explaining:?} but rejected")),
            Some(_) if explaining.is_empty() => return Err(format!("unsound: {shown:?} is accepted but unexplained")),
            Some(q) => {
                let v = &monitor.states[q as usize].verdict;
                let got = d.configurations(&d.parse_verdict(v).map_err(|e| e.to_string())?);
                if got != explaining {
                    return Err(format!("after {shown:?}: monitor says {v}, explanations are {explaining:?}"));
                }
            }
        }
    }
    Ok(())
}

/// Exact expected ruled-out percentage after `steps` steps of the uniform
/// random walk: a uniformly drawn configuration, a uniform initial state,
/// then uniformly chosen enabled transitions, stopping at dead ends.
pub fn expected_ruled_out(fts: &AnnotatedTs<ConfigDomain>, monitor: &MonitorArtifact, steps: usize) -> f64 {
    let d = fts.domain();
    let ts = fts.ts();
    let universe = d.universe_size() as f64;
    let percent = |q: u32| {
        let count: f64 = monitor.states[q as usize].count.as_ref().unwrap().parse().unwrap();
        (universe - count) / universe * 100.0
    };
    let configs = d.all_configurations();
    let mut total = 0.0;
    for &c in &configs {
        let alive = |s: StateId| d.contains(fts.state_annot(s), c);
        let initial: Vec<StateId> = ts.initial().iter().copied().filter(|&s| alive(s)).collect();
        if initial.is_empty() {
            total += percent(monitor.initial);
            continue;
        }
        let mut dist: BTreeMap<(StateId, u32), f64> = BTreeMap::new();
        for &s in &initial {
            *dist.entry((s, monitor.initial)).or_default() += 1.0 / initial.len() as f64;
        }
        for _ in 0..steps {
            let mut next = BTreeMap::new();
            for (&(s, q), &p) in &dist {
                let enabled: Vec<(usize, _)> = ts
                    .transitions()
                    .iter()
                    .enumerate()
                    .filter(|(i, t)| t.source == s && d.contains(fts.trans_annot(*i), c) && alive(t.target))
                    .collect();
                if enabled.is_empty() {
                    *next.entry((s, q)).or_default() += p;
                    continue;
                }
                for (_, t) in &enabled {
                    let q2 = match monitor.action_id(ts.alphabet().name(t.action)) {
                        Some(a) => monitor.step(q, a).expect("monitor follows the system"),
                        None => q,
                    };
                    *next.entry((t.target, q2)).or_default() += p / enabled.len() as f64;
                }
            }
            dist = next;
        }
        total += dist.iter().map(|(&(_, q), p)| p * percent(q)).sum::<f64>();
    }
    total / configs.len() as f64
}

/// Checks that `artifact` is, up to renaming of states, the monitor with
/// the given initial state and rows `(verdict, [(action, target)])`.
pub fn isomorphic_to(
    artifact: &MonitorArtifact,
    initial: usize,
    expected: &[(&str, &[(&str, usize)])],
) -> Result<(), String> {
    if artifact.num_states() != expected.len() {
        return Err(format!("{} states, expected {}", artifact.num_states(), expected.len()));
    }
    let mut map: Vec<Option<u32>> = vec![None; expected.len()];
    let mut stack = vec![(initial, artifact.initial)];
    while let Some((e, q)) = stack.pop() {
        match map[e] {
            Some(prev) if prev == q => continue,
            Some(prev) => return Err(format!("expected state {e} maps to both {prev} and {q}")),
            None => map[e] = Some(q),
        }
        let (verdict, row) = expected[e];
        let state = &artifact.states[q as usize];
        if state.verdict != verdict {
            return Err(format!("state {q} has verdict {}, expected {verdict}", state.verdict));
        }
        let defined = state.next.iter().flatten().count();
        if defined != row.len() {
            return Err(format!("state {q} has {defined} transitions, expected {}", row.len()));
        }
        for &(action, target) in row {
            let a = artifact.action_id(action).ok_or_else(|| format!("no action {action}"))?;
            let t = artifact.step(q, a).ok_or_else(|| format!("state {q} lacks {action}"))?;
            stack.push((target, t));
        }
    }
    let mut image: Vec<u32> = map.iter().map(|m| m.ok_or("unreachable expected state")).collect::<Result<_, _>>()?;
    image.sort();
    image.dedup();
    if image.len() != expected.len() {
        return Err("state mapping is not injective".into());
    }
    Ok(())
}
