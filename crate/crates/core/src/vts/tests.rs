use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::model::ModelBody;
use crate::semilattice::{ConfigDomain, FaultDomain, FaultSet, Truth, Truth3, Truth5};
use crate::synth::track;
use crate::testutil::{self, arb_fault_vts, arb_truth_vts, parse, words};

fn email_monitor() -> (Vts<ConfigDomain>, AnnotatedTs<ConfigDomain>) {
    let fts = parse(fixtures::EMAIL).fts().unwrap().clone();
    (track(&fts), fts)
}

fn truth3_fixture(text: &str) -> Vts<Truth3> {
    match parse(text).body {
        ModelBody::Truth3(a) => Vts::from_state_annotations(&a),
        _ => panic!("expected a three-valued model"),
    }
}

fn truth5_fixture(text: &str) -> Vts<Truth5> {
    match parse(text).body {
        ModelBody::Truth5(a) => Vts::from_state_annotations(&a),
        _ => panic!("expected a five-valued model"),
    }
}

fn config_fixture(text: &str) -> Vts<ConfigDomain> {
    Vts::from_state_annotations(parse(text).fts().unwrap())
}

fn canon<D: VerdictDomain>(m: &Vts<D>, word: &[&str]) -> String {
    m.domain().canonical(&m.yielded_named(word).unwrap())
}

#[test]
fn email_yielded_verdicts() {
    let (m, _) = email_monitor();
    assert_eq!(canon(&m, &[]), "[{s},{e},{s,e}]");
    assert_eq!(canon(&m, &["sign"]), "[{s},{s,e}]");
    assert_eq!(canon(&m, &["sign", "enc"]), "[{s,e}]");
    assert_eq!(canon(&m, &["sign", "send"]), "[{s}]");
    assert_eq!(m.yielded_named(&["send"]), Err(VtsError::OutOfLanguage));
    assert!(matches!(m.yielded_named(&["fly"]), Err(VtsError::AlphabetMismatch(_))));
}

#[test]
fn monotonicity_examples() {
    let (email, _) = email_monitor();
    assert!(email.is_monotonic());
    assert!(truth3_fixture(fixtures::REQUEST_DISPENSE).is_monotonic());
    let response = truth5_fixture(fixtures::RESPONSE);
    assert!(!response.is_monotonic());
    let violations = response.monotonicity_violations();
    assert!(!violations.is_empty());
    for (q, q2) in violations {
        assert!(!response.domain().leq(response.verdict(q2), response.verdict(q)));
    }
}

#[test]
fn refinement_examples() {
    let left = config_fixture(fixtures::LOOKAHEAD);
    let right = crate::synth::lookahead(&left);
    assert!(refines(&right, &left, 6).unwrap());
    assert!(refines_exact(&right, &left).unwrap());
    assert!(!refines_exact(&left, &right).unwrap());
    assert_eq!(refinement_counterexample(&left, &right, None).unwrap(), Some(vec![]));
    assert!(verdict_equivalent(&left, &left).unwrap());
    assert!(!verdict_equivalent(&left, &right).unwrap());
}

#[test]
fn refinement_examples_truth() {
    let a = truth3_fixture(fixtures::REQUEST_DISPENSE);
    let b = a.with_verdicts(vec![Truth::Unknown; a.num_states()]);
    assert!(refines_exact(&a, &b).unwrap());
    assert!(!refines_exact(&b, &a).unwrap());
    let other = Vts::from_parts(Truth3, testutil::alphabet(2), vec![StateId(0)], vec![], vec![Truth::Unknown]);
    assert!(matches!(refines_exact(&a, &other), Err(VtsError::AlphabetMismatch(_))));
}

#[test]
fn language_difference_breaks_refinement() {
    let a = truth3_fixture(fixtures::REQUEST_DISPENSE);
    let (d, ts, vs) = a.clone().into_parts();
    let kept = ts.transitions().iter().copied().filter(|t| t.source != t.target).collect();
    let smaller = Vts::from_parts(d, ts.alphabet().clone(), ts.initial().to_vec(), kept, vs);
    let cex = refinement_counterexample(&a, &smaller, None).unwrap().unwrap();
    assert!(a.yielded(&cex).is_some() != smaller.yielded(&cex).is_some());
}

#[test]
fn email_monitor_is_sound_and_complete() {
    let (m, fts) = email_monitor();
    let report = check_sound_complete(&m, &fts, 6).unwrap();
    assert!(report.is_sound() && report.is_complete(), "{report:?}");
    assert!(report.words_checked > 1);
}

/// Changes the verdict of the state reached by "sign send".
fn widen_after_sign_send(m: &Vts<ConfigDomain>) -> Vts<ConfigDomain> {
    let w = m.alphabet().word(&["sign", "send"]).unwrap();
    let [q] = m.ts().exec(&w)[..] else { panic!("email monitor is deterministic here") };
    let mut verdicts = m.verdicts().to_vec();
    verdicts[q.index()] = m.domain().full();
    m.with_verdicts(verdicts)
}

#[test]
fn widened_monitor_is_unsound_but_complete() {
    let (m, fts) = email_monitor();
    let wide = widen_after_sign_send(&m);
    let report = check_sound_complete(&wide, &fts, 6).unwrap();
    assert!(!report.is_sound());
    assert!(report.is_complete());
    assert!(report.unsound.iter().all(|(w, _)| w.starts_with("sign send")));
}

#[test]
fn narrowed_monitor_is_sound_but_incomplete() {
    let (m, fts) = email_monitor();
    let mut verdicts = m.verdicts().to_vec();
    let d = m.domain();
    let q0 = m.ts().initial()[0];
    let mut configs = d.configurations(m.verdict(q0));
    configs.pop();
    verdicts[q0.index()] = d.from_configs(&configs).unwrap().unwrap();
    let narrow = m.with_verdicts(verdicts);
    let report = check_sound_complete(&narrow, &fts, 6).unwrap();
    assert!(report.is_sound());
    assert!(!report.is_complete());
    assert!(report.incomplete.iter().all(|(w, _)| w.is_empty()));
}

#[test]
fn dot_export_lists_verdicts() {
    let (m, _) = email_monitor();
    let dot = m.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("[{s,e}]"));
    assert!(dot.contains("sign"));
}

/// A simple lattice automaton over fault sets: transitions and initial
/// weights are top, so a run's value is the final weight of its last state.
/// Its value on a word is the join over runs, or bottom (every class) if
/// there is none.
struct LatticeAutomaton {
    initial: Vec<usize>,
    delta: Vec<(usize, usize, usize)>,
    final_weight: Vec<u64>,
}

impl LatticeAutomaton {
    fn value(&self, word: &[usize]) -> u64 {
        fn go(la: &LatticeAutomaton, q: usize, rest: &[usize]) -> Option<u64> {
            match rest.split_first() {
                None => Some(la.final_weight[q]),
                Some((&a, tail)) => la
                    .delta
                    .iter()
                    .filter(|&&(s, b, _)| s == q && b == a)
                    .filter_map(|&(_, _, t)| go(la, t, tail))
                    .reduce(|x, y| x & y),
            }
        }
        self.initial
            .iter()
            .filter_map(|&q| go(self, q, word))
            .reduce(|x, y| x & y)
            .unwrap_or(0b111)
    }
}

#[test]
fn lattice_automaton_fixture_values_agree() {
    let la = LatticeAutomaton {
        initial: vec![0, 1],
        delta: vec![(0, 0, 1), (0, 0, 2), (1, 1, 3), (2, 1, 3), (2, 0, 0), (3, 0, 3), (3, 1, 1)],
        final_weight: vec![0b000, 0b001, 0b011, 0b101],
    };
    let m = Vts::from_parts(
        testutil::fault_domain(),
        testutil::alphabet(2),
        la.initial.iter().map(|&q| StateId(q as u32)).collect(),
        la.delta
            .iter()
            .map(|&(s, a, t)| Transition::new(StateId(s as u32), ActionId(a as u32), StateId(t as u32)))
            .collect(),
        la.final_weight.iter().map(|&w| FaultSet(w)).collect(),
    );
    let bottom = FaultSet(0b111);
    for w in words(2, 6) {
        let raw: Vec<usize> = w.iter().map(|a| a.index()).collect();
        let expected = FaultSet(la.value(&raw));
        match m.yielded(&w) {
            Some(v) => assert_eq!(v, expected, "word {w:?}"),
            // Outside the language the automaton's value is bottom.
            None => assert_eq!(expected, bottom, "word {w:?}"),
        }
    }
}

fn renumbered<D: VerdictDomain>(m: &Vts<D>, perm: &[usize]) -> Vts<D> {
    let n = m.num_states();
    let map = |q: StateId| StateId(perm[q.index()] as u32);
    let mut verdicts = vec![m.verdict(StateId(0)).clone(); n];
    for q in m.ts().states() {
        verdicts[perm[q.index()]] = m.verdict(q).clone();
    }
    Vts::from_parts(
        m.domain().clone(),
        m.alphabet().clone(),
        m.ts().initial().iter().map(|&q| map(q)).collect(),
        m.ts()
            .transitions()
            .iter()
            .map(|t| Transition::new(map(t.source), t.action, map(t.target)))
            .collect(),
        verdicts,
    )
}

fn arb_vts_with_perm() -> impl Strategy<Value = (Vts<Truth5>, Vec<usize>)> {
    arb_truth_vts().prop_flat_map(|m| {
        let n = m.num_states();
        (Just(m), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

proptest! {
    #[test]
    fn yielded_invariant_under_renumbering((m, perm) in arb_vts_with_perm()) {
        let r = renumbered(&m, &perm);
        for w in words(m.alphabet().len(), 4) {
            prop_assert_eq!(m.yielded(&w), r.yielded(&w));
        }
        prop_assert!(verdict_equivalent(&m, &r).unwrap());
    }

    #[test]
    fn yielded_matches_run_enumeration(m in arb_fault_vts()) {
        for w in words(m.alphabet().len(), 4) {
            prop_assert_eq!(m.yielded(&w), testutil::run_join(&m, &w));
        }
    }

    #[test]
    fn deterministic_yield_is_state_verdict(m in arb_truth_vts()) {
        prop_assume!(m.ts().is_deterministic());
        for w in words(m.alphabet().len(), 4) {
            let reached = m.ts().exec(&w);
            prop_assert!(reached.len() <= 1);
            prop_assert_eq!(m.yielded(&w), reached.first().map(|q| *m.verdict(*q)));
        }
    }

    #[test]
    fn bounded_and_exact_refinement_agree(a in arb_truth_vts(), b in arb_truth_vts()) {
        prop_assume!(a.alphabet().len() == b.alphabet().len());
        let depth = a.num_states() * b.num_states();
        let exact = refines_exact(&a, &b).unwrap();
        prop_assert_eq!(refines(&a, &b, depth).unwrap(), exact);
        let naive = words(a.alphabet().len(), 4).iter().all(|w| match (a.yielded(w), b.yielded(w)) {
            (None, None) => true,
            (Some(x), Some(y)) => Truth5.leq(&x, &y),
            _ => false,
        });
        if exact {
            prop_assert!(naive);
        }
        prop_assert!(refines_exact(&a, &a).unwrap());
    }
}

#[test]
fn fault_domain_is_usable_in_vts() {
    let d = FaultDomain::new(vec!["F_p".into()]).unwrap();
    let m = Vts::from_parts(d, testutil::alphabet(1), vec![StateId(0)], vec![], vec![FaultSet(1)]);
    assert_eq!(m.domain().canonical(&m.yielded(&[]).unwrap()), "{F_p}");
}
