//! Shared generators and brute-force helpers for unit tests.

use std::sync::Arc;

use proptest::prelude::*;

use crate::formula::Formula;
use crate::model::{ActionId, Alphabet, AnnotatedTs, Model, StateId, Transition};
use crate::semilattice::{
    Backend, ConfigDomain, ConfigSet, FaultDomain, FaultSet, FeatureModel, Truth, Truth5, VerdictDomain,
};
use crate::vts::Vts;

pub fn parse(text: &str) -> Model {
    Model::parse(text, Backend::Auto).unwrap()
}

/// All words up to length `len` over `alphabet` actions, shortest first.
pub fn words(alphabet: usize, len: usize) -> Vec<Vec<ActionId>> {
    let mut all = vec![vec![]];
    let mut frontier: Vec<Vec<ActionId>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &frontier {
            for a in 0..alphabet as u32 {
                let mut w2 = w.clone();
                w2.push(ActionId(a));
                next.push(w2);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

pub fn alphabet(k: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::new((0..k).map(|i| format!("a{i}"))).unwrap())
}

/// Two free features: four configurations, including the empty one.
pub fn config_domain() -> ConfigDomain {
    let model = FeatureModel::new(vec!["x".into(), "y".into()], Some(Formula::Const(true)));
    ConfigDomain::new(model, Backend::Explicit).unwrap()
}

pub fn fault_domain() -> FaultDomain {
    FaultDomain::new(vec!["F1".into(), "F2".into(), "F3".into()]).unwrap()
}

pub fn config_set(d: &ConfigDomain, mask: u8) -> ConfigSet {
    let configs: Vec<u128> = (0..4u128).filter(|c| mask >> c & 1 == 1).collect();
    d.from_configs(&configs).unwrap().unwrap()
}

pub const TRUTH5: [Truth; 5] = [Truth::True, Truth::PossiblyTrue, Truth::Unknown, Truth::PossiblyFalse, Truth::False];

/// Shape of a random system: (states, actions, initial states, transitions).
pub type Shape = (usize, usize, Vec<u32>, Vec<(u32, u32, u32)>);

pub fn arb_shape(max_states: usize, max_actions: usize) -> impl Strategy<Value = Shape> {
    (1..=max_states, 1..=max_actions).prop_flat_map(|(n, k)| {
        (
            Just(n),
            Just(k),
            proptest::collection::vec(0..n as u32, 1..3),
            proptest::collection::vec((0..n as u32, 0..k as u32, 0..n as u32), 0..3 * n),
        )
    })
}

fn transitions(raw: &[(u32, u32, u32)]) -> Vec<Transition> {
    raw.iter()
        .map(|&(s, a, t)| Transition::new(StateId(s), ActionId(a), StateId(t)))
        .collect()
}

pub fn build_vts<D: VerdictDomain>(domain: D, shape: &Shape, verdicts: Vec<D::Verdict>) -> Vts<D> {
    let (n, k, init, raw) = shape;
    assert_eq!(verdicts.len(), *n);
    Vts::from_parts(
        domain,
        alphabet(*k),
        init.iter().copied().map(StateId).collect(),
        transitions(raw),
        verdicts,
    )
}

/// Random VTS over the five-valued truth domain.
pub fn arb_truth_vts() -> impl Strategy<Value = Vts<Truth5>> {
    arb_shape(8, 4).prop_flat_map(|shape| {
        proptest::collection::vec(0..5usize, shape.0)
            .prop_map(move |vs| build_vts(Truth5, &shape, vs.into_iter().map(|i| TRUTH5[i]).collect()))
    })
}

/// Random VTS over fault sets of three classes.
pub fn arb_fault_vts() -> impl Strategy<Value = Vts<FaultDomain>> {
    arb_shape(8, 4).prop_flat_map(|shape| {
        proptest::collection::vec(0..8u64, shape.0)
            .prop_map(move |vs| build_vts(fault_domain(), &shape, vs.into_iter().map(FaultSet).collect()))
    })
}

/// Random featured system over four configurations: state annotations are
/// the full set, transition guards are random non-empty sets.
pub fn arb_fts() -> impl Strategy<Value = AnnotatedTs<ConfigDomain>> {
    arb_shape(8, 4).prop_flat_map(|shape| {
        proptest::collection::vec(1..16u8, shape.3.len()).prop_map(move |guards| {
            let d = config_domain();
            let (n, k, init, raw) = &shape;
            let mut seen = std::collections::HashSet::new();
            let trans: Vec<(Transition, ConfigSet)> = transitions(raw)
                .into_iter()
                .zip(guards)
                .filter(|(t, _)| seen.insert(*t))
                .map(|(t, g)| (t, config_set(&d, g)))
                .collect();
            AnnotatedTs::new(
                d.clone(),
                alphabet(*k),
                init.iter().copied().map(StateId).collect(),
                vec![d.full(); *n],
                trans,
            )
            .unwrap()
        })
    })
}

/// Random fault-annotated system: states carry no faults, transitions
/// carry random fault sets.
pub fn arb_fault_ats() -> impl Strategy<Value = AnnotatedTs<FaultDomain>> {
    arb_shape(8, 4).prop_flat_map(|shape| {
        (
            proptest::collection::vec(0..8u64, shape.0),
            proptest::collection::vec(0..8u64, shape.3.len()),
        )
            .prop_map(move |(fs, gs)| {
                let (_, k, init, raw) = &shape;
                let mut seen = std::collections::HashSet::new();
                let trans: Vec<(Transition, FaultSet)> = transitions(raw)
                    .into_iter()
                    .zip(gs)
                    .filter(|(t, _)| seen.insert(*t))
                    .map(|(t, g)| (t, FaultSet(g)))
                    .collect();
                AnnotatedTs::new(
                    fault_domain(),
                    alphabet(*k),
                    init.iter().copied().map(StateId).collect(),
                    fs.into_iter().map(FaultSet).collect(),
                    trans,
                )
                .unwrap()
            })
    })
}

/// Every path of `m` reading `word`, as state sequences.
pub fn runs<D: VerdictDomain>(m: &Vts<D>, word: &[ActionId]) -> Vec<Vec<StateId>> {
    let mut paths: Vec<Vec<StateId>> = m.ts().initial().iter().map(|&q| vec![q]).collect();
    for &a in word {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = *p.last().unwrap();
                m.ts().successors(last, a).map(move |q| {
                    let mut p2 = p.clone();
                    p2.push(q);
                    p2
                })
            })
            .collect();
    }
    paths
}

/// Yielded verdict by folding over individual runs.
pub fn run_join<D: VerdictDomain>(m: &Vts<D>, word: &[ActionId]) -> Option<D::Verdict> {
    runs(m, word)
        .iter()
        .map(|p| m.verdict(*p.last().unwrap()).clone())
        .reduce(|a, b| m.domain().join(&a, &b))
}
