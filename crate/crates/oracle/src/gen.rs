//! Seeded random instances: at most 8 states, 4 actions, 4 configurations
//! or 3 fault classes.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use vtsynth::formula::Formula;
use vtsynth::model::{ActionId, Alphabet, AnnotatedTs, StateId, Transition};
use vtsynth::semilattice::{Backend, ConfigDomain, ConfigSet, FaultDomain, FaultSet, FeatureModel, Truth, Truth5, VerdictDomain};
use vtsynth::vts::Vts;

#[derive(Debug, Clone)]
pub struct Shape {
    pub states: usize,
    pub alphabet: Arc<Alphabet>,
    pub initial: Vec<StateId>,
    pub transitions: Vec<Transition>,
}

pub fn shape(rng: &mut impl Rng) -> Shape {
    let states = rng.random_range(1..=8);
    let actions = rng.random_range(1..=4);
    let mut initial: Vec<StateId> = (0..rng.random_range(1..=2)).map(|_| StateId(rng.random_range(0..states as u32))).collect();
    initial.sort();
    initial.dedup();
    let mut transitions: Vec<Transition> = (0..rng.random_range(0..=2 * states))
        .map(|_| {
            Transition::new(
                StateId(rng.random_range(0..states as u32)),
                ActionId(rng.random_range(0..actions as u32)),
                StateId(rng.random_range(0..states as u32)),
            )
        })
        .collect();
    transitions.sort();
    transitions.dedup();
    Shape {
        states,
        alphabet: Arc::new(Alphabet::new((0..actions).map(|i| format!("a{i}"))).unwrap()),
        initial,
        transitions,
    }
}

/// Two features under one of several validity constraints (2 to 4
/// configurations), on either backend.
pub fn config_domain(rng: &mut impl Rng) -> ConfigDomain {
    let validity = *["true", "x | y", "x", "!(x & y)"].choose(rng).unwrap();
    let backend = if rng.random_bool(0.5) { Backend::Explicit } else { Backend::Symbolic };
    let fm = FeatureModel::new(vec!["x".into(), "y".into()], Some(Formula::parse(validity).unwrap()));
    ConfigDomain::new(fm, backend).unwrap()
}

/// A random non-empty set of valid configurations.
pub fn config_set(d: &ConfigDomain, rng: &mut impl Rng) -> ConfigSet {
    let all = d.all_configurations();
    loop {
        let pick: Vec<u128> = all.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
        if let Some(set) = d.from_configs(&pick).unwrap() {
            return set;
        }
    }
}

pub fn fault_domain() -> FaultDomain {
    FaultDomain::new(vec!["F1".into(), "F2".into(), "F3".into()]).unwrap()
}

/// A featured system. States are unconstrained (annotated with the full
/// set), as featured systems assume.
pub fn fts(rng: &mut impl Rng) -> AnnotatedTs<ConfigDomain> {
    let d = config_domain(rng);
    let s = shape(rng);
    let states = vec![d.full(); s.states];
    let trans = s.transitions.iter().map(|&t| (t, config_set(&d, rng))).collect();
    AnnotatedTs::new(d, s.alphabet, s.initial, states, trans).unwrap()
}

/// A fault-annotated system; states are mostly fault-free.
pub fn fault_ats(rng: &mut impl Rng) -> AnnotatedTs<FaultDomain> {
    let s = shape(rng);
    let mut faults = |p: f64| FaultSet(if rng.random_bool(p) { rng.random_range(1..8) } else { 0 });
    let states = (0..s.states).map(|_| faults(0.2)).collect();
    let trans = s.transitions.iter().map(|&t| (t, faults(0.5))).collect();
    AnnotatedTs::new(fault_domain(), s.alphabet, s.initial, states, trans).unwrap()
}

pub const TRUTH5: [Truth; 5] = [Truth::True, Truth::PossiblyTrue, Truth::Unknown, Truth::PossiblyFalse, Truth::False];

fn vts<D: VerdictDomain>(domain: D, rng: &mut impl Rng, mut verdict: impl FnMut(&mut dyn rand::RngCore) -> D::Verdict) -> Vts<D> {
    let s = shape(rng);
    let verdicts = (0..s.states).map(|_| verdict(rng)).collect();
    Vts::from_parts(domain, s.alphabet, s.initial, s.transitions, verdicts)
}

pub fn truth_vts(rng: &mut impl Rng) -> Vts<Truth5> {
    vts(Truth5, rng, |r| TRUTH5[r.random_range(0..5)])
}

pub fn fault_vts(rng: &mut impl Rng) -> Vts<FaultDomain> {
    vts(fault_domain(), rng, |r| FaultSet(r.random_range(0..8)))
}

pub fn config_vts(rng: &mut impl Rng) -> Vts<ConfigDomain> {
    let d = config_domain(rng);
    let s = shape(rng);
    let verdicts = (0..s.states).map(|_| config_set(&d, rng)).collect();
    Vts::from_parts(d, s.alphabet, s.initial, s.transitions, verdicts)
}

/// A random subset of the actions.
pub fn observable(alphabet: &Alphabet, rng: &mut impl Rng) -> Vec<ActionId> {
    alphabet.ids().filter(|_| rng.random_bool(0.5)).collect()
}

/// Stream `stream` of the generator seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
