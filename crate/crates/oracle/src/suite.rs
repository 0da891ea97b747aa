//! Per-instance checks of the library against the brute-force semantics,
//! and a seeded driver running all of them.

use std::collections::BTreeMap;

use vtsynth::compile::{determinize, minimize};
use vtsynth::model::{ActionId, AnnotatedTs};
use vtsynth::semilattice::VerdictDomain;
use vtsynth::synth::{self, Bound};
use vtsynth::vts::Vts;

use crate::{
    delayed_verdict, distinguishing_word, gen, lossy_verdict, projected_verdict, tracked_verdict, vts_verdict, words,
};

fn show<D: VerdictDomain>(d: &D, v: &Option<D::Verdict>) -> String {
    v.as_ref().map_or_else(|| "undefined".into(), |v| d.canonical(v))
}

fn compare<D: VerdictDomain>(
    what: &str,
    d: &D,
    k: usize,
    len: usize,
    got: impl Fn(&[ActionId]) -> Option<D::Verdict>,
    want: impl Fn(&[ActionId]) -> Option<D::Verdict>,
) -> Result<(), String> {
    for w in words(k, len) {
        let (g, e) = (show(d, &got(&w)), show(d, &want(&w)));
        if g != e {
            return Err(format!("{what}: word {w:?} yields {g}, expected {e}"));
        }
    }
    Ok(())
}

pub fn check_tracking<D: VerdictDomain>(a: &AnnotatedTs<D>, len: usize) -> Result<(), String> {
    let m = synth::track(a);
    compare("tracking", a.domain(), a.ts().alphabet().len(), len, |w| m.yielded(w), |w| tracked_verdict(a, w))
}

pub fn check_projection<D: VerdictDomain>(m: &Vts<D>, observable: &[ActionId], len: usize) -> Result<(), String> {
    let p = synth::project(m, observable);
    let mut obs = observable.to_vec();
    obs.sort();
    obs.dedup();
    let names: Vec<&str> = obs.iter().map(|&a| m.alphabet().name(a)).collect();
    if p.alphabet().names() != names {
        return Err(format!("projection: alphabet {:?}, expected {names:?}", p.alphabet().names()));
    }
    compare("projection", m.domain(), obs.len(), len, |w| p.yielded(w), |w| projected_verdict(m, &obs, w))
}

fn bound_opt(b: Bound) -> Option<usize> {
    match b {
        Bound::Finite(n) => Some(n),
        Bound::Unbounded => None,
    }
}

pub fn check_delay<D: VerdictDomain>(m: &Vts<D>, bound: Bound, len: usize) -> Result<(), String> {
    let p = synth::delay(m, bound);
    compare(&format!("delay({bound})"), m.domain(), m.alphabet().len(), len, |w| p.yielded(w), |w| {
        delayed_verdict(m, bound_opt(bound), w)
    })
}

pub fn check_loss<D: VerdictDomain>(m: &Vts<D>, bound: Bound, len: usize) -> Result<(), String> {
    let p = synth::loss(m, bound);
    compare(&format!("loss({bound})"), m.domain(), m.alphabet().len(), len, |w| p.yielded(w), |w| {
        lossy_verdict(m, bound_opt(bound), w)
    })
}

pub fn check_determinize<D: VerdictDomain>(m: &Vts<D>, len: usize) -> Result<(), String> {
    let Ok(d) = determinize(m) else {
        return if m.ts().initial().is_empty() {
            Ok(())
        } else {
            Err("determinize refused a system with initial states".into())
        };
    };
    compare("determinize", m.domain(), m.alphabet().len(), len, |w| d.yielded(w).cloned(), |w| vts_verdict(m, w))
}

/// Minimization preserves verdicts and leaves no two states
/// indistinguishable by words of length below the state count.
pub fn check_minimize<D: VerdictDomain>(m: &Vts<D>, len: usize) -> Result<(), String> {
    let Ok(d) = determinize(m) else { return Ok(()) };
    let min = minimize(&d);
    if min.num_states() > d.num_states() {
        return Err("minimization grew the monitor".into());
    }
    compare("minimize", m.domain(), m.alphabet().len(), len, |w| min.yielded(w).cloned(), |w| {
        d.yielded(w).cloned()
    })?;
    let n = min.num_states();
    for p in min.states() {
        for q in min.states().filter(|q| *q > p) {
            if distinguishing_word(&min, p, q, n).is_none() {
                return Err(format!("minimize: states {p} and {q} are equivalent"));
            }
        }
    }
    Ok(())
}

/// Counts of passed checks per property, and the first failures.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub cases: usize,
    pub checks: BTreeMap<&'static str, usize>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, case: usize, name: &'static str, r: Result<(), String>) {
        match r {
            Ok(()) => *self.checks.entry(name).or_default() += 1,
            Err(e) => self.failures.push(format!("case {case}: {e}")),
        }
    }
}

/// Runs every check on `cases` random instances per domain, case `i`
/// drawn from stream `i` of `seed`.
pub fn theorem_suite(cases: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport {
        cases,
        ..SuiteReport::default()
    };
    for i in 0..cases {
        let mut rng = gen::rng(seed, i as u64);
        let fts = gen::fts(&mut rng);
        let faults = gen::fault_ats(&mut rng);
        let truth = gen::truth_vts(&mut rng);
        let fault_vts = gen::fault_vts(&mut rng);
        let config_vts = gen::config_vts(&mut rng);

        report.record(i, "tracking", check_tracking(&fts, 5));
        report.record(i, "tracking", check_tracking(&faults, 5));
        let obs = gen::observable(truth.alphabet(), &mut rng);
        report.record(i, "projection", check_projection(&truth, &obs, 5));
        let obs = gen::observable(fault_vts.alphabet(), &mut rng);
        report.record(i, "projection", check_projection(&fault_vts, &obs, 5));
        for b in [0, 1, 2] {
            report.record(i, "delay", check_delay(&truth, Bound::Finite(b), 5));
            report.record(i, "delay", check_delay(&config_vts, Bound::Finite(b), 5));
        }
        for b in [0, 1, 2, fault_vts.num_states()] {
            report.record(i, "loss", check_loss(&fault_vts, Bound::Finite(b), 5));
            report.record(i, "loss", check_loss(&truth, Bound::Finite(b), 5));
        }
        report.record(i, "loss", check_loss(&truth, Bound::Unbounded, 5));
        for (name, r) in [
            ("determinize", check_determinize(&truth, 6)),
            ("determinize", check_determinize(&fault_vts, 6)),
            ("determinize", check_determinize(&config_vts, 6)),
            ("minimize", check_minimize(&truth, 5)),
            ("minimize", check_minimize(&fault_vts, 5)),
            ("minimize", check_minimize(&synth::lift(&fault_vts), 5)),
        ] {
            report.record(i, name, r);
        }
    }
    report
}
