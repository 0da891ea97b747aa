use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::model::{Model, ModelBody};
use crate::semilattice::Backend;
use crate::testutil::{arb_fts, parse};

fn email() -> AnnotatedTs<ConfigDomain> {
    parse(fixtures::EMAIL).fts().unwrap().clone()
}

fn cfg(runs: usize, steps: usize) -> SimulationConfig {
    SimulationConfig {
        runs,
        steps,
        seed: 7,
        ..SimulationConfig::default()
    }
}

fn all(fts: &AnnotatedTs<ConfigDomain>) -> Vec<ActionId> {
    fts.ts().alphabet().ids().collect()
}

#[test]
fn email_sizes() {
    let row = size_report(&email(), None).unwrap();
    assert_eq!(row.configurations, "3");
    assert_eq!(row.actions, 3);
    assert_eq!(row.fts, (3, 5));
    assert!(row.minimized.0 <= row.monitor.0);
    assert!(row.relaxed.0 <= row.minimized.0);
}

#[test]
fn email_full_observability_pins_every_configuration() {
    let fts = email();
    let monitor = config_monitor(&fts, &all(&fts)).unwrap();
    let r = simulate_specificity(&fts, &monitor, &cfg(2_000, 50)).unwrap();
    assert!((r.mean - 200.0 / 3.0).abs() < 1e-9, "{r:?}");
    assert!(r.stderr < 1e-9);
    assert_eq!(r.dead_ends, 0);
}

#[test]
fn nothing_observed_rules_nothing_out() {
    let fts = email();
    let monitor = config_monitor(&fts, &[]).unwrap();
    assert_eq!(monitor.actions.len(), 0);
    let r = simulate_specificity(&fts, &monitor, &cfg(500, 20)).unwrap();
    assert_eq!(r.mean, 0.0);
}

#[test]
fn single_configuration_rules_nothing_out() {
    let text = "features a\nvalidity a\nstate p initial\nstate q\naction x\naction y\n\
                transition p x q\ntransition q y p guard a\n";
    let model = Model::parse(text, Backend::Auto).unwrap();
    let fts = model.fts().unwrap();
    let monitor = config_monitor(fts, &all(fts)).unwrap();
    let r = simulate_specificity(fts, &monitor, &cfg(300, 30)).unwrap();
    assert_eq!((r.mean, r.stderr), (0.0, 0.0));
}

#[test]
fn dead_ends_stop_or_resample() {
    // Configuration b dead-ends after one step; a loops forever.
    let text = "features a b\nvalidity (a | b) & !(a & b)\nstate p initial\nstate q\naction x\naction y\n\
                transition p x q\ntransition q y q guard a\n";
    let model = Model::parse(text, Backend::Auto).unwrap();
    let fts = model.fts().unwrap();
    let monitor = config_monitor(fts, &all(fts)).unwrap();
    let stop = simulate_specificity(fts, &monitor, &cfg(1_000, 5)).unwrap();
    assert!(stop.dead_ends > 300 && stop.dead_ends < 700, "{stop:?}");
    // Stopped b-runs keep {a,b}; a-runs have seen y and rule out b.
    assert!((stop.mean - 50.0 * (1_000 - stop.dead_ends) as f64 / 1_000.0).abs() < 1e-9);
    let resample = SimulationConfig {
        dead_end: DeadEnd::Resample,
        ..cfg(1_000, 5)
    };
    let r = simulate_specificity(fts, &monitor, &resample).unwrap();
    assert_eq!(r.mean, 50.0);
}

#[test]
fn results_are_reproducible_across_workers() {
    let fts = email();
    let monitor = config_monitor(&fts, &fts.ts().alphabet().word(&["sign"]).unwrap()).unwrap();
    let base = cfg(3_000, 7);
    let one = simulate_specificity(&fts, &monitor, &SimulationConfig { workers: Some(1), ..base.clone() }).unwrap();
    let eight = simulate_specificity(&fts, &monitor, &SimulationConfig { workers: Some(8), ..base.clone() }).unwrap();
    assert_eq!(one, eight);
    assert_eq!(one, simulate_specificity(&fts, &monitor, &base).unwrap());
    let other = simulate_specificity(&fts, &monitor, &SimulationConfig { seed: 8, ..base }).unwrap();
    assert_ne!(one.mean, other.mean);
}

#[test]
fn mismatched_monitors_are_rejected() {
    let fts = email();
    let coffee = parse(fixtures::COFFEE);
    let ModelBody::Faults(a) = &coffee.body else { unreachable!() };
    let d = minimize(&determinize(&track(a)).unwrap());
    let diag = MonitorArtifact::new(&d, Mode::Strict, Provenance::new(b"", vec![]));
    assert_eq!(Simulator::new(&fts, &diag).unwrap_err(), EvalError::NotConfigMonitor);
    let lookahead = parse(fixtures::LOOKAHEAD);
    let other = config_monitor(lookahead.fts().unwrap(), &all(lookahead.fts().unwrap())).unwrap();
    assert!(matches!(Simulator::new(&fts, &other), Err(EvalError::AlphabetMismatch(_))));
}

#[test]
fn sweep_over_subsets() {
    let fts = email();
    let full = sweep_observability(&fts, 3, &cfg(200, 20), None).unwrap();
    assert_eq!(full.subsets, 1);
    assert_eq!(full.max(), full.min());
    let ones = sweep_observability(&fts, 1, &cfg(400, 20), None).unwrap();
    assert_eq!(ones.subsets, 3);
    assert!(!ones.truncated);
    let names: Vec<_> = ones.results.iter().map(|r| r.observable.join(" ")).collect();
    assert_eq!(names, ["sign", "enc", "send"]);
    assert!(ones.max().unwrap().report.mean >= ones.min().unwrap().report.mean);
    let csv = ones.to_csv();
    assert!(csv.starts_with("observable,monitor_states,runs,steps,mean,stderr,dead_ends\n"));
    assert_eq!(csv.lines().count(), 4);
    let partial = sweep_observability(&fts, 2, &cfg(100, 10), Some(2)).unwrap();
    assert!(partial.truncated);
    assert_eq!(partial.results.len(), 2);
    assert!(matches!(
        sweep_observability(&fts, 4, &cfg(1, 1), None),
        Err(EvalError::TooManyActions { .. })
    ));
    assert_eq!(binomial(5, 2), 10);
    assert_eq!(binomial(4, 0), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Monotonic monitors never lose specificity along a run.
    #[test]
    fn monotonic_trajectories_never_decrease(fts in arb_fts(), mask in 0u8..16, seed: u64) {
        let obs: Vec<ActionId> = fts.ts().alphabet().ids().filter(|a| mask >> a.index() & 1 == 1).collect();
        let Ok(monitor) = config_monitor(&fts, &obs) else { return Ok(()) };
        let sim = Simulator::new(&fts, &monitor).unwrap();
        for run in 0..8 {
            let t = sim.trajectory(seed, run, 12).unwrap();
            prop_assert!(!t.is_empty());
            if monitor.monotonic {
                prop_assert!(t.windows(2).all(|w| w[0] <= w[1]), "{t:?}");
            }
        }
    }
}
