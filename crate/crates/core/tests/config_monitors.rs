//! Configuration monitors: soundness, completeness and simulated
//! specificity against exact references.

use vtsynth::eval::{config_monitor, simulate_specificity, SimulationConfig};
use vtsynth::fixtures;
use vtsynth::model::{ActionId, Model};
use vtsynth::pipeline::{no_resolver, run_pipeline, PipelineSpec};
use vtsynth::semilattice::Backend;
use vtsynth_oracle::{check_config_monitor, expected_ruled_out, gen};

fn email() -> Model {
    Model::parse(fixtures::EMAIL, Backend::Auto).unwrap()
}

#[test]
fn email_preset_is_sound_and_complete() {
    let model = email();
    let out = run_pipeline(&model, fixtures::EMAIL.as_bytes(), &PipelineSpec::parse("config-monitor").unwrap(), &no_resolver)
        .unwrap();
    let fts = model.fts().unwrap();
    check_config_monitor(fts, &model.observable_or_all(), &out.artifact, 6).unwrap();
}

#[test]
fn random_monitors_are_sound_and_complete() {
    for i in 0..60 {
        let mut rng = gen::rng(11, i);
        let fts = gen::fts(&mut rng);
        let all: Vec<ActionId> = fts.ts().alphabet().ids().collect();
        let partial = gen::observable(fts.ts().alphabet(), &mut rng);
        for obs in [all, partial] {
            let Ok(monitor) = config_monitor(&fts, &obs) else {
                assert!(fts.ts().initial().is_empty());
                continue;
            };
            check_config_monitor(&fts, &obs, &monitor, 5).unwrap_or_else(|e| panic!("case {i}: {e}"));
        }
    }
}

#[test]
fn simulation_matches_the_exact_expectation() {
    let model = email();
    let fts = model.fts().unwrap();
    for obs in [vec![], vec!["sign"], vec!["enc"], vec!["sign", "enc", "send"]] {
        let ids = fts.ts().alphabet().word(&obs).unwrap();
        let monitor = config_monitor(fts, &ids).unwrap();
        let cfg = SimulationConfig {
            runs: 20_000,
            steps: 6,
            seed: 3,
            ..SimulationConfig::default()
        };
        let sim = simulate_specificity(fts, &monitor, &cfg).unwrap();
        let exact = expected_ruled_out(fts, &monitor, 6);
        assert!(
            (sim.mean - exact).abs() <= 4.0 * sim.stderr + 1e-9,
            "{obs:?}: simulated {} ± {}, exact {exact}",
            sim.mean,
            sim.stderr
        );
    }
    // Every configuration is pinned after two observed steps.
    let all = config_monitor(fts, &model.observable_or_all()).unwrap();
    assert!((expected_ruled_out(fts, &all, 50) - 200.0 / 3.0).abs() < 1e-9);
}

#[test]
fn simulation_matches_on_random_systems() {
    for i in 0..20 {
        let mut rng = gen::rng(5, i);
        let fts = gen::fts(&mut rng);
        let obs = gen::observable(fts.ts().alphabet(), &mut rng);
        let Ok(monitor) = config_monitor(&fts, &obs) else { continue };
        let cfg = SimulationConfig {
            runs: 4_000,
            steps: 8,
            seed: i,
            ..SimulationConfig::default()
        };
        let sim = simulate_specificity(&fts, &monitor, &cfg).unwrap();
        let exact = expected_ruled_out(&fts, &monitor, 8);
        assert!(
            (sim.mean - exact).abs() <= 5.0 * sim.stderr + 1e-6,
            "case {i}: simulated {} ± {}, exact {exact}",
            sim.mean,
            sim.stderr
        );
    }
}
