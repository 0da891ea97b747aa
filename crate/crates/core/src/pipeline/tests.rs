use super::*;
use crate::fixtures;
use crate::model::ModelBody;
use crate::semilattice::{Backend, VerdictDomain};
use crate::synth::{lift, project, track};
use crate::testutil::parse;

fn synth(fixture: &str, spec: &str) -> SynthOutput {
    let model = parse(fixture);
    run_pipeline(&model, fixture.as_bytes(), &PipelineSpec::parse(spec).unwrap(), &no_resolver).unwrap()
}

#[test]
fn parses_stage_lists_and_presets() {
    let spec = PipelineSpec::parse("track, project(request,burn), delay(2), loss(inf), det, min").unwrap();
    assert_eq!(
        spec.stages(),
        &[
            Stage::Track,
            Stage::Project(Some(vec!["request".into(), "burn".into()])),
            Stage::Delay(Bound::Finite(2)),
            Stage::Loss(Bound::Unbounded),
            Stage::Determinize,
            Stage::Minimize,
        ]
    );
    assert_eq!(spec.to_string(), "track,project(request,burn),delay(2),loss(inf),determinize,minimize");
    assert_eq!(PipelineSpec::parse(&spec.to_string()).unwrap(), spec);
    let diag = PipelineSpec::parse("diagnoser").unwrap();
    assert_eq!(diag.to_string(), "track,lift,project,determinize,minimize");
    assert_eq!(diag.mode(), Mode::Strict);
    assert_eq!(PipelineSpec::parse("track,det,minimize-relaxed").unwrap().mode(), Mode::Relaxed);
}

#[test]
fn rejects_bad_pipelines() {
    for (text, syntax) in [
        ("track,frobnicate,det", true),
        ("track,delay,det", true),
        ("track,delay(x),det", true),
        ("track,lift(3),det", true),
        ("track,det(", true),
        ("track,,det", true),
        ("det,min", false),
        ("track,min,det", false),
        ("track,lift,lift,det", false),
        ("track,det,lookahead", false),
        ("track,project", false),
        ("track,as-vts,det", false),
    ] {
        let err = PipelineSpec::parse(text).unwrap_err();
        assert_eq!(matches!(err, PipelineError::Syntax(_)), syntax, "{text}: {err}");
        if !syntax {
            assert!(matches!(err, PipelineError::Precondition(_)), "{text}: {err}");
        }
    }
}

#[test]
fn diagnoser_preset_matches_manual_composition() {
    let out = synth(fixtures::COFFEE, "diagnoser");
    let model = parse(fixtures::COFFEE);
    let ModelBody::Faults(a) = &model.body else { unreachable!() };
    let manual = minimize(&determinize(&project(&lift(&track(a)), &model.observable_or_all())).unwrap());
    let typed = out.artifact.to_deterministic(manual.domain().clone()).unwrap();
    assert!(typed.is_isomorphic(&manual));
    assert_eq!(out.artifact.num_states(), 4);
    let stages: Vec<_> = out.report.iter().map(|r| r.stage.as_str()).collect();
    assert_eq!(stages, ["track", "lift", "project", "determinize", "minimize"]);
    assert_eq!(out.report.last().unwrap().states, 4);
    assert_eq!(out.artifact.provenance.stages, stages);
}

#[test]
fn config_monitor_preset() {
    let out = synth(fixtures::EMAIL, "config-monitor");
    assert_eq!(out.artifact.mode, Mode::Strict);
    assert_eq!(out.artifact.states[out.artifact.initial as usize].count.as_deref(), Some("3"));
    // Relaxed stages make a relaxed monitor.
    let relaxed = synth(fixtures::EMAIL, "track,det,minimize-relaxed,strip-self-loops");
    assert_eq!(relaxed.artifact.mode, Mode::Relaxed);
}

#[test]
fn partial_observation_by_name() {
    let out = synth(fixtures::EMAIL, "track,project(send),det,min");
    assert_eq!(out.artifact.actions, ["send"]);
    let model = parse(fixtures::EMAIL);
    let err = run_pipeline(
        &model,
        b"",
        &PipelineSpec::parse("track,project(nope),det").unwrap(),
        &no_resolver,
    )
    .unwrap_err();
    assert!(matches!(err, PipelineError::Precondition(_)));
}

#[test]
fn plain_models_cannot_be_tracked() {
    let model = Model::parse("state a initial\naction x\ntransition a x a\n", Backend::Auto).unwrap();
    let err = run_pipeline(&model, b"", &PipelineSpec::parse("track,det").unwrap(), &no_resolver).unwrap_err();
    assert!(matches!(err, PipelineError::Precondition(_)));
}

#[test]
fn specialize_uses_the_resolver_and_records_its_digest() {
    let monitor = parse(fixtures::REQUEST_DISPENSE);
    let system = parse(fixtures::COFFEE);
    let resolve = |path: &str| -> Result<(TransitionSystem, String), PipelineError> {
        assert_eq!(path, "coffee.model");
        Ok((system.ts().clone(), "abc123".into()))
    };
    let spec = PipelineSpec::parse("as-vts,specialize(coffee.model),project(request,dispense,burn),det,min").unwrap();
    let out = run_pipeline(&monitor, b"m", &spec, &resolve).unwrap();
    assert_eq!(out.artifact.provenance.stages[1], "specialize(coffee.model)@abc123");
    // Without a resolver the stage fails cleanly.
    assert!(matches!(
        run_pipeline(&monitor, b"m", &spec, &no_resolver),
        Err(PipelineError::Resolve(_))
    ));
    // Specializing to a system lacking a monitored action is refused.
    let email = parse(fixtures::EMAIL);
    let resolve = |_: &str| Ok((email.ts().clone(), String::new()));
    assert!(matches!(
        run_pipeline(&monitor, b"m", &spec, &resolve),
        Err(PipelineError::Synth(_))
    ));
}

#[test]
fn provenance_depends_on_model_and_stages() {
    let a = synth(fixtures::COFFEE, "diagnoser").artifact.provenance;
    let b = synth(fixtures::COFFEE, "predictive-diagnoser").artifact.provenance;
    assert_eq!(a.model_sha256, b.model_sha256);
    assert_ne!(a.hash, b.hash);
    assert_eq!(a, synth(fixtures::COFFEE, "diagnoser").artifact.provenance);
}

#[test]
fn every_fixture_runs_through_a_pipeline() {
    for (name, text) in fixtures::ALL {
        let out = synth(text, "track,lookahead,project,delay(1),det,min");
        assert!(out.artifact.num_states() >= 1, "{name}");
        let d = crate::runtime::DynDomain::from_meta(&out.artifact.domain).unwrap();
        for s in &out.artifact.states {
            assert_eq!(d.canonical(&s.verdict).unwrap(), s.verdict, "{name}");
        }
    }
}

#[test]
fn lookahead_verdicts_refine_the_plain_monitor() {
    let plain = synth(fixtures::LOOKAHEAD, "track,det,min").artifact;
    let ahead = synth(fixtures::LOOKAHEAD, "track,lookahead,det,min").artifact;
    let model = parse(fixtures::LOOKAHEAD);
    let ModelBody::Config(a) = &model.body else { unreachable!() };
    let dom = a.domain();
    let p = plain.to_deterministic(dom.clone()).unwrap();
    let q = ahead.to_deterministic(dom.clone()).unwrap();
    for w in crate::testutil::words(p.alphabet().len(), 4) {
        if let (Some(x), Some(y)) = (p.yielded(&w), q.yielded(&w)) {
            assert!(dom.leq(y, x));
        }
    }
}
