//! The `vtsynth` binary end to end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use vtsynth::fixtures;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("vtsynth-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_str().unwrap().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn vtsynth(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vtsynth"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn synth_then_run_with_counts() {
    let s = Scratch::new("count");
    let model = s.file("email.model", fixtures::EMAIL);
    let art = s.path("email.json");
    let report = stdout(&vtsynth(&["synth", &model, "-p", "config-monitor", "-o", &art], ""));
    assert!(report.contains("determinize"));
    assert!(report.contains("provenance"));
    let out = stdout(&vtsynth(&["run", &art, "--count"], "sign\nenc\n"));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("sign\t[{s},{s,e}]\t33.3% ruled out"), "{out}");
    assert!(lines[2].starts_with("enc\t[{s,e}]\t66.7% ruled out"), "{out}");
}

#[test]
fn structured_run_output_is_json_lines() {
    let s = Scratch::new("json");
    let model = s.file("email.model", fixtures::EMAIL);
    let art = s.path("email.json");
    stdout(&vtsynth(&["synth", &model, "-o", &art], ""));
    let trace = s.file("trace.txt", "# observed\nsign\n\nsend\n");
    let out = stdout(&vtsynth(&["--format", "structured", "run", &art, &trace, "--count"], ""));
    let last: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(last["line"], 4);
    assert_eq!(last["verdict"], "[{s}]");
    assert_eq!(last["in_set"], "1");
}

#[test]
fn diagnoser_queries() {
    let s = Scratch::new("query");
    let model = s.file("coffee.model", fixtures::COFFEE);
    let art = s.path("coffee.json");
    stdout(&vtsynth(&["synth", &model, "-p", "diagnoser", "-o", &art], ""));
    let out = stdout(&vtsynth(&["run", &art, "--query", "necessary: F_p"], "request\nrequest\n"));
    let flags: Vec<&str> = out.lines().map(|l| l.rsplit('\t').next().unwrap()).collect();
    assert_eq!(flags, ["false", "false", "true"]);
    let events = s.file("events.model", fixtures::COFFEE_EVENTS);
    let art2 = s.path("events.json");
    stdout(&vtsynth(&["synth", &events, "-p", "diagnoser", "-o", &art2], ""));
    let out = stdout(&vtsynth(&["run", &art2, "--query", "possible: short"], "request\nburn\n"));
    assert!(out.lines().last().unwrap().ends_with("true"), "{out}");
    // Counts and queries need matching domains.
    assert_eq!(code(&vtsynth(&["run", &art, "--count"], "")), 5);
    let cfg = s.path("email.json");
    let email = s.file("email.model", fixtures::EMAIL);
    stdout(&vtsynth(&["synth", &email, "-o", &cfg], ""));
    assert_eq!(code(&vtsynth(&["run", &cfg, "--query", "possible: s"], "")), 5);
    assert_eq!(code(&vtsynth(&["run", &art, "--query", "sometimes F_p"], "")), 3);
}

#[test]
fn strict_and_relaxed_runs() {
    let s = Scratch::new("modes");
    let model = s.file("email.model", fixtures::EMAIL);
    let art = s.path("email.json");
    stdout(&vtsynth(&["synth", &model, "-o", &art], ""));
    let out = stdout(&vtsynth(&["run", &art], "send\nsign\n"));
    assert!(out.lines().nth(1).unwrap().ends_with("(out of language)"));
    let unknown = vtsynth(&["run", &art], "sign\nteleport\n");
    assert_eq!(code(&unknown), 3);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("line 2"));
    let out = stdout(&vtsynth(&["--relaxed", "run", &art], "send\nteleport\nsign\n"));
    assert!(out.lines().last().unwrap().ends_with("[{s},{s,e}]"), "{out}");
}

#[test]
fn synth_to_stdout_and_specialize() {
    let s = Scratch::new("spec");
    let monitor = s.file("rd.model", fixtures::REQUEST_DISPENSE);
    s.file("coffee.model", fixtures::COFFEE);
    let out = vtsynth(&["synth", &monitor, "-p", "as-vts,specialize(coffee.model),project(request,dispense,burn),det,min"], "");
    let text = stdout(&out);
    let art: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(art["format"], "vtsynth-monitor");
    let stages = art["provenance"]["stages"].as_array().unwrap();
    assert!(stages[1].as_str().unwrap().starts_with("specialize(coffee.model)@"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("specialize"));
    // A missing system model is an I/O failure.
    let missing = vtsynth(&["synth", &monitor, "-p", "as-vts,specialize(nope.model),det"], "");
    assert_eq!(code(&missing), 1);
}

#[test]
fn provenance_tracks_model_and_pipeline() {
    let s = Scratch::new("prov");
    let a = s.file("a.model", fixtures::EMAIL);
    let b = s.file("b.model", &format!("{}# trailing comment\n", fixtures::EMAIL));
    let hash = |args: &[&str]| {
        let v: serde_json::Value = serde_json::from_str(&stdout(&vtsynth(args, ""))).unwrap();
        v["provenance"]["hash"].as_str().unwrap().to_string()
    };
    let base = hash(&["synth", &a]);
    assert_eq!(base, hash(&["synth", &a]));
    assert_ne!(base, hash(&["synth", &b]));
    assert_ne!(base, hash(&["synth", &a, "-p", "track,project,det"]));
    assert_ne!(base, hash(&["synth", &a, "-p", "track,delay(1),project,det,min"]));
}

#[test]
fn exit_codes() {
    let s = Scratch::new("exit");
    let model = s.file("email.model", fixtures::EMAIL);
    let broken = s.file("broken.model", "state a initial\ntransition a x b\n");
    let plain = s.file("plain.model", "state a initial\naction x\ntransition a x a\n");
    let junk = s.file("junk.json", "{\"format\": 1}");
    assert_eq!(code(&vtsynth(&["synth", "/no/such/file"], "")), 1);
    assert_eq!(code(&vtsynth(&["synth", &broken], "")), 3);
    assert_eq!(code(&vtsynth(&["synth", &model, "-p", "track,frob"], "")), 3);
    assert_eq!(code(&vtsynth(&["synth", &model, "-p", "track,min,det"], "")), 4);
    assert_eq!(code(&vtsynth(&["synth", &plain], "")), 4);
    assert_eq!(code(&vtsynth(&["run", &junk], "")), 3);
    assert_eq!(code(&vtsynth(&["eval", "sizes", &plain], "")), 5);
    assert_eq!(code(&vtsynth(&["eval", "sweep", &model, "--k", "9"], "")), 4);
    assert_eq!(code(&vtsynth(&["frobnicate"], "")), 2);
    assert_eq!(code(&vtsynth(&["--strict", "--relaxed", "inspect", &junk], "")), 2);
}

#[test]
fn eval_commands() {
    let s = Scratch::new("eval");
    let model = s.file("email.model", fixtures::EMAIL);
    let sizes = stdout(&vtsynth(&["eval", "sizes", &model], ""));
    let row: Vec<&str> = sizes.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(&row[..4], ["email", "3", "3", "3/5"]);
    let spec = stdout(&vtsynth(
        &["--format", "structured", "eval", "specificity", &model, "--k", "all", "--runs", "500", "--steps", "40"],
        "",
    ));
    let v: serde_json::Value = serde_json::from_str(&spec).unwrap();
    assert!((v["report"]["mean"].as_f64().unwrap() - 200.0 / 3.0).abs() < 1e-6);
    let toy = s.file(
        "toy.model",
        "features a\nvalidity a\nstate p initial\naction x\ntransition p x p guard a\n",
    );
    let out = stdout(&vtsynth(&["eval", "specificity", &toy, "--k", "all", "--runs", "100"], ""));
    assert!(out.contains("ruled out 0.00%"), "{out}");
    let csv = s.path("sweep.csv");
    let out = stdout(&vtsynth(&["eval", "sweep", &model, "--k", "1", "--runs", "300", "--csv", &csv], ""));
    assert!(out.starts_with("k = 1: 3 of 3 subsets evaluated\n"), "{out}");
    assert!(out.contains("min 0.00%"), "{out}");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
    let partial = stdout(&vtsynth(&["eval", "sweep", &model, "--k", "1", "--runs", "10", "--budget", "2"], ""));
    assert!(partial.contains("partial report"));
}

#[test]
fn inspect_reports_and_exports() {
    let s = Scratch::new("inspect");
    let model = s.file("coffee.model", fixtures::COFFEE);
    let art = s.path("coffee.json");
    stdout(&vtsynth(&["synth", &model, "-p", "diagnoser", "-o", &art], ""));
    let stats = stdout(&vtsynth(&["inspect", &art], ""));
    assert!(stats.contains("states      4"), "{stats}");
    assert!(stats.contains("stages      track,lift,project,determinize,minimize"));
    let dot = stdout(&vtsynth(&["inspect", &art, "--dot"], ""));
    assert!(dot.starts_with("digraph"));
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&vtsynth(&["--format", "structured", "inspect", &art], ""))).unwrap();
    assert_eq!(v["transitions"], 6);
    assert!(Path::new(&art).exists());
}
