//! Acceptance suite: one line per criterion. Benchmark criteria read model
//! files from the directory named by `VTS_BENCHMARKS` and are skipped
//! without it.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use vtsynth::compile::{Mode, MonitorArtifact};
use vtsynth::eval::{self, SimulationConfig};
use vtsynth::fixtures;
use vtsynth::model::{Model, ModelBody, StateId};
use vtsynth::pipeline::{no_resolver, run_pipeline, PipelineSpec};
use vtsynth::runtime::{replay, DynDomain};
use vtsynth::semilattice::Backend;
use vtsynth_oracle::{check_config_monitor, gen, isomorphic_to, suite::theorem_suite};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Check = Result<String, String>;

fn model(text: &str) -> Model {
    Model::parse(text, Backend::Auto).unwrap()
}

fn synth(text: &str, spec: &str) -> Result<MonitorArtifact, String> {
    let m = model(text);
    let spec = PipelineSpec::parse(spec).map_err(|e| e.to_string())?;
    run_pipeline(&m, text.as_bytes(), &spec, &no_resolver)
        .map(|o| o.artifact)
        .map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    }
}

/// Compares canonical verdicts through the artifact's own domain.
fn same_verdict(art: &MonitorArtifact, got: Option<&str>, want: &str) -> Result<(), String> {
    let d = DynDomain::from_meta(&art.domain).map_err(|e| e.to_string())?;
    let want = d.canonical(want).map_err(|e| e.to_string())?;
    match got {
        Some(g) if g == want => Ok(()),
        other => Err(format!("got {other:?}, expected {want}")),
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let art = synth(fixtures::EMAIL, "config-monitor")?;
    for (trace, want) in [
        ("", "[{s,e},{s},{e}]"),
        ("sign", "[{s,e},{s}]"),
        ("sign\nenc", "[{s,e}]"),
        ("sign\nsend", "[{s}]"),
    ] {
        let t = replay(&art, trace, Mode::Strict).map_err(|e| e.to_string())?;
        same_verdict(&art, t.final_verdict(), want).map_err(|e| format!("{trace:?}: {e}"))?;
    }
    within(start, Duration::from_secs(1), "email")?;
    Ok("ε, sign, sign enc, sign send yield the expected configuration sets".into())
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let art = synth(fixtures::COFFEE, "diagnoser")?;
    let d = DynDomain::from_meta(&art.domain).map_err(|e| e.to_string())?;
    let c = |v: &str| d.canonical(v).unwrap();
    let (none, all, pump, short) = (c("{{}}"), c("{{}, {F_p}, {F_s}}"), c("{{F_p}}"), c("{{F_s}}"));
    let expected: [(&str, &[(&str, usize)]); 4] = [
        (&none, &[("request", 1)]),
        (&all, &[("dispense", 0), ("request", 2), ("burn", 3)]),
        (&pump, &[("request", 2)]),
        (&short, &[("burn", 3)]),
    ];
    isomorphic_to(&art, 0, &expected)?;
    within(start, Duration::from_secs(1), "coffee diagnoser")?;
    Ok("4 states, 6 transitions, isomorphic to the reference diagnoser".into())
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let art = synth(fixtures::LOOKAHEAD, "as-vts,lookahead,det")?;
    let before = synth(fixtures::LOOKAHEAD, "as-vts,det")?;
    let initial = |a: &MonitorArtifact| a.states[a.initial as usize].verdict.clone();
    same_verdict(&before, Some(&initial(&before)), "[{l1},{l2},{l3}]")?;
    same_verdict(&art, Some(&initial(&art)), "[{l1},{l2}]")?;
    within(start, Duration::from_secs(1), "lookahead")?;
    Ok(format!("initial verdict {} refined to {}", initial(&before), initial(&art)))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let cases = 500;
    let report = theorem_suite(cases, 0xacce97);
    if !report.passed() {
        return Err(format!("{} counterexamples, first: {}", report.failures.len(), report.failures[0]));
    }
    within(start, Duration::from_secs(600), "theorem suite")?;
    let counts: Vec<String> = report.checks.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!("{cases} random cases, zero counterexamples ({}) in {:.1?}", counts.join(", "), start.elapsed()))
}

fn criterion_5() -> Check {
    let spec = PipelineSpec::parse("config-monitor").unwrap();
    let email = model(fixtures::EMAIL);
    let art = run_pipeline(&email, b"", &spec, &no_resolver).map_err(|e| e.to_string())?.artifact;
    check_config_monitor(email.fts().unwrap(), &email.observable_or_all(), &art, 6).map_err(|e| format!("email: {e}"))?;
    let mut checked = 0;
    for i in 0..100 {
        let fts = gen::fts(&mut gen::rng(0x50de, i));
        let n = fts.ts().num_states();
        let all = fts.ts().alphabet().ids().collect::<Vec<_>>();
        let m = Model {
            state_names: (0..n).map(|s| StateId(s as u32).to_string()).collect(),
            observable: None,
            faults: Vec::new(),
            body: ModelBody::Config(fts.clone()),
        };
        let art = match run_pipeline(&m, b"", &spec, &no_resolver) {
            Ok(out) => out.artifact,
            // Only systems without initial states have no monitor.
            Err(_) if fts.ts().initial().is_empty() => continue,
            Err(e) => return Err(format!("case {i}: {e}")),
        };
        check_config_monitor(&fts, &all, &art, 6).map_err(|e| format!("case {i}: {e}"))?;
        checked += 1;
    }
    Ok(format!("email and {checked} random featured systems, words ≤ 6"))
}

fn benchmarks() -> Option<PathBuf> {
    std::env::var_os("VTS_BENCHMARKS").map(PathBuf::from).filter(|p| p.is_dir())
}

fn load_benchmark(dir: &Path, name: &str) -> Option<Model> {
    let text = std::fs::read_to_string(dir.join(format!("{name}.model"))).ok()?;
    Some(Model::parse(&text, Backend::Auto).unwrap_or_else(|e| panic!("{name}: {e}")))
}

fn criterion_6(dir: &Path) -> Check {
    let mut notes = Vec::new();
    for name in ["minepump", "svm", "aerouc5", "cpterminal"] {
        let Some(m) = load_benchmark(dir, name) else { continue };
        let fts = m.fts().ok_or(format!("{name} is not a featured model"))?;
        let row = eval::size_report(fts, None).map_err(|e| e.to_string())?;
        if row.elapsed > Duration::from_secs(5) {
            return Err(format!("{name}: synthesis took {:?}", row.elapsed));
        }
        if row.relaxed.0 > row.minimized.0 {
            return Err(format!("{name}: relaxed {:?} exceeds minimized {:?}", row.relaxed, row.minimized));
        }
        type Size = (usize, usize);
        let exact: &[(&str, Size, Size)] = match name {
            "minepump" => &[("fts", row.fts, (25, 41)), ("monitor", row.monitor, (560, 992)), ("minimized", row.minimized, (496, 928))],
            "svm" => &[("minimized", row.minimized, (87, 120))],
            _ => &[],
        };
        for (what, got, want) in exact {
            if got != want {
                return Err(format!("{name} {what}: {got:?}, expected {want:?}"));
            }
        }
        notes.push(format!(
            "{name} {}/{} → {}/{} → {}/{} (relaxed {}/{}, {:?})",
            row.fts.0, row.fts.1, row.monitor.0, row.monitor.1, row.minimized.0, row.minimized.1, row.relaxed.0,
            row.relaxed.1, row.elapsed
        ));
    }
    if notes.is_empty() {
        return Err("no benchmark files found".into());
    }
    Ok(notes.join("; "))
}

fn criterion_7(dir: &Path) -> Check {
    let mut notes = Vec::new();
    for (name, target) in [("minepump", 79.0), ("svm", 83.0)] {
        let Some(m) = load_benchmark(dir, name) else { continue };
        let fts = m.fts().ok_or(format!("{name} is not a featured model"))?;
        let start = Instant::now();
        let all: Vec<_> = fts.ts().alphabet().ids().collect();
        let monitor = eval::config_monitor(fts, &all).map_err(|e| e.to_string())?;
        let cfg = SimulationConfig {
            runs: 20_000,
            steps: 1_000,
            seed: 0,
            ..SimulationConfig::default()
        };
        let r = eval::simulate_specificity(fts, &monitor, &cfg).map_err(|e| e.to_string())?;
        within(start, Duration::from_secs(600), name)?;
        if (r.mean - target).abs() > 3.0 {
            return Err(format!("{name}: {:.2}% ± {:.2}, expected {target}% ± 3", r.mean, r.stderr));
        }
        notes.push(format!("{name} {:.2}% ± {:.2} in {:.1?}", r.mean, r.stderr, start.elapsed()));
    }
    if notes.is_empty() {
        return Err("no benchmark files found".into());
    }
    Ok(notes.join("; "))
}

fn cli(args: &[&str], stdin: Option<&str>) -> Output {
    use std::io::Write;
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vtsynth"));
    cmd.args(args);
    cmd.stdin(std::process::Stdio::piped());
    cmd.stdout(std::process::Stdio::piped());
    cmd.stderr(std::process::Stdio::piped());
    let mut child = cmd.spawn().expect("binary runs");
    let input = stdin.unwrap_or("").to_string();
    let mut pipe = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || {
        let _ = pipe.write_all(input.as_bytes());
    });
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    out
}

fn criterion_8() -> Check {
    let dir = std::env::temp_dir().join(format!("vtsynth-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let email = dir.join("email.model");
    let coffee = dir.join("coffee.model");
    std::fs::write(&email, fixtures::EMAIL).unwrap();
    std::fs::write(&coffee, fixtures::COFFEE).unwrap();
    let (email, coffee) = (email.to_str().unwrap(), coffee.to_str().unwrap());
    let art = dir.join("email.json");
    let art = art.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["synth", email, "-p", "config-monitor"],
        vec!["synth", coffee, "-p", "predictive-diagnoser", "--format", "structured"],
        vec!["--seed", "9", "eval", "specificity", email, "--observe", "sign", "--runs", "3000", "--steps", "20"],
        vec!["--seed", "9", "eval", "sweep", email, "--k", "2", "--runs", "1000", "--format", "structured"],
        vec!["eval", "sizes", email],
    ];
    let mut compared = 0;
    for args in &commands {
        let a = cli(args, None);
        let b = cli(args, None);
        if !a.status.success() || a.stdout != b.stdout || a.stderr != b.stderr {
            return Err(format!("{args:?} differs between runs"));
        }
        compared += 1;
    }
    for args in &commands[2..4] {
        let mut one = args.clone();
        one.extend(["--workers", "1"]);
        let mut eight = args.clone();
        eight.extend(["--workers", "8"]);
        if cli(&one, None).stdout != cli(&eight, None).stdout {
            return Err(format!("{args:?} depends on the worker count"));
        }
        compared += 1;
    }
    let out = cli(&["synth", email, "-o", art], None);
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let runs: Vec<_> = (0..2).map(|_| cli(&["run", art, "--count"], Some("sign\nenc\n")).stdout).collect();
    if runs[0] != runs[1] {
        return Err("run output differs".into());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} command comparisons byte-identical (including workers 1 vs 8)", compared + 1))
}

fn main() {
    let bench = benchmarks();
    let skipped = |n: u32| {
        Outcome::Skipped(format!(
            "criterion {n} needs the external benchmark models; set VTS_BENCHMARKS to a directory of <name>.model files"
        ))
    };
    let run = |f: fn() -> Check| match f() {
        Ok(s) => Outcome::Pass(s),
        Err(e) => Outcome::Fail(e),
    };
    let results = vec![
        (1, "email configuration monitor", run(criterion_1)),
        (2, "coffee diagnoser", run(criterion_2)),
        (3, "lookahead refinement", run(criterion_3)),
        (4, "construction theorems against brute force", run(criterion_4)),
        (5, "configuration monitor soundness and completeness", run(criterion_5)),
        (6, "benchmark sizes", match &bench {
            Some(dir) => match criterion_6(dir) {
                Ok(s) => Outcome::Pass(s),
                Err(e) => Outcome::Fail(e),
            },
            None => skipped(6),
        }),
        (7, "benchmark specificity", match &bench {
            Some(dir) => match criterion_7(dir) {
                Ok(s) => Outcome::Pass(s),
                Err(e) => Outcome::Fail(e),
            },
            None => skipped(7),
        }),
        (8, "determinism", run(criterion_8)),
    ];
    let mut failed = false;
    for (n, name, outcome) in results {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed = true;
                ("FAIL", d)
            }
            Outcome::Skipped(d) => ("SKIPPED", d),
        };
        println!("criterion {n} [{tag}] {name}: {detail}");
    }
    if failed {
        std::process::exit(1);
    }
}
