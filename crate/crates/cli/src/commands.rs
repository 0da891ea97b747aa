use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde_json::json;
use vtsynth::compile::{ArtifactError, Mode, MonitorArtifact, Provenance};
use vtsynth::eval::{self, DeadEnd, EvalError, SimulationConfig};
use vtsynth::model::{ActionId, AnnotatedTs, Model, TransitionSystem};
use vtsynth::pipeline::{run_pipeline, PipelineError, PipelineSpec};
use vtsynth::runtime::{DynDomain, MonitorSession, RuntimeError};
use vtsynth::semilattice::{Backend, ConfigDomain};
use vtsynth::synth::ModalQuery;

use crate::{BackendArg, Cli, Command, EvalMode, Format, Observation, Simulation};

pub mod exit {
    pub const IO: u8 = 1;
    pub const PARSE: u8 = 3;
    pub const PRECONDITION: u8 = 4;
    pub const DOMAIN: u8 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl ToString) -> CliError {
    CliError {
        code,
        message: message.to_string(),
    }
}

type Result<T> = std::result::Result<T, CliError>;

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Syntax(_) => exit::PARSE,
            PipelineError::Resolve(_) => exit::IO,
            _ => exit::PRECONDITION,
        };
        fail(code, e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::AlphabetMismatch(_) | EvalError::NotConfigMonitor | EvalError::OutOfLanguage { .. } => {
                exit::DOMAIN
            }
            _ => exit::PRECONDITION,
        };
        fail(code, e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        fail(exit::IO, e)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| fail(exit::IO, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| fail(exit::IO, format!("{}: {e}", path.display())))
}

fn backend(b: BackendArg) -> Backend {
    match b {
        BackendArg::Auto => Backend::Auto,
        BackendArg::Explicit => Backend::Explicit,
        BackendArg::Symbolic => Backend::Symbolic,
    }
}

fn load_model(path: &Path, b: BackendArg) -> Result<(Model, String)> {
    let text = read(path)?;
    let model = Model::parse(&text, backend(b)).map_err(|e| fail(exit::PARSE, format!("{}: {e}", path.display())))?;
    Ok((model, text))
}

fn load_artifact(path: &Path) -> Result<MonitorArtifact> {
    let text = read(path)?;
    MonitorArtifact::from_json(&text).map_err(|e| {
        let code = match e {
            ArtifactError::Domain(_) => exit::DOMAIN,
            _ => exit::PARSE,
        };
        fail(code, format!("{}: {e}", path.display()))
    })
}

fn fts(model: &Model) -> Result<&AnnotatedTs<ConfigDomain>> {
    model
        .fts()
        .ok_or_else(|| fail(exit::DOMAIN, "evaluation needs a featured model (declare features)"))
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    print(&format!("{}\n", serde_json::to_string_pretty(value).expect("serializable")))
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let mode = match (cli.strict, cli.relaxed) {
        (true, _) => Some(Mode::Strict),
        (_, true) => Some(Mode::Relaxed),
        _ => None,
    };
    match &cli.command {
        Command::Synth {
            model,
            pipeline,
            output,
            backend,
        } => synth(cli.format, model, pipeline, output.as_deref(), *backend),
        Command::Run {
            artifact,
            trace,
            count,
            query,
        } => run(cli.format, mode, artifact, trace.as_deref(), *count, query.as_deref()),
        Command::Eval { mode } => match mode {
            EvalMode::Sizes {
                model,
                obs,
                backend,
                timing,
            } => sizes(cli.format, model, obs, *backend, *timing),
            EvalMode::Specificity { model, obs, sim } => specificity(cli.format, cli.seed, model, obs, sim),
            EvalMode::Sweep {
                model,
                k,
                budget,
                csv,
                sim,
            } => sweep(cli.format, cli.seed, model, *k, *budget, csv.as_deref(), sim),
        },
        Command::Inspect { artifact, dot } => inspect(cli.format, artifact, *dot),
    }
}

fn synth(format: Format, path: &Path, pipeline: &str, output: Option<&Path>, b: BackendArg) -> Result<()> {
    let (model, text) = load_model(path, b)?;
    let spec = PipelineSpec::parse(pipeline)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> std::result::Result<(TransitionSystem, String), PipelineError> {
        let full = base.join(p);
        let text = fs::read_to_string(&full).map_err(|e| PipelineError::Resolve(format!("{}: {e}", full.display())))?;
        let system = Model::parse(&text, backend(b))
            .map_err(|e| PipelineError::Syntax(format!("{}: {e}", full.display())))?;
        let digest = Provenance::new(text.as_bytes(), Vec::new()).model_sha256;
        Ok((system.ts().clone(), digest[..16].to_string()))
    };
    let out = run_pipeline(&model, text.as_bytes(), &spec, &resolve)?;
    let json = out.artifact.to_json();
    match output {
        Some(p) => write_file(p, &json)?,
        None => print(&json)?,
    }
    // The report goes to stderr when stdout carries the artifact.
    let mut report = String::new();
    match format {
        Format::Structured => {
            let stages: Vec<_> = out
                .report
                .iter()
                .map(|r| json!({"stage": r.stage, "states": r.states, "transitions": r.transitions}))
                .collect();
            let value = json!({
                "stages": stages,
                "states": out.artifact.num_states(),
                "transitions": out.artifact.num_transitions(),
                "mode": out.artifact.mode,
                "monotonic": out.artifact.monotonic,
                "provenance": out.artifact.provenance,
            });
            report = format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"));
        }
        Format::Text => {
            let width = out.report.iter().map(|r| r.stage.len()).max().unwrap_or(5).max(5);
            let _ = writeln!(report, "{:<width$}  {:>8}  {:>11}  {:>8}", "stage", "states", "transitions", "delta");
            let mut prev: Option<usize> = None;
            for r in &out.report {
                let delta = prev.map_or(String::from("-"), |p| format!("{:+}", r.states as i64 - p as i64));
                let _ = writeln!(report, "{:<width$}  {:>8}  {:>11}  {:>8}", r.stage, r.states, r.transitions, delta);
                prev = Some(r.states);
            }
            let _ = writeln!(report, "provenance {}", out.artifact.provenance.hash);
        }
    }
    if output.is_some() {
        print(&report)
    } else {
        eprint!("{report}");
        Ok(())
    }
}

/// Emits one line per observation.
struct RunPrinter<'a> {
    format: Format,
    count: bool,
    query: Option<(DynDomain, ModalQuery)>,
    session: MonitorSession<'a>,
}

impl RunPrinter<'_> {
    fn emit(&self, line: Option<usize>, action: Option<&str>) -> Result<()> {
        let s = &self.session;
        let verdict = s.verdict();
        let count = if self.count {
            s.current_count().map_err(|e| fail(exit::DOMAIN, e))?
        } else {
            None
        };
        let query = match (&self.query, verdict) {
            (Some((d, q)), Some(v)) => Some(d.query(v, q).map_err(|e| fail(exit::DOMAIN, e))?),
            _ => None,
        };
        let text = match self.format {
            Format::Structured => {
                let mut obj = json!({
                    "line": line,
                    "action": action,
                    "state": s.state(),
                    "verdict": verdict,
                });
                if let Some(c) = count {
                    obj["in_set"] = json!(c.in_set.to_string());
                    obj["percent_ruled_out"] = json!(c.percent_ruled_out);
                }
                if self.query.is_some() {
                    obj["query"] = json!(query);
                }
                format!("{obj}\n")
            }
            Format::Text => {
                let mut t = format!("{}\t{}", action.unwrap_or("(start)"), verdict.unwrap_or("(out of language)"));
                if let Some(c) = count {
                    let _ = write!(t, "\t{:.1}% ruled out", c.percent_ruled_out);
                }
                if self.query.is_some() {
                    let _ = write!(t, "\t{}", query.map_or("-", |b| if b { "true" } else { "false" }));
                }
                t.push('\n');
                t
            }
        };
        print(&text)
    }
}

fn run(
    format: Format,
    mode: Option<Mode>,
    path: &Path,
    trace: Option<&Path>,
    count: bool,
    query: Option<&str>,
) -> Result<()> {
    let artifact = load_artifact(path)?;
    let query = match query {
        None => None,
        Some(q) => {
            let q: ModalQuery = q.parse().map_err(|e: String| fail(exit::PARSE, e))?;
            let d = DynDomain::from_meta(&artifact.domain).map_err(|e| fail(exit::DOMAIN, e))?;
            if !matches!(d, DynDomain::LiftedBoolExpr(_) | DynDomain::LiftedFaults(_)) {
                return Err(fail(exit::DOMAIN, "queries need a lifted event or fault-class diagnoser"));
            }
            Some((d, q))
        }
    };
    if count && !matches!(artifact.domain, vtsynth::semilattice::DomainMeta::Config { .. }) {
        return Err(fail(exit::DOMAIN, RuntimeError::NotConfigDomain));
    }
    let session = MonitorSession::with_mode(&artifact, mode.unwrap_or(artifact.mode));
    let mut printer = RunPrinter {
        format,
        count,
        query,
        session,
    };
    printer.emit(None, None)?;
    let input: Box<dyn BufRead> = match trace {
        Some(p) if p != Path::new("-") => Box::new(io::BufReader::new(
            fs::File::open(p).map_err(|e| fail(exit::IO, format!("{}: {e}", p.display())))?,
        )),
        _ => Box::new(io::stdin().lock()),
    };
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let steps = vtsynth::runtime::parse_trace(&line).map_err(|e| match e {
            RuntimeError::Trace { message, .. } => fail(exit::PARSE, format!("line {}: {message}", i + 1)),
            other => fail(exit::PARSE, other),
        })?;
        for (_, action) in steps {
            if let Err(e) = printer.session.step(&action) {
                return Err(fail(exit::PARSE, format!("line {}: {e}", i + 1)));
            }
            printer.emit(Some(i + 1), Some(&action))?;
        }
    }
    Ok(())
}

fn observed(model: &Model, obs: &Observation) -> Result<Vec<ActionId>> {
    let alphabet = model.alphabet();
    if let Some(names) = &obs.observe {
        return alphabet.word(names).map_err(|e| fail(exit::PRECONDITION, e));
    }
    match obs.k.as_deref() {
        None => Ok(model.observable_or_all()),
        Some("all") => Ok(alphabet.ids().collect()),
        Some(k) => {
            let k: usize = k.parse().map_err(|_| fail(exit::PARSE, format!("--k expects a number or `all`, got {k:?}")))?;
            if k > alphabet.len() {
                return Err(EvalError::TooManyActions {
                    k,
                    actions: alphabet.len(),
                }
                .into());
            }
            Ok(alphabet.ids().take(k).collect())
        }
    }
}

fn sizes(format: Format, path: &Path, obs: &Observation, b: BackendArg, timing: bool) -> Result<()> {
    let (model, _) = load_model(path, b)?;
    let observable = observed(&model, obs)?;
    let row = eval::size_report(fts(&model)?, Some(&observable))?;
    let name = path.file_stem().map_or(String::new(), |s| s.to_string_lossy().into_owned());
    match format {
        Format::Structured => {
            let mut value = json!({"model": name, "row": row});
            if timing {
                value["elapsed_ms"] = json!(row.elapsed.as_secs_f64() * 1e3);
            }
            print_json(&value)
        }
        Format::Text => {
            let pair = |(s, t): (usize, usize)| format!("{s}/{t}");
            let mut t = format!(
                "{:<16} {:>10} {:>5} {:>12} {:>12} {:>12} {:>12}\n",
                "model", "|Conf|", "|Act|", "FTS", "monitor", "minimized", "relaxed"
            );
            let _ = writeln!(
                t,
                "{:<16} {:>10} {:>5} {:>12} {:>12} {:>12} {:>12}",
                name,
                row.configurations,
                row.actions,
                pair(row.fts),
                pair(row.monitor),
                pair(row.minimized),
                pair(row.relaxed)
            );
            if timing {
                let _ = writeln!(t, "synthesis took {:.3} ms", row.elapsed.as_secs_f64() * 1e3);
            }
            print(&t)
        }
    }
}

fn sim_config(seed: u64, sim: &Simulation) -> SimulationConfig {
    let (runs, steps) = if sim.full_scale {
        (160_000, 1_000)
    } else {
        (sim.runs, sim.steps)
    };
    SimulationConfig {
        runs,
        steps,
        seed,
        dead_end: if sim.resample_dead_ends { DeadEnd::Resample } else { DeadEnd::Stop },
        workers: sim.workers,
    }
}

fn specificity(format: Format, seed: u64, path: &Path, obs: &Observation, sim: &Simulation) -> Result<()> {
    let (model, _) = load_model(path, sim.backend)?;
    let fts = fts(&model)?;
    let observable = observed(&model, obs)?;
    let cfg = sim_config(seed, sim);
    let monitor = eval::config_monitor(fts, &observable)?;
    let report = eval::simulate_specificity(fts, &monitor, &cfg)?;
    match format {
        Format::Structured => print_json(&json!({
            "observable": monitor.actions,
            "monitor_states": monitor.num_states(),
            "report": report,
        })),
        Format::Text => print(&format!(
            "observable {{{}}}\nruns {} x {} steps, seed {}\nruled out {:.2}% ± {:.2}\ndead ends {}\n",
            monitor.actions.join(","),
            report.runs,
            report.steps,
            report.seed,
            report.mean,
            report.stderr,
            report.dead_ends
        )),
    }
}

fn sweep(
    format: Format,
    seed: u64,
    path: &Path,
    k: usize,
    budget: Option<usize>,
    csv: Option<&Path>,
    sim: &Simulation,
) -> Result<()> {
    let (model, _) = load_model(path, sim.backend)?;
    let fts = fts(&model)?;
    let report = eval::sweep_observability(fts, k, &sim_config(seed, sim), budget)?;
    if let Some(p) = csv {
        write_file(p, &report.to_csv())?;
    }
    match format {
        Format::Structured => print_json(&json!({
            "report": report,
            "max": report.max(),
            "min": report.min(),
        })),
        Format::Text => {
            let mut t = format!("k = {k}: {} of {} subsets evaluated", report.results.len(), report.subsets);
            if report.truncated {
                t.push_str(" (budget exhausted; partial report)");
            }
            t.push('\n');
            for (label, r) in [("max", report.max()), ("min", report.min())] {
                if let Some(r) = r {
                    let _ = writeln!(
                        t,
                        "{label} {:.2}% ± {:.2}  {{{}}}",
                        r.report.mean,
                        r.report.stderr,
                        r.observable.join(",")
                    );
                }
            }
            print(&t)
        }
    }
}

fn inspect(format: Format, path: &Path, dot: bool) -> Result<()> {
    let artifact = load_artifact(path)?;
    if dot {
        return print(&artifact.to_dot());
    }
    let kind = serde_json::to_value(&artifact.domain).expect("serializable")["kind"].clone();
    match format {
        Format::Structured => print_json(&json!({
            "domain": artifact.domain,
            "actions": artifact.actions,
            "mode": artifact.mode,
            "monotonic": artifact.monotonic,
            "states": artifact.num_states(),
            "transitions": artifact.num_transitions(),
            "provenance": artifact.provenance,
        })),
        Format::Text => print(&format!(
            "domain      {}\nactions     {}\nmode        {}\nmonotonic   {}\nstates      {}\ntransitions {}\nstages      {}\nmodel       {}\nprovenance  {}\n",
            kind.as_str().unwrap_or("?"),
            artifact.actions.join(" "),
            artifact.mode,
            artifact.monotonic,
            artifact.num_states(),
            artifact.num_transitions(),
            artifact.provenance.stages.join(","),
            artifact.provenance.model_sha256,
            artifact.provenance.hash,
        )),
    }
}
