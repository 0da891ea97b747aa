//! Graphviz export.

use std::fmt::Write;

use crate::model::StateId;

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"").replace("\\\\n", "\\n")
}

/// Renders a graph; labels may contain `\n` line breaks.
pub fn render<'a>(
    initial: &[StateId],
    state_labels: &[String],
    edges: impl IntoIterator<Item = (StateId, &'a str, StateId)>,
) -> String {
    let mut out = String::from("digraph vts {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n");
    for (i, s) in initial.iter().enumerate() {
        writeln!(out, "  init{i} [shape=point];").unwrap();
        writeln!(out, "  init{i} -> q{};", s.0).unwrap();
    }
    for (i, label) in state_labels.iter().enumerate() {
        writeln!(out, "  q{i} [label=\"{}\"];", escape(label)).unwrap();
    }
    for (s, label, t) in edges {
        writeln!(out, "  q{} -> q{} [label=\"{}\"];", s.0, t.0, escape(label)).unwrap();
    }
    out.push_str("}\n");
    out
}
