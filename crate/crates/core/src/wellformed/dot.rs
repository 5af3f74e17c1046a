use std::fmt::Write;

use super::TransitionSet;
use crate::model::{Direction, ProtocolSpec, Value};

/// Renders the transition set as a Graphviz digraph.
///
/// Every declared state is a node; the start state is drawn bold and
/// terminal states as double circles. Edge labels carry `!` for outputs and
/// `?` for inputs; decision edges are labelled `action/value`.
pub fn export_dot(spec: &ProtocolSpec, trs: &TransitionSet) -> String {
    let ts = spec.typestate();
    let mut out = String::from("digraph typestate {\n    rankdir=LR;\n");
    for name in ts.state_names() {
        let mut attrs = Vec::new();
        if name == trs.start {
            attrs.push("style=bold");
        }
        attrs.push(if trs.is_terminal(name) {
            "shape=doublecircle"
        } else {
            "shape=circle"
        });
        writeln!(out, "    {} [{}];", quote(name), attrs.join(", ")).unwrap();
    }
    for t in trs.iter() {
        let sigil = ts
            .find_branch(&t.from, &t.action)
            .map(|(d, _)| d.sigil())
            .unwrap_or(Direction::In.sigil());
        let label = match &t.value {
            Value::None => format!("{sigil}{}", t.action),
            v => format!("{sigil}{}/{v}", t.action),
        };
        writeln!(
            out,
            "    {} -> {} [label={}];",
            quote(&t.from),
            quote(&t.to),
            quote(&label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
