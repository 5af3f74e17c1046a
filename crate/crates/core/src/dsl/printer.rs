use std::fmt::Write;

use crate::model::{Branch, Destination, ProtocolSpec};

/// Renders a spec in canonical `.tsp` form: declarations first, every
/// branch with its full `[r; [..]; [..]]` attributes and post-assignment
/// list, output side before input side.
pub fn serialize_protocol(spec: &ProtocolSpec) -> String {
    let mut out = String::new();
    let i = spec.internal();
    for (name, v) in &i.consts {
        writeln!(out, "const {name} = {v};").unwrap();
    }
    for (name, init) in &i.vars {
        writeln!(out, "var {name} = {init};").unwrap();
    }
    for (key, a) in &i.assigns {
        writeln!(out, "assign {key}: {a};").unwrap();
    }
    for (key, p) in &i.preds {
        writeln!(out, "pred {key}: {p};").unwrap();
    }
    for (name, labels) in &i.enums {
        writeln!(out, "enum {name} {{ {} }}", labels.join(", ")).unwrap();
    }
    if !out.is_empty() {
        out.push('\n');
    }

    for (name, body) in spec.typestate().states() {
        write!(out, "state {name} = ").unwrap();
        if body.is_terminal() {
            out.push_str("end");
        }
        let sides = [('!', &body.outputs), ('?', &body.inputs)];
        let mut first = true;
        for (sigil, branches) in sides {
            if branches.is_empty() {
                continue;
            }
            if !first {
                out.push_str(" + ");
            }
            first = false;
            write!(out, "{sigil}{{ ").unwrap();
            for (k, b) in branches.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                branch(&mut out, b);
            }
            out.push_str(" }");
        }
        out.push('\n');
    }
    out
}

fn branch(out: &mut String, b: &Branch) {
    write!(
        out,
        "{} {}({}) [{}; [{}]; [{}]] : ",
        b.action.ret,
        b.action.name,
        b.action.params.join(", "),
        b.ratio,
        b.pre_assigns.join(", "),
        b.preds.join(", ")
    )
    .unwrap();
    match &b.dest {
        Destination::Plain(s) => out.push_str(s),
        Destination::Decision(map) => {
            out.push('<');
            for (k, (outcome, target)) in map.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write!(out, "{outcome}: {target}").unwrap();
            }
            out.push('>');
        }
    }
    write!(out, " [{}]", b.post_assigns.join(", ")).unwrap();
}
