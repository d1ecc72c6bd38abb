use std::fmt::Write;

use super::ast::*;
use crate::behavior::IdlePolicy;
use crate::kernel::{TypeShape, Value};
use crate::traces::Party;

fn policy_kw(p: IdlePolicy) -> &'static str {
    match p {
        IdlePolicy::Idle => "idle",
        IdlePolicy::Strict => "strict",
    }
}

fn ports(out: &mut String, inputs: &[PortDecl], outputs: &[PortDecl]) {
    for p in inputs {
        let _ = writeln!(out, "  in {}: {}", p.name, p.ty);
    }
    for p in outputs {
        let _ = writeln!(out, "  out {}: {}", p.name, p.ty);
    }
}

fn values(vs: &[Value]) -> String {
    let items: Vec<String> = vs.iter().map(Value::to_string).collect();
    format!("[{}]", items.join(", "))
}

pub fn party(p: &Party) -> String {
    match p {
        Party::Env => "env".into(),
        Party::Instance(path) => path.clone(),
    }
}

pub fn transition(t: &TransitionDecl) -> String {
    let mut s = format!("transition {} -> {}", t.source, t.target);
    if t.patterns.is_empty() && t.guard.is_none() && t.actions.is_empty() {
        return s;
    }
    s.push_str(" :");
    if !t.patterns.is_empty() {
        let pats: Vec<String> = t
            .patterns
            .iter()
            .map(|p| format!("{}?{}", p.channel, p.var))
            .collect();
        let _ = write!(s, " {}", pats.join(", "));
    }
    if let Some(g) = &t.guard {
        let _ = write!(s, " [{g}]");
    }
    if !t.actions.is_empty() {
        let acts: Vec<String> = t
            .actions
            .iter()
            .map(|a| match a {
                ActionDecl::Emit { channel, value } => format!("{channel}!{value}"),
                ActionDecl::Assign { var, value } => format!("{var} := {value}"),
            })
            .collect();
        let _ = write!(s, " / {}", acts.join(", "));
    }
    s
}

pub fn event(e: &EventDecl) -> String {
    format!(
        "{} -> {} : {}!{} @{}",
        party(&e.sender),
        party(&e.receiver),
        e.channel,
        e.message,
        e.interval
    )
}

pub fn trace(t: &TraceDecl) -> String {
    let mut out = format!("trace {} on {} {{\n", t.name, t.network);
    for e in &t.events {
        let _ = writeln!(out, "  {}", event(e));
    }
    out.push_str("}\n");
    out
}

/// Canonical text of a document. Sections appear in a fixed order, and
/// declarations keep their order within a section.
pub fn print_document(doc: &ModelDocument) -> String {
    let mut blocks: Vec<String> = Vec::new();

    if !doc.imports.is_empty() {
        let mut s = String::new();
        for i in &doc.imports {
            let _ = writeln!(s, "import \"{i}\"");
        }
        blocks.push(s);
    }
    if !doc.datatypes.is_empty() {
        let mut s = String::new();
        for d in &doc.datatypes {
            let shape = match &d.shape {
                TypeShape::IntRange { lo, hi } => format!("int[{lo}..{hi}]"),
                TypeShape::Enumeration(lits) => format!("enum {{ {} }}", lits.join(", ")),
                TypeShape::Record(fields) => {
                    let fs: Vec<String> = fields.iter().map(|(n, t)| format!("{n}: {t}")).collect();
                    format!("record {{ {} }}", fs.join(", "))
                }
            };
            let _ = writeln!(s, "datatype {} = {shape}", d.name);
        }
        blocks.push(s);
    }
    for a in &doc.automata {
        let mut s = format!("automaton {} {{\n", a.name);
        if let Some(p) = a.policy {
            let _ = writeln!(s, "  policy {}", policy_kw(p));
        }
        ports(&mut s, &a.inputs, &a.outputs);
        for v in &a.vars {
            let _ = writeln!(s, "  var {}: {} = {}", v.name, v.ty, v.init);
        }
        for st in &a.states {
            let _ = writeln!(
                s,
                "  state {}{}",
                st.name,
                if st.initial { " initial" } else { "" }
            );
        }
        for t in &a.transitions {
            let _ = writeln!(s, "  {}", transition(t));
        }
        s.push_str("}\n");
        blocks.push(s);
    }
    for c in &doc.components {
        let mut s = format!("component {} {{\n", c.name);
        ports(&mut s, &c.inputs, &c.outputs);
        match &c.behavior {
            Some(BehaviorRef::Automaton(a)) => {
                let _ = writeln!(s, "  behavior automaton {a}");
            }
            Some(BehaviorRef::Network(n)) => {
                let _ = writeln!(s, "  behavior network {n}");
            }
            None => {}
        }
        s.push_str("}\n");
        blocks.push(s);
    }
    for n in &doc.networks {
        let mut s = format!("network {} {{\n", n.name);
        ports(&mut s, &n.inputs, &n.outputs);
        for node in &n.nodes {
            let _ = writeln!(s, "  node {}: {}", node.name, node.component);
        }
        for w in &n.wires {
            let _ = writeln!(s, "  wire {} -> {}", w.source, w.sink);
        }
        s.push_str("}\n");
        blocks.push(s);
    }
    for t in &doc.traces {
        blocks.push(trace(t));
    }
    if !doc.trace_exprs.is_empty() {
        let mut s = String::new();
        for t in &doc.trace_exprs {
            let _ = writeln!(s, "traceexpr {} = {}", t.name, t.expr);
        }
        blocks.push(s);
    }
    for c in &doc.contracts {
        blocks.push(format!(
            "contract {} for {} {{\n  assume {}\n  commit {}\n}}\n",
            c.name, c.trace, c.assume, c.commit
        ));
    }
    for r in &doc.refinements {
        let mut s = format!("refinement {} {} {{\n", r.name, r.kind.keyword());
        let _ = writeln!(s, "  abstract {}", r.abstract_ref);
        let _ = writeln!(s, "  concrete {}", r.concrete_ref);
        if let Some(x) = &r.repr {
            let _ = writeln!(s, "  repr {x}");
        }
        if let Some(x) = &r.abst {
            let _ = writeln!(s, "  abst {x}");
        }
        let _ = writeln!(s, "  horizon {}", r.horizon);
        for (ch, vs) in &r.domains {
            let _ = writeln!(s, "  domain {ch} = {}", values(vs));
        }
        if let Some(n) = r.per_interval {
            let _ = writeln!(s, "  per_interval {n}");
        }
        if let Some(p) = r.policy {
            let _ = writeln!(s, "  policy {}", policy_kw(p));
        }
        if let Some(n) = r.slack {
            let _ = writeln!(s, "  slack {n}");
        }
        s.push_str("}\n");
        blocks.push(s);
    }
    blocks.join("\n")
}
