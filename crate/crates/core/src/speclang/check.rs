use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::Diagnostic;
use crate::expr::{eval, typecheck, Expr, SType};
use crate::kernel::{DataTypeDef, Type, TypeExpr, TypeShape, TypeTable, Value};

/// Names visible to one document: its own declarations plus those of the
/// documents it imports.
struct Scope<'a> {
    /// The document imports files that were not supplied, so names that
    /// could come from them are not reported.
    open: bool,
    types: TypeTable,
    literals: BTreeMap<String, String>,
    trace_names: BTreeSet<&'a str>,
}

impl<'a> Scope<'a> {
    fn new(doc: &'a ModelDocument, imports: &[&'a ModelDocument]) -> Self {
        let all: Vec<&ModelDocument> = std::iter::once(doc).chain(imports.iter().copied()).collect();
        let defs: Vec<&DataTypeDef> = all.iter().flat_map(|d| d.datatypes.iter()).collect();
        let mut literals = BTreeMap::new();
        for def in &defs {
            if let TypeShape::Enumeration(lits) = &def.shape {
                for lit in lits {
                    literals.entry(lit.clone()).or_insert_with(|| def.name.clone());
                }
            }
        }
        let trace_names = all
            .iter()
            .flat_map(|d| {
                d.traces
                    .iter()
                    .map(|t| t.name.as_str())
                    .chain(d.trace_exprs.iter().map(|t| t.name.as_str()))
            })
            .collect();
        Scope {
            open: !doc.imports.is_empty() && imports.is_empty(),
            types: TypeTable::new(defs),
            literals,
            trace_names,
        }
    }

    fn resolve_type(&self, ty: &TypeExpr) -> Option<Type> {
        self.types.resolve(ty).ok()
    }

    fn type_known(&self, ty: &TypeExpr) -> bool {
        match ty {
            TypeExpr::Named(name) => self.open || self.types.get(name).is_some(),
            _ => true,
        }
    }

    fn literal_type(&self, name: &str) -> Option<SType> {
        self.literals.get(name).map(|ty| SType::Enum(ty.clone()))
    }
}

fn port_types(out: &mut Vec<Diagnostic>, scope: &Scope, path: &str, ports: &[PortDecl]) {
    for p in ports {
        if !scope.type_known(&p.ty) {
            out.push(Diagnostic::error(
                "E-RES-04",
                Some(p.pos),
                format!("{path}/port {}", p.name),
                format!("unresolved datatype `{}`", p.ty),
            ));
        }
    }
}

pub(crate) fn resolve_references(doc: &ModelDocument, imports: &[&ModelDocument]) -> Vec<Diagnostic> {
    let scope = Scope::new(doc, imports);
    let mut out = Vec::new();

    for def in &doc.datatypes {
        if let TypeShape::Record(fields) = &def.shape {
            for (field, ty) in fields {
                if !scope.type_known(ty) {
                    out.push(Diagnostic::error(
                        "E-RES-04",
                        None,
                        format!("datatype {}", def.name),
                        format!("field `{field}` has unresolved datatype `{ty}`"),
                    ));
                }
            }
        }
    }

    for a in &doc.automata {
        let path = format!("automaton {}", a.name);
        port_types(&mut out, &scope, &path, &a.inputs);
        port_types(&mut out, &scope, &path, &a.outputs);
        let states: BTreeSet<&str> = a.states.iter().map(|s| s.name.as_str()).collect();
        let vars: BTreeSet<&str> = a.vars.iter().map(|v| v.name.as_str()).collect();
        let is_port = |c: &str| a.input(c).is_some() || a.output(c).is_some();
        for v in &a.vars {
            if !scope.type_known(&v.ty) {
                out.push(Diagnostic::error(
                    "E-RES-04",
                    Some(v.pos),
                    format!("{path}/var {}", v.name),
                    format!("unresolved datatype `{}`", v.ty),
                ));
            }
            for id in v.init.identifiers() {
                if scope.literals.contains_key(id) || scope.open {
                    continue;
                }
                out.push(Diagnostic::error(
                    "E-RES-03",
                    Some(v.pos),
                    format!("{path}/var {}", v.name),
                    format!("unresolved name `{id}` in initial value"),
                ));
            }
        }
        for (ti, t) in a.transitions.iter().enumerate() {
            let tpath = format!("{path}/transition {}", ti + 1);
            for st in [&t.source, &t.target] {
                if !states.contains(st.as_str()) {
                    out.push(Diagnostic::error(
                        "E-RES-02",
                        Some(t.pos),
                        &tpath,
                        format!("unresolved state `{st}`"),
                    ));
                }
            }
            let bound: BTreeSet<&str> = t.patterns.iter().map(|p| p.var.as_str()).collect();
            for p in &t.patterns {
                if !is_port(&p.channel) {
                    out.push(Diagnostic::error(
                        "E-RES-01",
                        Some(t.pos),
                        &tpath,
                        format!("unresolved channel `{}`", p.channel),
                    ));
                }
            }
            let mut exprs: Vec<&Expr> = t.guard.iter().collect();
            for action in &t.actions {
                match action {
                    ActionDecl::Emit { channel, value } => {
                        if !is_port(channel) {
                            out.push(Diagnostic::error(
                                "E-RES-01",
                                Some(t.pos),
                                &tpath,
                                format!("unresolved channel `{channel}`"),
                            ));
                        }
                        exprs.push(value);
                    }
                    ActionDecl::Assign { var, value } => {
                        if !vars.contains(var.as_str()) {
                            out.push(Diagnostic::error(
                                "E-RES-03",
                                Some(t.pos),
                                &tpath,
                                format!("unresolved variable `{var}`"),
                            ));
                        }
                        exprs.push(value);
                    }
                }
            }
            for e in exprs {
                for id in e.identifiers() {
                    let known = bound.contains(id)
                        || vars.contains(id)
                        || scope.literals.contains_key(id)
                        || scope.open;
                    if !known {
                        out.push(Diagnostic::error(
                            "E-RES-03",
                            Some(t.pos),
                            &tpath,
                            format!("unresolved name `{id}`"),
                        ));
                    }
                }
            }
        }
    }

    for c in &doc.components {
        let path = format!("component {}", c.name);
        port_types(&mut out, &scope, &path, &c.inputs);
        port_types(&mut out, &scope, &path, &c.outputs);
    }

    for n in &doc.networks {
        let path = format!("network {}", n.name);
        port_types(&mut out, &scope, &path, &n.inputs);
        port_types(&mut out, &scope, &path, &n.outputs);
        let nodes: BTreeSet<&str> = n.nodes.iter().map(|x| x.name.as_str()).collect();
        for (wi, w) in n.wires.iter().enumerate() {
            for end in [&w.source, &w.sink] {
                let ok = match &end.instance {
                    Some(inst) => nodes.contains(inst.as_str()),
                    None => n.inputs.iter().chain(&n.outputs).any(|p| p.name == end.port),
                };
                if !ok {
                    out.push(Diagnostic::error(
                        "E-RES-05",
                        Some(w.pos),
                        format!("{path}/wire {}", wi + 1),
                        format!("unresolved endpoint `{end}`"),
                    ));
                }
            }
        }
    }

    if !scope.open {
        for t in &doc.trace_exprs {
            for r in t.expr.references() {
                if !scope.trace_names.contains(r) {
                    out.push(Diagnostic::error(
                        "E-RES-06",
                        Some(t.pos),
                        format!("traceexpr {}", t.name),
                        format!("unresolved trace `{r}`"),
                    ));
                }
            }
        }
        for c in &doc.contracts {
            if !scope.trace_names.contains(c.trace.as_str()) {
                out.push(Diagnostic::error(
                    "E-RES-06",
                    Some(c.pos),
                    format!("contract {}", c.name),
                    format!("unresolved trace `{}`", c.trace),
                ));
            }
        }
    }
    out
}

fn duplicates<'a>(names: impl IntoIterator<Item = (&'a str, Option<Pos>)>) -> Vec<(&'a str, Option<Pos>)> {
    let mut seen = BTreeSet::new();
    names.into_iter().filter(|(n, _)| !seen.insert(*n)).collect()
}

/// Single-document context conditions. Includes reference resolution.
pub fn check_wellformedness(doc: &ModelDocument) -> Vec<Diagnostic> {
    check_wellformedness_in(doc, &[])
}

/// A declaration kind and its `(name, position)` pairs.
type Namespace<'a> = (&'static str, Vec<(&'a str, Option<Pos>)>);

/// Context conditions for `doc`, resolving names also against `imports`.
pub fn check_wellformedness_in(doc: &ModelDocument, imports: &[&ModelDocument]) -> Vec<Diagnostic> {
    let mut out = resolve_references(doc, imports);
    let scope = Scope::new(doc, imports);

    let namespaces: Vec<Namespace> = vec![
        ("datatype", doc.datatypes.iter().map(|d| (d.name.as_str(), None)).collect()),
        ("automaton", doc.automata.iter().map(|d| (d.name.as_str(), Some(d.pos))).collect()),
        ("component", doc.components.iter().map(|d| (d.name.as_str(), Some(d.pos))).collect()),
        ("network", doc.networks.iter().map(|d| (d.name.as_str(), Some(d.pos))).collect()),
        (
            "trace",
            doc.traces
                .iter()
                .map(|d| (d.name.as_str(), Some(d.pos)))
                .chain(doc.trace_exprs.iter().map(|d| (d.name.as_str(), Some(d.pos))))
                .collect(),
        ),
        ("contract", doc.contracts.iter().map(|d| (d.name.as_str(), Some(d.pos))).collect()),
        ("refinement", doc.refinements.iter().map(|d| (d.name.as_str(), Some(d.pos))).collect()),
    ];
    for (kind, names) in namespaces {
        for (name, pos) in duplicates(names) {
            out.push(Diagnostic::error(
                "WF-DUP-01",
                pos,
                format!("{kind} {name}"),
                format!("duplicate {kind} name `{name}`"),
            ));
        }
    }

    let mut literal_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for def in &doc.datatypes {
        let path = format!("datatype {}", def.name);
        if let Err(e) = scope.types.resolve_def(&def.name) {
            if !(scope.open && matches!(e, crate::kernel::TypeDefError::Unknown(_))) {
                out.push(Diagnostic::error("WF-TY-02", None, &path, e.to_string()));
            }
        }
        if let TypeShape::Enumeration(lits) = &def.shape {
            for lit in lits {
                if let Some(owner) = literal_owner.insert(lit, &def.name) {
                    if owner != def.name {
                        out.push(Diagnostic::error(
                            "WF-DUP-02",
                            None,
                            &path,
                            format!("literal `{lit}` is also declared by `{owner}`"),
                        ));
                    }
                }
            }
        }
    }

    for a in &doc.automata {
        check_automaton(&mut out, &scope, a);
    }

    for c in &doc.components {
        let path = format!("component {}", c.name);
        for (name, pos) in duplicates(c.inputs.iter().chain(&c.outputs).map(|p| (p.name.as_str(), Some(p.pos)))) {
            out.push(Diagnostic::error(
                "WF-DUP-02",
                pos,
                &path,
                format!("duplicate port `{name}`"),
            ));
        }
    }

    for n in &doc.networks {
        check_network(&mut out, n);
    }

    for t in &doc.traces {
        let mut last = 1;
        for (i, e) in t.events.iter().enumerate() {
            if e.interval < last {
                out.push(Diagnostic::error(
                    "WF-EV-01",
                    Some(e.pos),
                    format!("trace {}/event {}", t.name, i + 1),
                    format!("interval {} is out of order", e.interval),
                ));
            }
            last = last.max(e.interval);
        }
    }

    let exprs: BTreeMap<&str, &TraceExprDecl> = doc.trace_exprs.iter().map(|t| (t.name.as_str(), t)).collect();
    for t in &doc.trace_exprs {
        let mut stack = vec![t.name.as_str()];
        let mut seen = BTreeSet::new();
        let mut cyclic = false;
        while let Some(name) = stack.pop() {
            let Some(decl) = exprs.get(name) else { continue };
            for r in decl.expr.references() {
                if r == t.name {
                    cyclic = true;
                }
                if seen.insert(r) {
                    stack.push(r);
                }
            }
        }
        if cyclic {
            out.push(Diagnostic::error(
                "WF-TX-01",
                Some(t.pos),
                format!("traceexpr {}", t.name),
                "trace expression refers to itself",
            ));
        }
    }

    for r in &doc.refinements {
        let path = format!("refinement {}", r.name);
        if r.kind == RefinementKind::Interface && (r.repr.is_none() || r.abst.is_none()) {
            out.push(Diagnostic::error(
                "WF-RF-01",
                Some(r.pos),
                &path,
                "interface refinement needs both `repr` and `abst`",
            ));
        }
        if r.kind != RefinementKind::Interface && (r.repr.is_some() || r.abst.is_some()) {
            out.push(Diagnostic::error(
                "WF-RF-01",
                Some(r.pos),
                &path,
                "`repr`/`abst` only apply to interface refinement",
            ));
        }
        if r.slack.is_some() && r.kind != RefinementKind::Structural {
            out.push(Diagnostic::error(
                "WF-RF-01",
                Some(r.pos),
                &path,
                "`slack` only applies to structural refinement",
            ));
        }
    }
    out
}

fn compatible(expr: &SType, declared: &Type) -> bool {
    *expr == SType::from(declared)
}

fn check_automaton(out: &mut Vec<Diagnostic>, scope: &Scope, a: &AutomatonDecl) {
    let path = format!("automaton {}", a.name);
    for (name, pos) in duplicates(a.inputs.iter().chain(&a.outputs).map(|p| (p.name.as_str(), Some(p.pos)))) {
        out.push(Diagnostic::error("WF-DUP-02", pos, &path, format!("duplicate port `{name}`")));
    }
    for (name, pos) in duplicates(a.vars.iter().map(|v| (v.name.as_str(), Some(v.pos)))) {
        out.push(Diagnostic::error("WF-DUP-02", pos, &path, format!("duplicate variable `{name}`")));
    }
    for (name, pos) in duplicates(a.states.iter().map(|s| (s.name.as_str(), Some(s.pos)))) {
        out.push(Diagnostic::error("WF-DUP-02", pos, &path, format!("duplicate state `{name}`")));
    }
    let initial = a.states.iter().filter(|s| s.initial).count();
    if initial != 1 {
        out.push(Diagnostic::error(
            "WF-ST-01",
            Some(a.pos),
            &path,
            format!("expected exactly one initial state, found {initial}"),
        ));
    }

    let var_types: BTreeMap<&str, Option<Type>> =
        a.vars.iter().map(|v| (v.name.as_str(), scope.resolve_type(&v.ty))).collect();
    let port_type = |ports: &[PortDecl], name: &str| -> Option<Type> {
        ports.iter().find(|p| p.name == name).and_then(|p| scope.resolve_type(&p.ty))
    };

    for v in &a.vars {
        let vpath = format!("{path}/var {}", v.name);
        let Some(ty) = var_types.get(v.name.as_str()).cloned().flatten() else { continue };
        let literal = |n: &str| scope.literals.contains_key(n).then(|| Value::Enum(n.to_string()));
        match eval(&v.init, &literal) {
            Ok(value) if ty.conforms(&value) => {}
            Ok(value) => out.push(Diagnostic::error(
                "WF-TY-01",
                Some(v.pos),
                &vpath,
                format!("initial value {value} is not of type {ty}"),
            )),
            Err(e) if !scope.open => out.push(Diagnostic::error(
                "WF-TY-01",
                Some(v.pos),
                &vpath,
                format!("initial value is not a constant: {e}"),
            )),
            Err(_) => {}
        }
    }

    for (ti, t) in a.transitions.iter().enumerate() {
        let tpath = format!("{path}/transition {}", ti + 1);
        let mut bindings: BTreeMap<&str, Option<SType>> = BTreeMap::new();
        let mut read = BTreeSet::new();
        for p in &t.patterns {
            if a.output(&p.channel).is_some() && a.input(&p.channel).is_none() {
                out.push(Diagnostic::error(
                    "WF-DIR-01",
                    Some(t.pos),
                    &tpath,
                    format!("`{}` is an output and cannot be read", p.channel),
                ));
            }
            if !read.insert(p.channel.as_str()) {
                out.push(Diagnostic::error(
                    "WF-TR-01",
                    Some(t.pos),
                    &tpath,
                    format!("channel `{}` is read twice", p.channel),
                ));
            }
            if bindings.contains_key(p.var.as_str()) || var_types.contains_key(p.var.as_str()) {
                out.push(Diagnostic::error(
                    "WF-TR-01",
                    Some(t.pos),
                    &tpath,
                    format!("variable `{}` is already bound", p.var),
                ));
            }
            bindings.insert(&p.var, port_type(&a.inputs, &p.channel).map(|ty| SType::from(&ty)));
        }

        // Names bound to unresolved types make the expression uncheckable;
        // those are reported elsewhere.
        let lookup = |name: &str| -> Option<SType> {
            if let Some(b) = bindings.get(name) {
                return b.clone();
            }
            if let Some(v) = var_types.get(name) {
                return v.as_ref().map(SType::from);
            }
            scope.literal_type(name)
        };
        let check = |e: &Expr, expected: Option<&Type>, what: &str| -> Option<Diagnostic> {
            if e.identifiers().iter().any(|id| lookup(id).is_none()) {
                return None;
            }
            let message = match typecheck(e, &lookup) {
                Err(err) => format!("{what}: {err}"),
                Ok(found) => match expected {
                    Some(ty) if !compatible(&found, ty) => {
                        format!("{what}: expected {}, found {found}", SType::from(ty))
                    }
                    _ => return None,
                },
            };
            Some(Diagnostic::error("WF-TY-01", Some(t.pos), &tpath, message))
        };
        if let Some(g) = &t.guard {
            out.extend(check(g, Some(&Type::Bool), "guard"));
        }
        let mut written = BTreeSet::new();
        let mut assigned = BTreeSet::new();
        for action in &t.actions {
            match action {
                ActionDecl::Emit { channel, value } => {
                    if a.input(channel).is_some() && a.output(channel).is_none() {
                        out.push(Diagnostic::error(
                            "WF-DIR-01",
                            Some(t.pos),
                            &tpath,
                            format!("`{channel}` is an input and cannot be written"),
                        ));
                    }
                    if !written.insert(channel.as_str()) {
                        out.push(Diagnostic::error(
                            "WF-TR-01",
                            Some(t.pos),
                            &tpath,
                            format!("channel `{channel}` is written twice"),
                        ));
                    }
                    let ty = port_type(&a.outputs, channel);
                    out.extend(check(value, ty.as_ref(), &format!("emission on `{channel}`")));
                }
                ActionDecl::Assign { var, value } => {
                    if !assigned.insert(var.as_str()) {
                        out.push(Diagnostic::error(
                            "WF-TR-01",
                            Some(t.pos),
                            &tpath,
                            format!("variable `{var}` is assigned twice"),
                        ));
                    }
                    let ty = var_types.get(var.as_str()).cloned().flatten();
                    out.extend(check(value, ty.as_ref(), &format!("assignment to `{var}`")));
                }
            }
        }
    }
}

fn check_network(out: &mut Vec<Diagnostic>, n: &NetworkDecl) {
    let path = format!("network {}", n.name);
    for (name, pos) in duplicates(n.inputs.iter().chain(&n.outputs).map(|p| (p.name.as_str(), Some(p.pos)))) {
        out.push(Diagnostic::error("WF-DUP-02", pos, &path, format!("duplicate port `{name}`")));
    }
    for (name, pos) in duplicates(n.nodes.iter().map(|x| (x.name.as_str(), Some(x.pos)))) {
        out.push(Diagnostic::error("WF-DUP-02", pos, &path, format!("duplicate node `{name}`")));
    }
    let is_input = |p: &str| n.inputs.iter().any(|x| x.name == p);
    let is_output = |p: &str| n.outputs.iter().any(|x| x.name == p);
    let mut sources = BTreeSet::new();
    let mut sinks = BTreeSet::new();
    for (wi, w) in n.wires.iter().enumerate() {
        let wpath = format!("{path}/wire {}", wi + 1);
        if w.source.instance.is_none() && is_output(&w.source.port) && !is_input(&w.source.port) {
            out.push(Diagnostic::error(
                "WF-DIR-01",
                Some(w.pos),
                &wpath,
                format!("external output `{}` cannot be a wire source", w.source.port),
            ));
        }
        if w.sink.instance.is_none() && is_input(&w.sink.port) && !is_output(&w.sink.port) {
            out.push(Diagnostic::error(
                "WF-DIR-01",
                Some(w.pos),
                &wpath,
                format!("external input `{}` cannot be a wire sink", w.sink.port),
            ));
        }
        if w.source.instance.is_none() && w.sink.instance.is_none() {
            out.push(Diagnostic::error(
                "WF-WI-01",
                Some(w.pos),
                &wpath,
                "wire connects an external input directly to an external output",
            ));
        }
        if !sources.insert(&w.source) {
            out.push(Diagnostic::error(
                "WF-WI-01",
                Some(w.pos),
                &wpath,
                format!("`{}` already drives another wire", w.source),
            ));
        }
        if !sinks.insert(&w.sink) {
            out.push(Diagnostic::error(
                "WF-WI-01",
                Some(w.pos),
                &wpath,
                format!("`{}` is already driven by another wire", w.sink),
            ));
        }
    }
}
