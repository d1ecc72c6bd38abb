use std::collections::{BTreeMap, BTreeSet};

use super::Finding;
use crate::kernel::{Type, TypeExpr, TypeShape, TypeTable};
use crate::speclang::{
    ActionDecl, AutomatonDecl, BehaviorRef, ComponentDecl, Corpus, EndpointRef, NetworkDecl, PortDecl, Severity,
};
use crate::traces::Party;

pub(super) struct Context<'a> {
    corpus: &'a Corpus,
    types: TypeTable,
    automata: BTreeMap<&'a str, (&'a str, &'a AutomatonDecl)>,
    components: BTreeMap<&'a str, (&'a str, &'a ComponentDecl)>,
    networks: BTreeMap<&'a str, (&'a str, &'a NetworkDecl)>,
}

fn finding(code: &str, severity: Severity, file: &str, path: String, message: String) -> Finding {
    Finding {
        code: code.to_string(),
        severity,
        file: file.to_string(),
        path,
        message,
    }
}

fn error(code: &str, file: &str, path: String, message: String) -> Finding {
    finding(code, Severity::Error, file, path, message)
}

fn warning(code: &str, file: &str, path: String, message: String) -> Finding {
    finding(code, Severity::Warning, file, path, message)
}

fn port<'p>(ports: &'p [PortDecl], name: &str) -> Option<&'p PortDecl> {
    ports.iter().find(|p| p.name == name)
}

impl<'a> Context<'a> {
    pub(super) fn new(corpus: &'a Corpus) -> Self {
        let mut automata = BTreeMap::new();
        let mut components = BTreeMap::new();
        let mut networks = BTreeMap::new();
        for sd in &corpus.documents {
            let file = sd.path.as_str();
            for a in &sd.doc.automata {
                automata.entry(a.name.as_str()).or_insert((file, a));
            }
            for c in &sd.doc.components {
                components.entry(c.name.as_str()).or_insert((file, c));
            }
            for n in &sd.doc.networks {
                networks.entry(n.name.as_str()).or_insert((file, n));
            }
        }
        Context {
            corpus,
            types: TypeTable::new(corpus.docs().flat_map(|d| d.datatypes.iter())),
            automata,
            components,
            networks,
        }
    }

    fn ty(&self, t: &TypeExpr) -> Option<Type> {
        self.types.resolve(t).ok()
    }

    fn same_type(&self, a: &TypeExpr, b: &TypeExpr) -> bool {
        match (self.ty(a), self.ty(b)) {
            (Some(x), Some(y)) => x == y,
            // Unresolvable types are a wellformedness matter.
            _ => true,
        }
    }

    pub(super) fn run(&self, code: &str) -> Vec<Finding> {
        match code {
            "C-IF-01" => self.interface_channels(),
            "C-IF-02" => self.behavior_refs(),
            "C-HY-01" => self.hierarchy_ports(),
            "C-TY-01" => self.wire_types(),
            "C-ET-01" => self.trace_channels(),
            "C-ET-02" => self.trace_parties(),
            "W-CMP-01" => self.missing_behaviors(),
            "W-NET-01" => self.unwired_ports(),
            "W-DT-01" => self.unused_datatypes(),
            other => unreachable!("rule `{other}` is registered but not implemented"),
        }
    }

    fn interface_channels(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (_, comp) in self.components.values() {
            let Some(BehaviorRef::Automaton(a)) = &comp.behavior else {
                continue;
            };
            let Some((file, auto)) = self.automata.get(a.as_str()) else {
                continue;
            };
            for (i, t) in auto.transitions.iter().enumerate() {
                let path = format!("automaton {}/transition {}", auto.name, i + 1);
                let mut check = |channel: &str, declared: Option<&PortDecl>, owner: Option<&PortDecl>, dir: &str| {
                    match (declared, owner) {
                        (_, None) => out.push(error(
                            "C-IF-01",
                            file,
                            path.clone(),
                            format!("channel `{channel}` is not an {dir} of component `{}`", comp.name),
                        )),
                        (Some(d), Some(o)) if !self.same_type(&d.ty, &o.ty) => out.push(error(
                            "C-IF-01",
                            file,
                            path.clone(),
                            format!(
                                "channel `{channel}` has type {} here but {} in component `{}`",
                                d.ty, o.ty, comp.name
                            ),
                        )),
                        _ => {}
                    }
                };
                for p in &t.patterns {
                    check(&p.channel, auto.input(&p.channel), comp.input(&p.channel), "input");
                }
                for act in &t.actions {
                    if let ActionDecl::Emit { channel, .. } = act {
                        check(channel, auto.output(channel), comp.output(channel), "output");
                    }
                }
            }
        }
        out
    }

    fn behavior_refs(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, comp) in self.components.values() {
            let missing = match &comp.behavior {
                Some(BehaviorRef::Automaton(a)) if !self.automata.contains_key(a.as_str()) => Some(("automaton", a)),
                Some(BehaviorRef::Network(n)) if !self.networks.contains_key(n.as_str()) => Some(("network", n)),
                _ => None,
            };
            if let Some((kind, name)) = missing {
                out.push(error(
                    "C-IF-02",
                    file,
                    format!("component {}", comp.name),
                    format!("behavior refers to unknown {kind} `{name}`"),
                ));
            }
        }
        for (file, net) in self.networks.values() {
            for node in &net.nodes {
                if !self.components.contains_key(node.component.as_str()) {
                    out.push(error(
                        "C-IF-02",
                        file,
                        format!("network {}/node {}", net.name, node.name),
                        format!("unknown component `{}`", node.component),
                    ));
                }
            }
        }
        out
    }

    fn hierarchy_ports(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, comp) in self.components.values() {
            let Some(BehaviorRef::Network(n)) = &comp.behavior else {
                continue;
            };
            let Some((_, net)) = self.networks.get(n.as_str()) else {
                continue;
            };
            for (dir, theirs, ours) in [("input", &net.inputs, &comp.inputs), ("output", &net.outputs, &comp.outputs)] {
                let names: BTreeSet<&str> = theirs.iter().chain(ours.iter()).map(|p| p.name.as_str()).collect();
                for name in names {
                    let problem = match (port(theirs, name), port(ours, name)) {
                        (Some(_), None) => Some(format!("network `{n}` has {dir} `{name}`, the component does not")),
                        (None, Some(_)) => Some(format!("component has {dir} `{name}`, network `{n}` does not")),
                        (Some(t), Some(o)) if !self.same_type(&t.ty, &o.ty) => Some(format!(
                            "{dir} `{name}` is {} in network `{n}` but {} in the component",
                            t.ty, o.ty
                        )),
                        _ => None,
                    };
                    if let Some(message) = problem {
                        out.push(error("C-HY-01", file, format!("component {}", comp.name), message));
                    }
                }
            }
        }
        out
    }

    /// The node port an endpoint denotes. `Ok(None)` for a valid external
    /// port, or for a node whose component is unknown.
    fn endpoint_port(&self, net: &NetworkDecl, e: &EndpointRef, as_source: bool) -> Result<Option<&'a PortDecl>, String> {
        match &e.instance {
            None => {
                let ports = if as_source { &net.inputs } else { &net.outputs };
                let found = ports.iter().find(|p| p.name == e.port);
                match found {
                    Some(_) => Ok(None),
                    None => Err(format!(
                        "`{}` is not an external {} of `{}`",
                        e.port,
                        if as_source { "input" } else { "output" },
                        net.name
                    )),
                }
            }
            Some(inst) => {
                let node = net
                    .nodes
                    .iter()
                    .find(|n| &n.name == inst)
                    .ok_or_else(|| format!("no node `{inst}`"))?;
                let Some((_, comp)) = self.components.get(node.component.as_str()) else {
                    // Reported by C-IF-02.
                    return Ok(None);
                };
                let ports = if as_source { &comp.outputs } else { &comp.inputs };
                ports.iter().find(|p| p.name == e.port).map(Some).ok_or_else(|| {
                    format!(
                        "component `{}` has no {} `{}`",
                        comp.name,
                        if as_source { "output" } else { "input" },
                        e.port
                    )
                })
            }
        }
    }

    fn wire_types(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, net) in self.networks.values() {
            for w in &net.wires {
                let path = format!("network {}/wire {} -> {}", net.name, w.source, w.sink);
                let src = self.endpoint_port(net, &w.source, true);
                let dst = self.endpoint_port(net, &w.sink, false);
                let external = |e: &EndpointRef, ports: &[PortDecl]| {
                    e.instance.is_none().then(|| port(ports, &e.port)).flatten().map(|p| p.ty.clone())
                };
                match (src, dst) {
                    (Err(m), _) | (_, Err(m)) => out.push(error("C-TY-01", file, path, m)),
                    (Ok(s), Ok(d)) => {
                        let st = s.map(|p| p.ty.clone()).or_else(|| external(&w.source, &net.inputs));
                        let dt = d.map(|p| p.ty.clone()).or_else(|| external(&w.sink, &net.outputs));
                        if let (Some(st), Some(dt)) = (st, dt) {
                            if !self.same_type(&st, &dt) {
                                out.push(error("C-TY-01", file, path, format!("connects {st} to {dt}")));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Follows an instance path through nested networks to its component.
    fn instance(&self, network: &str, path: &str) -> Option<&'a ComponentDecl> {
        let mut net = self.networks.get(network)?.1;
        let mut comp = None;
        for (i, seg) in path.split('/').enumerate() {
            if i > 0 {
                let Some(BehaviorRef::Network(n)) = &comp.map(|c: &ComponentDecl| &c.behavior)? else {
                    return None;
                };
                net = self.networks.get(n.as_str())?.1;
            }
            let node = net.nodes.iter().find(|n| n.name == seg)?;
            comp = Some(self.components.get(node.component.as_str())?.1);
        }
        comp
    }

    fn traces(&self) -> impl Iterator<Item = (&'a str, &'a crate::speclang::TraceDecl)> {
        self.corpus
            .documents
            .iter()
            .flat_map(|sd| sd.doc.traces.iter().map(move |t| (sd.path.as_str(), t)))
    }

    fn trace_channels(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, t) in self.traces() {
            let Some((_, net)) = self.networks.get(t.network.as_str()) else {
                continue;
            };
            for (i, e) in t.events.iter().enumerate() {
                let path = format!("trace {}/event {}", t.name, i + 1);
                let declared = match &e.sender {
                    Party::Env => port(&net.inputs, &e.channel).ok_or_else(|| {
                        format!("`{}` is not an external input of `{}`", e.channel, net.name)
                    }),
                    Party::Instance(p) => match self.instance(&net.name, p) {
                        Some(comp) => comp
                            .output(&e.channel)
                            .ok_or_else(|| format!("`{p}` has no output `{}`", e.channel)),
                        None => continue,
                    },
                };
                match declared {
                    Err(m) => out.push(error("C-ET-01", file, path, m)),
                    Ok(p) => {
                        if let Some(ty) = self.ty(&p.ty) {
                            if !ty.conforms(&e.message) {
                                out.push(error(
                                    "C-ET-01",
                                    file,
                                    path,
                                    format!("message {} does not conform to {ty}", e.message),
                                ));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn trace_parties(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, t) in self.traces() {
            if !self.networks.contains_key(t.network.as_str()) {
                out.push(error(
                    "C-ET-02",
                    file,
                    format!("trace {}", t.name),
                    format!("unknown network `{}`", t.network),
                ));
                continue;
            }
            for (i, e) in t.events.iter().enumerate() {
                for (role, party) in [("sender", &e.sender), ("receiver", &e.receiver)] {
                    if let Party::Instance(p) = party {
                        if self.instance(&t.network, p).is_none() {
                            out.push(error(
                                "C-ET-02",
                                file,
                                format!("trace {}/event {}", t.name, i + 1),
                                format!("{role} `{p}` is not an instance of `{}`", t.network),
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    fn missing_behaviors(&self) -> Vec<Finding> {
        self.components
            .values()
            .filter(|(_, c)| c.behavior.is_none())
            .map(|(file, c)| {
                warning(
                    "W-CMP-01",
                    file,
                    format!("component {}", c.name),
                    "no behavior is given".into(),
                )
            })
            .collect()
    }

    fn unwired_ports(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        for (file, net) in self.networks.values() {
            let sources: BTreeSet<&EndpointRef> = net.wires.iter().map(|w| &w.source).collect();
            let sinks: BTreeSet<&EndpointRef> = net.wires.iter().map(|w| &w.sink).collect();
            let mut open = |instance: Option<&str>, p: &PortDecl, used: &BTreeSet<&EndpointRef>| {
                let e = EndpointRef {
                    instance: instance.map(str::to_string),
                    port: p.name.clone(),
                };
                if !used.contains(&e) {
                    out.push(warning(
                        "W-NET-01",
                        file,
                        format!("network {}/port {e}", net.name),
                        "port is not wired".into(),
                    ));
                }
            };
            for p in &net.inputs {
                open(None, p, &sources);
            }
            for p in &net.outputs {
                open(None, p, &sinks);
            }
            for node in &net.nodes {
                if let Some((_, comp)) = self.components.get(node.component.as_str()) {
                    for p in &comp.inputs {
                        open(Some(&node.name), p, &sinks);
                    }
                    for p in &comp.outputs {
                        open(Some(&node.name), p, &sources);
                    }
                }
            }
        }
        out
    }

    fn unused_datatypes(&self) -> Vec<Finding> {
        let mut used = BTreeSet::new();
        let mut note = |t: &TypeExpr| {
            if let TypeExpr::Named(n) = t {
                used.insert(n.clone());
            }
        };
        for d in self.corpus.docs() {
            for dt in &d.datatypes {
                if let TypeShape::Record(fields) = &dt.shape {
                    fields.iter().for_each(|(_, t)| note(t));
                }
            }
            for a in &d.automata {
                a.inputs.iter().chain(&a.outputs).for_each(|p| note(&p.ty));
                a.vars.iter().for_each(|v| note(&v.ty));
            }
            for c in &d.components {
                c.inputs.iter().chain(&c.outputs).for_each(|p| note(&p.ty));
            }
            for n in &d.networks {
                n.inputs.iter().chain(&n.outputs).for_each(|p| note(&p.ty));
            }
        }
        let mut out = Vec::new();
        for sd in &self.corpus.documents {
            for dt in &sd.doc.datatypes {
                if !used.contains(&dt.name) {
                    out.push(warning(
                        "W-DT-01",
                        &sd.path,
                        format!("datatype {}", dt.name),
                        "never referenced".into(),
                    ));
                }
            }
        }
        out
    }
}
