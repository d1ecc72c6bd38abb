use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NetworkError;
use crate::behavior::StateMachine;
use crate::kernel::ChannelId;

/// One end of a wire.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Endpoint {
    /// An external port of the enclosing network.
    Env { port: String },
    Node { instance: String, port: String },
}

impl Endpoint {
    pub fn env(port: impl Into<String>) -> Self {
        Endpoint::Env { port: port.into() }
    }

    pub fn node(instance: impl Into<String>, port: impl Into<String>) -> Self {
        Endpoint::Node {
            instance: instance.into(),
            port: port.into(),
        }
    }

    pub fn port(&self) -> &str {
        match self {
            Endpoint::Env { port } | Endpoint::Node { port, .. } => port,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Env { port } => f.write_str(port),
            Endpoint::Node { instance, port } => write!(f, "{instance}.{port}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Wire {
    pub source: Endpoint,
    pub sink: Endpoint,
}

impl Wire {
    pub fn new(source: Endpoint, sink: Endpoint) -> Self {
        Wire { source, sink }
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.source, self.sink)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "def", rename_all = "snake_case")]
pub enum NodeBehavior {
    Machine(StateMachine),
    Network(Box<NetworkDef>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub behavior: NodeBehavior,
}

impl Node {
    pub fn machine(name: impl Into<String>, machine: StateMachine) -> Self {
        Node {
            name: name.into(),
            behavior: NodeBehavior::Machine(machine),
        }
    }

    pub fn network(name: impl Into<String>, net: NetworkDef) -> Self {
        Node {
            name: name.into(),
            behavior: NodeBehavior::Network(Box::new(net)),
        }
    }

    pub fn inputs(&self) -> &[ChannelId] {
        match &self.behavior {
            NodeBehavior::Machine(m) => &m.inputs,
            NodeBehavior::Network(n) => &n.inputs,
        }
    }

    pub fn outputs(&self) -> &[ChannelId] {
        match &self.behavior {
            NodeBehavior::Machine(m) => &m.outputs,
            NodeBehavior::Network(n) => &n.outputs,
        }
    }
}

/// How unconnected node ports are treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WiringMode {
    /// Unwired inputs stay silent and unwired outputs are discarded.
    #[default]
    Lenient,
    /// Any unwired node port is a [`NetworkError::DanglingPort`].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Input,
    Output,
}

/// Components connected by directed, typed channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDef {
    pub name: String,
    pub inputs: Vec<ChannelId>,
    pub outputs: Vec<ChannelId>,
    pub nodes: Vec<Node>,
    pub wires: Vec<Wire>,
}

impl NetworkDef {
    /// A network around a single machine with every port exposed under its
    /// own name.
    pub fn wrapping(instance: &str, machine: StateMachine) -> NetworkDef {
        let wires = machine
            .inputs
            .iter()
            .map(|c| Wire::new(Endpoint::env(&c.name), Endpoint::node(instance, &c.name)))
            .chain(
                machine
                    .outputs
                    .iter()
                    .map(|c| Wire::new(Endpoint::node(instance, &c.name), Endpoint::env(&c.name))),
            )
            .collect();
        NetworkDef {
            name: machine.name.clone(),
            inputs: machine.inputs.clone(),
            outputs: machine.outputs.clone(),
            nodes: vec![Node::machine(instance, machine)],
            wires,
        }
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn input(&self, name: &str) -> Option<&ChannelId> {
        self.inputs.iter().find(|c| c.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&ChannelId> {
        self.outputs.iter().find(|c| c.name == name)
    }

    /// The channel an endpoint denotes when used as a wire source.
    fn source_channel(&self, e: &Endpoint) -> Result<&ChannelId, NetworkError> {
        let found = match e {
            Endpoint::Env { port } => self.input(port),
            Endpoint::Node { instance, port } => self
                .node(instance)
                .and_then(|n| n.outputs().iter().find(|c| &c.name == port)),
        };
        found.ok_or_else(|| self.bad_endpoint(e, "not a source (external input or node output)"))
    }

    fn sink_channel(&self, e: &Endpoint) -> Result<&ChannelId, NetworkError> {
        let found = match e {
            Endpoint::Env { port } => self.output(port),
            Endpoint::Node { instance, port } => self
                .node(instance)
                .and_then(|n| n.inputs().iter().find(|c| &c.name == port)),
        };
        found.ok_or_else(|| self.bad_endpoint(e, "not a sink (external output or node input)"))
    }

    fn bad_endpoint(&self, e: &Endpoint, why: &str) -> NetworkError {
        NetworkError::Invalid {
            network: self.name.clone(),
            message: format!("endpoint `{e}` is {why}"),
        }
    }

    /// Checks the structural invariants of this level and of every child
    /// network.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let invalid = |message: String| NetworkError::Invalid {
            network: self.name.clone(),
            message,
        };
        let mut names = BTreeSet::new();
        for n in &self.nodes {
            // Flattened nets name inner instances by path (`outer/inner`).
            if n.name.contains('.') || n.name.split('/').any(str::is_empty) {
                return Err(invalid(format!("bad instance name `{}`", n.name)));
            }
            if !names.insert(&n.name) {
                return Err(invalid(format!("instance `{}` declared twice", n.name)));
            }
            if let NodeBehavior::Network(child) = &n.behavior {
                child.validate()?;
            }
        }
        let ports: BTreeSet<&str> = self.inputs.iter().chain(&self.outputs).map(|c| c.name.as_str()).collect();
        if ports.len() != self.inputs.len() + self.outputs.len() {
            return Err(invalid("external port names are not unique".into()));
        }
        let mut sources = BTreeSet::new();
        let mut sinks = BTreeSet::new();
        for w in &self.wires {
            if matches!((&w.source, &w.sink), (Endpoint::Env { .. }, Endpoint::Env { .. })) {
                return Err(invalid(format!("wire `{w}` feeds an input straight through")));
            }
            let from = self.source_channel(&w.source)?;
            let to = self.sink_channel(&w.sink)?;
            if from.msg_type != to.msg_type {
                return Err(NetworkError::TypeMismatch {
                    wire: w.to_string(),
                    source_type: from.msg_type.to_string(),
                    sink_type: to.msg_type.to_string(),
                });
            }
            if !sources.insert(&w.source) {
                return Err(invalid(format!("source `{}` wired twice", w.source)));
            }
            if !sinks.insert(&w.sink) {
                return Err(invalid(format!("sink `{}` wired twice", w.sink)));
            }
        }
        Ok(())
    }

    /// Ports of this level left unconnected, as `(instance, port, direction)`;
    /// external ports use an empty instance.
    pub fn unwired_ports(&self) -> Vec<(String, String, Direction)> {
        let sources: BTreeSet<&Endpoint> = self.wires.iter().map(|w| &w.source).collect();
        let sinks: BTreeSet<&Endpoint> = self.wires.iter().map(|w| &w.sink).collect();
        let mut out = Vec::new();
        for c in &self.inputs {
            if !sources.contains(&Endpoint::env(&c.name)) {
                out.push((String::new(), c.name.clone(), Direction::Input));
            }
        }
        for c in &self.outputs {
            if !sinks.contains(&Endpoint::env(&c.name)) {
                out.push((String::new(), c.name.clone(), Direction::Output));
            }
        }
        for n in &self.nodes {
            for c in n.inputs() {
                if !sinks.contains(&Endpoint::node(&n.name, &c.name)) {
                    out.push((n.name.clone(), c.name.clone(), Direction::Input));
                }
            }
            for c in n.outputs() {
                if !sources.contains(&Endpoint::node(&n.name, &c.name)) {
                    out.push((n.name.clone(), c.name.clone(), Direction::Output));
                }
            }
        }
        out.sort();
        out
    }

    pub fn is_flat(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| matches!(n.behavior, NodeBehavior::Machine(_)))
    }
}

/// Inlines every child network, naming inner instances by their path
/// (`outer/inner`). The result has only machine nodes, sorted by path.
pub fn flatten(net: &NetworkDef, mode: WiringMode) -> Result<NetworkDef, NetworkError> {
    net.validate()?;
    let flat = inline(net);
    if mode == WiringMode::Strict {
        if let Some((instance, port, dir)) = flat
            .unwired_ports()
            .into_iter()
            .find(|(inst, _, _)| !inst.is_empty())
        {
            return Err(NetworkError::DanglingPort {
                network: net.name.clone(),
                instance,
                port,
                direction: dir,
            });
        }
    }
    Ok(flat)
}

fn inline(net: &NetworkDef) -> NetworkDef {
    let mut nodes = Vec::new();
    // For each child network instance: where its external inputs lead and
    // where its external outputs come from, in flattened names.
    let mut child_in: BTreeMap<(String, String), Endpoint> = BTreeMap::new();
    let mut child_out: BTreeMap<(String, String), Endpoint> = BTreeMap::new();
    let mut wires = Vec::new();

    for node in &net.nodes {
        match &node.behavior {
            NodeBehavior::Machine(m) => nodes.push(Node::machine(&node.name, m.clone())),
            NodeBehavior::Network(child) => {
                let flat = inline(child);
                let prefix = |e: &Endpoint| match e {
                    Endpoint::Node { instance, port } => Endpoint::node(format!("{}/{instance}", node.name), port),
                    env => env.clone(),
                };
                for n in flat.nodes {
                    nodes.push(Node {
                        name: format!("{}/{}", node.name, n.name),
                        behavior: n.behavior,
                    });
                }
                for w in &flat.wires {
                    match (&w.source, &w.sink) {
                        (Endpoint::Env { port }, sink) => {
                            child_in.insert((node.name.clone(), port.clone()), prefix(sink));
                        }
                        (source, Endpoint::Env { port }) => {
                            child_out.insert((node.name.clone(), port.clone()), prefix(source));
                        }
                        (source, sink) => wires.push(Wire::new(prefix(source), prefix(sink))),
                    }
                }
            }
        }
    }

    let resolve_source = |e: &Endpoint| -> Option<Endpoint> {
        match e {
            Endpoint::Node { instance, port } if !matches!(net.node(instance).map(|n| &n.behavior), Some(NodeBehavior::Machine(_))) => {
                child_out.get(&(instance.clone(), port.clone())).cloned()
            }
            other => Some(other.clone()),
        }
    };
    let resolve_sink = |e: &Endpoint| -> Option<Endpoint> {
        match e {
            Endpoint::Node { instance, port } if !matches!(net.node(instance).map(|n| &n.behavior), Some(NodeBehavior::Machine(_))) => {
                child_in.get(&(instance.clone(), port.clone())).cloned()
            }
            other => Some(other.clone()),
        }
    };
    for w in &net.wires {
        // A port left open inside the child stays open after inlining.
        if let (Some(source), Some(sink)) = (resolve_source(&w.source), resolve_sink(&w.sink)) {
            wires.push(Wire::new(source, sink));
        }
    }

    nodes.sort_by(|a, b| a.name.cmp(&b.name));
    wires.sort();
    NetworkDef {
        name: net.name.clone(),
        inputs: net.inputs.clone(),
        outputs: net.outputs.clone(),
        nodes,
        wires,
    }
}
