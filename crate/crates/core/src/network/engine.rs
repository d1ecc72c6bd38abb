use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::def::{Endpoint, NetworkDef, NodeBehavior};
use super::NetworkError;
use crate::behavior::{step, Branch, IdlePolicy, MachineConfig, StateMachine};
use crate::kernel::Value;
use crate::traces::{Party, TraceEvent};

/// Where a node input or an external output gets its messages from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum Feed {
    Env(String),
    Node { index: usize, port: String },
}

/// Synchronous stepper over a flat network. All nodes step in every
/// interval; wires deliver instantly, so a message emitted in interval `i`
/// is consumed at its sink in interval `i + 1`.
#[derive(Debug, Clone)]
pub struct Engine {
    net: NetworkDef,
    machines: Vec<StateMachine>,
    /// Per node, per input port.
    inputs: Vec<BTreeMap<String, (Feed, Party)>>,
    /// Per external output.
    outputs: BTreeMap<String, Feed>,
}

/// Everything between two intervals: per-node configurations, in node
/// order, and the emissions each node has yet to deliver.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GlobalConfig {
    pub nodes: Vec<MachineConfig>,
    pub pending: Vec<BTreeMap<String, Value>>,
}

/// What becomes visible in one interval before the nodes step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delivery {
    pub arrivals: Vec<BTreeMap<String, Vec<Value>>>,
    pub outputs: BTreeMap<String, Vec<Value>>,
    pub events: Vec<TraceEvent>,
}

impl Engine {
    /// Builds an engine for a flattened network.
    pub fn new(flat: &NetworkDef) -> Result<Engine, NetworkError> {
        if !flat.is_flat() {
            return Err(NetworkError::Invalid {
                network: flat.name.clone(),
                message: "engine needs a flattened network".into(),
            });
        }
        flat.validate()?;
        let machines: Vec<StateMachine> = flat
            .nodes
            .iter()
            .map(|n| match &n.behavior {
                NodeBehavior::Machine(m) => m.clone(),
                NodeBehavior::Network(_) => unreachable!("checked flat"),
            })
            .collect();
        let index: BTreeMap<&str, usize> = flat.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
        let feed = |e: &Endpoint| match e {
            Endpoint::Env { port } => Feed::Env(port.clone()),
            Endpoint::Node { instance, port } => Feed::Node {
                index: index[instance.as_str()],
                port: port.clone(),
            },
        };
        let mut inputs = vec![BTreeMap::new(); flat.nodes.len()];
        let mut outputs = BTreeMap::new();
        for w in &flat.wires {
            match &w.sink {
                Endpoint::Env { port } => {
                    outputs.insert(port.clone(), feed(&w.source));
                }
                Endpoint::Node { instance, port } => {
                    let sender = match &w.source {
                        Endpoint::Env { .. } => Party::Env,
                        Endpoint::Node { instance, .. } => Party::Instance(instance.clone()),
                    };
                    inputs[index[instance.as_str()]].insert(port.clone(), (feed(&w.source), sender));
                }
            }
        }
        Ok(Engine {
            net: flat.clone(),
            machines,
            inputs,
            outputs,
        })
    }

    pub fn network(&self) -> &NetworkDef {
        &self.net
    }

    pub fn machines(&self) -> &[StateMachine] {
        &self.machines
    }

    pub fn instance_names(&self) -> impl Iterator<Item = &str> {
        self.net.nodes.iter().map(|n| n.name.as_str())
    }

    pub fn initial(&self) -> GlobalConfig {
        GlobalConfig {
            nodes: self.machines.iter().map(StateMachine::initial_config).collect(),
            pending: vec![BTreeMap::new(); self.machines.len()],
        }
    }

    /// Routes pending emissions and the environment's messages for interval
    /// `interval` to their sinks, recording one event per delivered message.
    pub fn deliver(&self, cfg: &GlobalConfig, env: &BTreeMap<String, Vec<Value>>, interval: usize) -> Delivery {
        let fetch = |f: &Feed| -> Vec<Value> {
            match f {
                Feed::Env(port) => env.get(port).cloned().unwrap_or_default(),
                Feed::Node { index, port } => cfg.pending[*index].get(port).cloned().into_iter().collect(),
            }
        };
        let sender_port = |f: &Feed| match f {
            Feed::Env(port) | Feed::Node { port, .. } => port.clone(),
        };
        let mut d = Delivery::default();
        for (i, ports) in self.inputs.iter().enumerate() {
            let mut arrivals = BTreeMap::new();
            for (port, (feed, sender)) in ports {
                let msgs = fetch(feed);
                for m in &msgs {
                    d.events.push(TraceEvent {
                        sender: sender.clone(),
                        receiver: Party::Instance(self.net.nodes[i].name.clone()),
                        channel: sender_port(feed),
                        message: m.clone(),
                        interval,
                    });
                }
                if !msgs.is_empty() {
                    arrivals.insert(port.clone(), msgs);
                }
            }
            d.arrivals.push(arrivals);
        }
        for (port, feed) in &self.outputs {
            let msgs = fetch(feed);
            if let Feed::Node { index, .. } = feed {
                for m in &msgs {
                    d.events.push(TraceEvent {
                        sender: Party::Instance(self.net.nodes[*index].name.clone()),
                        receiver: Party::Env,
                        channel: sender_port(feed),
                        message: m.clone(),
                        interval,
                    });
                }
            }
            d.outputs.insert(port.clone(), msgs);
        }
        d.events.sort();
        d
    }

    /// The successors of every node, in node order.
    pub fn node_branches(
        &self,
        cfg: &GlobalConfig,
        delivery: &Delivery,
        policy: IdlePolicy,
    ) -> Result<Vec<Vec<Branch>>, NetworkError> {
        self.machines
            .iter()
            .zip(&cfg.nodes)
            .zip(&delivery.arrivals)
            .map(|((m, c), a)| step(m, c, a, policy).map_err(NetworkError::from))
            .collect()
    }

    /// Assembles the next global configuration from one branch per node.
    pub fn combine<'a>(&self, chosen: impl IntoIterator<Item = &'a Branch>) -> GlobalConfig {
        let mut next = GlobalConfig {
            nodes: Vec::with_capacity(self.machines.len()),
            pending: Vec::with_capacity(self.machines.len()),
        };
        for b in chosen {
            next.nodes.push(b.config.clone());
            next.pending.push(b.emissions.clone());
        }
        next
    }

    /// Every global successor: the cartesian product of the node branches,
    /// first node varying slowest.
    pub fn successors(
        &self,
        branches: &[Vec<Branch>],
        budget: &mut Budget,
    ) -> Result<Vec<GlobalConfig>, NetworkError> {
        let total: usize = branches.iter().map(Vec::len).product();
        budget.spend(total)?;
        let mut out = Vec::with_capacity(total);
        for index in 0..total {
            out.push(self.combine(select(branches, index)));
        }
        Ok(out)
    }
}

/// The branch of each node selected by a mixed-radix product index, first
/// node most significant.
pub fn select(branches: &[Vec<Branch>], mut index: usize) -> Vec<&Branch> {
    let mut picked = vec![None; branches.len()];
    for (i, bs) in branches.iter().enumerate().rev() {
        picked[i] = Some(&bs[index % bs.len()]);
        index /= bs.len();
    }
    picked.into_iter().map(|b| b.expect("every node has a branch")).collect()
}

/// Counts run-tree nodes against a ceiling.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub limit: usize,
    pub used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn spend(&mut self, n: usize) -> Result<(), NetworkError> {
        self.used = self.used.saturating_add(n);
        if self.used > self.limit {
            return Err(NetworkError::Behavior(crate::behavior::BehaviorError::ExplosionGuard {
                budget: self.limit,
                count: self.used,
            }));
        }
        Ok(())
    }
}
