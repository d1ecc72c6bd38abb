use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::behavior::{Branch, IdlePolicy};
use crate::consistency::gate;
use crate::kernel::{TimedStream, Value};
use crate::model::Model;
use crate::network::{flatten, select, Endpoint, Engine, GlobalConfig, WiringMode};
use crate::traces::{EventTrace, TraceEvent};

/// One message injected on an external input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub channel: String,
    pub value: Value,
}

impl Stimulus {
    pub fn new(channel: impl Into<String>, value: Value) -> Self {
        Stimulus {
            channel: channel.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDelta {
    pub instance: String,
    pub from: String,
    pub to: String,
    /// Index of the fired transition in declaration order; `None` when idle.
    pub transition: Option<usize>,
    /// Number of successors the node had to choose from.
    pub options: usize,
    pub consumed: BTreeMap<String, Value>,
    /// Emitted now, delivered in the next interval.
    pub emitted: BTreeMap<String, Value>,
}

/// What one step changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDelta {
    pub interval: usize,
    /// External outputs delivered in this interval.
    pub outputs: BTreeMap<String, Vec<Value>>,
    pub nodes: Vec<NodeDelta>,
    pub events: Vec<TraceEvent>,
    /// Size of the joint choice; a `branch` override must be below it.
    pub branches: usize,
    pub chosen: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeState {
    pub state: String,
    pub store: BTreeMap<String, Value>,
    pub buffers: BTreeMap<String, VecDeque<Value>>,
    /// Emissions awaiting delivery in the next interval.
    pub pending: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session: String,
    pub interval: usize,
    pub seed: u64,
    pub policy: IdlePolicy,
    pub nodes: BTreeMap<String, NodeState>,
    /// External ports by name, internal wires by source endpoint (`a.Out`).
    pub histories: BTreeMap<String, TimedStream>,
    pub trace: EventTrace,
}

/// Chooses one successor per node: the override's mixed-radix digits if
/// given, otherwise a uniform draw for every node with more than one.
pub(crate) fn choose(rng: &mut ChaCha8Rng, counts: &[usize], branch: Option<usize>) -> Result<(Vec<usize>, usize), SimError> {
    let total: usize = counts.iter().product();
    let picks = match branch {
        Some(b) if b >= total => return Err(SimError::BranchOutOfRange { branch: b, branches: total }),
        Some(mut b) => {
            let mut picks = vec![0; counts.len()];
            for (i, n) in counts.iter().enumerate().rev() {
                picks[i] = b % n;
                b /= n;
            }
            picks
        }
        None => counts
            .iter()
            .map(|&n| if n > 1 { rng.gen_range(0..n) } else { 0 })
            .collect(),
    };
    let joint = picks.iter().zip(counts).fold(0, |acc, (p, n)| acc * n + p);
    Ok((picks, joint))
}

/// A running prototype of one network.
#[derive(Debug)]
pub struct SimSession {
    id: String,
    engine: Engine,
    config: GlobalConfig,
    interval: usize,
    seed: u64,
    rng: ChaCha8Rng,
    policy: IdlePolicy,
    histories: BTreeMap<String, TimedStream>,
    recorded: Vec<TraceEvent>,
    closed: bool,
}

/// Starts a session after the full rule set finds no errors.
pub fn create_session(
    model: &Model,
    network: &str,
    seed: u64,
    policy: IdlePolicy,
    id: impl Into<String>,
) -> Result<SimSession, SimError> {
    let findings = gate(model.corpus());
    if !findings.is_empty() {
        return Err(SimError::Rejected(findings));
    }
    if model.network_decl(network).is_none() {
        return Err(SimError::UnknownNetwork(network.to_string()));
    }
    let flat = flatten(&model.network(network)?, WiringMode::Lenient)?;
    let engine = Engine::new(&flat)?;
    Ok(SimSession::from_engine(engine, seed, policy, id))
}

pub(crate) fn history_keys(engine: &Engine) -> Vec<String> {
    let net = engine.network();
    net.inputs
        .iter()
        .chain(&net.outputs)
        .map(|c| c.name.clone())
        .chain(net.wires.iter().filter_map(|w| match (&w.source, &w.sink) {
            (Endpoint::Node { .. }, Endpoint::Node { .. }) => Some(w.source.to_string()),
            _ => None,
        }))
        .collect()
}

impl SimSession {
    pub fn from_engine(engine: Engine, seed: u64, policy: IdlePolicy, id: impl Into<String>) -> Self {
        let histories = history_keys(&engine)
            .into_iter()
            .map(|k| (k, TimedStream::silent(0)))
            .collect();
        SimSession {
            id: id.into(),
            config: engine.initial(),
            engine,
            interval: 0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            policy,
            histories,
            recorded: Vec::new(),
            closed: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    fn live(&self) -> Result<(), SimError> {
        if self.closed {
            return Err(SimError::SessionClosed(self.id.clone()));
        }
        Ok(())
    }

    /// Advances one interval. `branch` picks the joint successor instead of
    /// the seeded draw.
    pub fn step(&mut self, stimuli: &[Stimulus], branch: Option<usize>) -> Result<SessionDelta, SimError> {
        self.live()?;
        let net = self.engine.network();
        let mut env: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        for s in stimuli {
            let decl = net
                .input(&s.channel)
                .ok_or_else(|| SimError::UnknownChannel(s.channel.clone()))?;
            if !decl.msg_type.conforms(&s.value) {
                return Err(SimError::TypeError {
                    channel: s.channel.clone(),
                    value: s.value.clone(),
                    expected: decl.msg_type.to_string(),
                });
            }
            env.entry(s.channel.clone()).or_default().push(s.value.clone());
        }
        let i = self.interval + 1;
        let delivery = self.engine.deliver(&self.config, &env, i);
        let branches = self.engine.node_branches(&self.config, &delivery, self.policy)?;
        let counts: Vec<usize> = branches.iter().map(Vec::len).collect();
        let (picks, chosen) = choose(&mut self.rng, &counts, branch)?;
        let picked: Vec<&Branch> = select(&branches, chosen);
        debug_assert!(picked.iter().zip(&branches).zip(&picks).all(|((p, bs), i)| *p == &bs[*i]));

        let nodes = self
            .engine
            .instance_names()
            .zip(&self.config.nodes)
            .zip(&picked)
            .zip(&counts)
            .map(|(((name, before), b), &options)| NodeDelta {
                instance: name.to_string(),
                from: before.control.clone(),
                to: b.config.control.clone(),
                transition: b.transition,
                options,
                consumed: b.consumed.clone(),
                emitted: b.emissions.clone(),
            })
            .collect();

        // Histories: external inputs as injected, everything else as delivered.
        let index: BTreeMap<&str, usize> = self.engine.instance_names().enumerate().map(|(i, n)| (n, i)).collect();
        for (key, stream) in self.histories.iter_mut() {
            let msgs = if let Some(v) = env.get(key) {
                v.clone()
            } else if let Some(v) = delivery.outputs.get(key) {
                v.clone()
            } else if let Some((inst, port)) = key.split_once('.') {
                self.config.pending[index[inst]].get(port).cloned().into_iter().collect()
            } else {
                Vec::new()
            };
            stream.push_interval(msgs);
        }

        let next = self.engine.combine(picked);
        self.config = next;
        self.interval = i;
        self.recorded.extend(delivery.events.iter().cloned());
        Ok(SessionDelta {
            interval: i,
            outputs: delivery.outputs.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
            nodes,
            events: delivery.events,
            branches: counts.iter().product(),
            chosen,
        })
    }

    pub fn snapshot(&self) -> Result<Snapshot, SimError> {
        self.live()?;
        let nodes = self
            .engine
            .instance_names()
            .zip(self.config.nodes.iter().zip(&self.config.pending))
            .map(|(name, (c, p))| {
                (
                    name.to_string(),
                    NodeState {
                        state: c.control.clone(),
                        store: c.store.clone(),
                        buffers: c.buffers.clone(),
                        pending: p.clone(),
                    },
                )
            })
            .collect();
        Ok(Snapshot {
            session: self.id.clone(),
            interval: self.interval,
            seed: self.seed,
            policy: self.policy,
            nodes,
            histories: self.histories.clone(),
            trace: EventTrace::new(self.recorded.clone()).expect("recorded in interval order"),
        })
    }

    pub fn export_trace(&self) -> Result<EventTrace, SimError> {
        self.live()?;
        Ok(EventTrace::new(self.recorded.clone()).expect("recorded in interval order"))
    }
}
