use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::def::{flatten, Endpoint, NetworkDef, NodeBehavior, WiringMode};
use super::engine::{Budget, Engine, GlobalConfig};
use super::NetworkError;
use crate::behavior::{denote, SemanticsOptions, StateMachine};
use crate::kernel::{enumerate_streams, enumerate_valuations, validate_typing, Bounds, TimedStream, Valuation};

/// Output histories of every run of `net` on external input `input`.
pub fn denote_network(
    net: &NetworkDef,
    input: &Valuation,
    horizon: usize,
    opts: &SemanticsOptions,
) -> Result<BTreeSet<Valuation>, NetworkError> {
    let engine = Engine::new(&flatten(net, WiringMode::Lenient)?)?;
    denote_flat(&engine, input, horizon, opts)
}

/// [`denote_network`] on a prebuilt engine, for callers that evaluate many
/// inputs.
pub fn denote_flat(
    engine: &Engine,
    input: &Valuation,
    horizon: usize,
    opts: &SemanticsOptions,
) -> Result<BTreeSet<Valuation>, NetworkError> {
    let net = engine.network();
    if input.horizon() != horizon {
        return Err(NetworkError::Behavior(crate::behavior::BehaviorError::HorizonMismatch {
            expected: horizon,
            found: input.horizon(),
        }));
    }
    let violations = validate_typing(input, &net.inputs);
    if !violations.is_empty() {
        return Err(NetworkError::Behavior(crate::behavior::BehaviorError::Typing(violations)));
    }
    let empty = Valuation::silent(net.outputs.iter().map(|c| c.name.as_str()), 0);
    let mut frontier: BTreeSet<(GlobalConfig, Valuation)> = BTreeSet::new();
    frontier.insert((engine.initial(), empty));
    let mut budget = Budget::new(opts.budget);
    for i in 1..=horizon {
        let env = input.at_interval(i);
        let mut next = BTreeSet::new();
        for (cfg, mut history) in frontier {
            let delivery = engine.deliver(&cfg, &env, i);
            history.push_interval(&delivery.outputs);
            let branches = engine.node_branches(&cfg, &delivery, opts.policy)?;
            for succ in engine.successors(&branches, &mut budget)? {
                next.insert((succ, history.clone()));
            }
        }
        frontier = next;
    }
    Ok(frontier.into_iter().map(|(_, h)| h).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComposeVerdict {
    Equal {
        inputs: usize,
    },
    Differ {
        input: Valuation,
        /// Produced by the engine but not by the composed denotations.
        engine_only: Option<Valuation>,
        /// Required by the composed denotations but missing from the engine.
        oracle_only: Option<Valuation>,
    },
}

impl ComposeVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, ComposeVerdict::Equal { .. })
    }
}

/// Compares [`denote_network`] against the composition of the node
/// denotations, computed independently: every candidate history of every
/// internal wire is enumerated, and a candidate survives iff each node,
/// fed its wired inputs, can produce exactly the wired outputs.
///
/// Domains for external inputs are keyed by port name; domains for
/// internal wires by the source endpoint (`a.Out`). Internal wires carry
/// at most one message per interval, which is all a node can emit.
pub fn compose_check(
    net: &NetworkDef,
    bounds: &Bounds,
    opts: &SemanticsOptions,
) -> Result<ComposeVerdict, NetworkError> {
    let flat = flatten(net, WiringMode::Lenient)?;
    let engine = Engine::new(&flat)?;
    let k = bounds.horizon;
    let machines: Vec<(&str, &StateMachine)> = flat
        .nodes
        .iter()
        .map(|n| match &n.behavior {
            NodeBehavior::Machine(m) => (n.name.as_str(), m),
            NodeBehavior::Network(_) => unreachable!("flattened"),
        })
        .collect();

    let internal: Vec<&super::def::Wire> = flat
        .wires
        .iter()
        .filter(|w| matches!((&w.source, &w.sink), (Endpoint::Node { .. }, Endpoint::Node { .. })))
        .collect();
    let mut candidates: Vec<Vec<TimedStream>> = Vec::new();
    for w in &internal {
        let key = w.source.to_string();
        let domain = match bounds.domains.get(&key) {
            Some(d) => d.clone(),
            None => node_channel(&flat, &w.source).msg_type.values(),
        };
        candidates.push(enumerate_streams(&domain, k, 1));
    }

    let inputs = enumerate_valuations(&flat.inputs, bounds)?;
    let checked = inputs
        .par_iter()
        .map(|x| -> Result<Option<ComposeVerdict>, NetworkError> {
            let engine_set = denote_flat(&engine, x, k, opts)?;
            let oracle_set = oracle(&flat, &machines, &internal, &candidates, x, k, opts)?;
            if engine_set == oracle_set {
                return Ok(None);
            }
            Ok(Some(ComposeVerdict::Differ {
                input: x.clone(),
                engine_only: engine_set.difference(&oracle_set).next().cloned(),
                oracle_only: oracle_set.difference(&engine_set).next().cloned(),
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(checked
        .into_iter()
        .flatten()
        .next()
        .unwrap_or(ComposeVerdict::Equal { inputs: inputs.len() }))
}

fn node_channel<'a>(net: &'a NetworkDef, e: &Endpoint) -> &'a crate::kernel::ChannelId {
    let Endpoint::Node { instance, port } = e else {
        unreachable!("internal wire")
    };
    let node = net.node(instance).expect("validated");
    node.outputs()
        .iter()
        .chain(node.inputs())
        .find(|c| &c.name == port)
        .expect("validated")
}

fn oracle(
    net: &NetworkDef,
    machines: &[(&str, &StateMachine)],
    internal: &[&super::def::Wire],
    candidates: &[Vec<TimedStream>],
    x: &Valuation,
    k: usize,
    opts: &SemanticsOptions,
) -> Result<BTreeSet<Valuation>, NetworkError> {
    let mut cache: Vec<BTreeMap<Valuation, BTreeSet<Valuation>>> = vec![BTreeMap::new(); machines.len()];
    let mut result = BTreeSet::new();
    let total: usize = candidates.iter().map(Vec::len).product();

    for index in 0..total {
        // Mixed-radix choice of one history per internal wire.
        let mut rest = index;
        let mut chosen: BTreeMap<&Endpoint, &TimedStream> = BTreeMap::new();
        let mut chosen_sink: BTreeMap<&Endpoint, &TimedStream> = BTreeMap::new();
        for (w, cands) in internal.iter().zip(candidates).rev() {
            let s = &cands[rest % cands.len()];
            rest /= cands.len();
            chosen.insert(&w.source, s);
            chosen_sink.insert(&w.sink, s);
        }

        // Per node: external-output projections compatible with the choice.
        let mut per_node: Vec<BTreeSet<BTreeMap<String, TimedStream>>> = Vec::new();
        let mut consistent = true;
        for (ni, (name, m)) in machines.iter().enumerate() {
            let input_streams: BTreeMap<String, TimedStream> = m
                .inputs
                .iter()
                .map(|c| {
                    let sink = Endpoint::node(*name, &c.name);
                    let s = if let Some(s) = chosen_sink.get(&sink) {
                        (*s).clone()
                    } else if let Some(w) = net.wires.iter().find(|w| w.sink == sink) {
                        match &w.source {
                            Endpoint::Env { port } => x.get(port).cloned().unwrap_or_else(|| TimedStream::silent(k)),
                            Endpoint::Node { .. } => unreachable!("internal wires are chosen"),
                        }
                    } else {
                        TimedStream::silent(k)
                    };
                    (c.name.clone(), s)
                })
                .collect();
            let node_in = Valuation::new(k, input_streams).expect("uniform horizon");
            if !cache[ni].contains_key(&node_in) {
                let outs = denote(m, &node_in, k, opts)?;
                cache[ni].insert(node_in.clone(), outs);
            }
            let outs = &cache[ni][&node_in];
            let mut external = BTreeSet::new();
            for o in outs {
                let matches = m.outputs.iter().all(|c| {
                    let src = Endpoint::node(*name, &c.name);
                    chosen.get(&src).is_none_or(|s| o.get(&c.name) == Some(*s))
                });
                if matches {
                    let ext: BTreeMap<String, TimedStream> = net
                        .wires
                        .iter()
                        .filter_map(|w| match (&w.source, &w.sink) {
                            (Endpoint::Node { instance, port }, Endpoint::Env { port: out }) if instance == name => {
                                Some((out.clone(), o.get(port).expect("declared output").clone()))
                            }
                            _ => None,
                        })
                        .collect();
                    external.insert(ext);
                }
            }
            if external.is_empty() {
                consistent = false;
                break;
            }
            per_node.push(external);
        }
        if !consistent {
            continue;
        }

        // Product of the per-node external projections; unwired external
        // outputs stay silent.
        let mut partial: Vec<BTreeMap<String, TimedStream>> = vec![net
            .outputs
            .iter()
            .map(|c| (c.name.clone(), TimedStream::silent(k)))
            .collect()];
        for options in &per_node {
            let mut grown = Vec::with_capacity(partial.len() * options.len());
            for p in &partial {
                for o in options {
                    let mut merged = p.clone();
                    merged.extend(o.iter().map(|(c, s)| (c.clone(), s.clone())));
                    grown.push(merged);
                }
            }
            partial = grown;
        }
        for p in partial {
            result.insert(Valuation::new(k, p).expect("uniform horizon"));
        }
    }
    Ok(result)
}
