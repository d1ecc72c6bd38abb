use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EventTrace, Party, TraceError, TraceEvent};
use crate::behavior::SemanticsOptions;
use crate::kernel::{Valuation, Value};
use crate::network::{flatten, Budget, Engine, GlobalConfig, NetworkDef, WiringMode};

/// Where a trace first departs from every run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// 0-based index of the first trace event no run reproduces; `None` when
    /// every event matched but a run produced something extra.
    pub index: Option<usize>,
    pub interval: usize,
    pub expected: Option<TraceEvent>,
    /// An event the closest run produced instead, if any.
    pub unexpected: Option<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipVerdict {
    Member,
    NonMember(Box<Divergence>),
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member)
    }
}

/// Whether some run of `net` over `horizon` intervals, with the trace's
/// environment messages as external input, delivers exactly the trace's
/// events at the stated intervals.
pub fn membership(
    trace: &EventTrace,
    net: &NetworkDef,
    horizon: usize,
    opts: &SemanticsOptions,
) -> Result<MembershipVerdict, TraceError> {
    let engine = Engine::new(&flatten(net, WiringMode::Lenient)?)?;
    membership_flat(trace, &engine, horizon, opts)
}

pub(crate) fn membership_flat(
    trace: &EventTrace,
    engine: &Engine,
    horizon: usize,
    opts: &SemanticsOptions,
) -> Result<MembershipVerdict, TraceError> {
    let events = trace.events();
    if let Some(index) = events.iter().position(|e| e.interval > horizon) {
        return Ok(MembershipVerdict::NonMember(Box::new(Divergence {
            index: Some(index),
            interval: events[index].interval,
            expected: Some(events[index].clone()),
            unexpected: None,
        })));
    }
    let mut env: Vec<BTreeMap<String, Vec<Value>>> = vec![BTreeMap::new(); horizon + 1];
    for e in events.iter().filter(|e| e.sender == Party::Env) {
        if engine.network().input(&e.channel).is_none() {
            return Err(TraceError::UnknownInput(e.channel.clone()));
        }
        env[e.interval].entry(e.channel.clone()).or_default().push(e.message.clone());
    }

    let mut frontier: BTreeSet<GlobalConfig> = [engine.initial()].into();
    let mut budget = Budget::new(opts.budget);
    for (i, arrivals) in env.iter().enumerate().skip(1) {
        let expected: Vec<(usize, &TraceEvent)> = events.iter().enumerate().filter(|(_, e)| e.interval == i).collect();
        let mut wanted: Vec<&TraceEvent> = expected.iter().map(|(_, e)| *e).collect();
        wanted.sort();
        let mut next = BTreeSet::new();
        let mut best: Option<(usize, Divergence)> = None;
        for cfg in &frontier {
            let delivery = engine.deliver(cfg, arrivals, i);
            let produced: Vec<&TraceEvent> = delivery.events.iter().collect();
            if produced == wanted {
                let branches = engine.node_branches(cfg, &delivery, opts.policy)?;
                next.extend(engine.successors(&branches, &mut budget)?);
                continue;
            }
            let (score, d) = divergence(events, &expected, &delivery.events, i);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, d));
            }
        }
        if next.is_empty() {
            let (_, d) = best.expect("non-empty frontier with no survivor has a divergence");
            return Ok(MembershipVerdict::NonMember(Box::new(d)));
        }
        frontier = next;
    }
    Ok(MembershipVerdict::Member)
}

fn divergence(
    all: &[TraceEvent],
    expected: &[(usize, &TraceEvent)],
    produced: &[TraceEvent],
    interval: usize,
) -> (usize, Divergence) {
    let mut left: Vec<&TraceEvent> = produced.iter().collect();
    for (index, e) in expected {
        match left.iter().position(|p| p == e) {
            Some(p) => {
                left.remove(p);
            }
            None => {
                return (
                    *index,
                    Divergence {
                        index: Some(*index),
                        interval,
                        expected: Some((*e).clone()),
                        unexpected: left.first().map(|e| (*e).clone()),
                    },
                )
            }
        }
    }
    let after = all.iter().position(|e| e.interval > interval);
    (
        after.unwrap_or(all.len()),
        Divergence {
            index: None,
            interval,
            expected: None,
            unexpected: left.first().map(|e| (*e).clone()),
        },
    )
}

/// Up to `limit` distinct event traces of runs of `net` on `input`, in
/// ascending order.
pub fn generate_traces(
    net: &NetworkDef,
    input: &Valuation,
    horizon: usize,
    limit: usize,
    opts: &SemanticsOptions,
) -> Result<Vec<EventTrace>, TraceError> {
    if limit == 0 {
        return Ok(Vec::new());
    }
    let engine = Engine::new(&flatten(net, WiringMode::Lenient)?)?;
    if input.horizon() != horizon {
        return Err(crate::behavior::BehaviorError::HorizonMismatch {
            expected: horizon,
            found: input.horizon(),
        }
        .into());
    }
    let mut frontier: BTreeSet<(GlobalConfig, Vec<TraceEvent>)> = [(engine.initial(), Vec::new())].into();
    let mut budget = Budget::new(opts.budget);
    for i in 1..=horizon {
        let env = input.at_interval(i);
        let mut next = BTreeSet::new();
        for (cfg, events) in frontier {
            let delivery = engine.deliver(&cfg, &env, i);
            let mut events = events;
            events.extend(delivery.events.iter().cloned());
            let branches = engine.node_branches(&cfg, &delivery, opts.policy)?;
            for succ in engine.successors(&branches, &mut budget)? {
                next.insert((succ, events.clone()));
            }
        }
        frontier = next;
    }
    let traces: BTreeSet<EventTrace> = frontier.into_iter().map(|(_, e)| EventTrace::from_sorted(e)).collect();
    Ok(traces.into_iter().take(limit).collect())
}
