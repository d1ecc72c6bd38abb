use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::machine::{IdlePolicy, MachineConfig, StateMachine};
use super::BehaviorError;
use crate::expr::eval;
use crate::kernel::{validate_typing, Valuation, Value};

/// One possible successor of a machine configuration within an interval.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branch {
    /// Index of the fired transition; `None` for a stutter step.
    pub transition: Option<usize>,
    pub config: MachineConfig,
    /// Messages consumed from the buffer heads.
    pub consumed: BTreeMap<String, Value>,
    /// Messages produced; they appear in the following interval.
    pub emissions: BTreeMap<String, Value>,
}

/// Appends `arrivals` to the buffers and returns every successor:
/// one per enabled transition in declaration order, then the stutter
/// step when the policy permits it.
pub fn step(
    machine: &StateMachine,
    config: &MachineConfig,
    arrivals: &BTreeMap<String, Vec<Value>>,
    policy: IdlePolicy,
) -> Result<Vec<Branch>, BehaviorError> {
    let mut cfg = config.clone();
    for (channel, messages) in arrivals {
        let Some(decl) = machine.input(channel) else {
            return Err(BehaviorError::UnknownChannel {
                machine: machine.name.clone(),
                channel: channel.clone(),
            });
        };
        for m in messages {
            if !decl.msg_type.conforms(m) {
                return Err(BehaviorError::TypeError {
                    channel: channel.clone(),
                    value: m.clone(),
                    expected: decl.msg_type.to_string(),
                });
            }
        }
        cfg.buffers
            .entry(channel.clone())
            .or_default()
            .extend(messages.iter().cloned());
    }

    let mut branches = Vec::new();
    for (index, t) in machine.transitions.iter().enumerate() {
        if t.source != cfg.control {
            continue;
        }
        let mut bindings = BTreeMap::new();
        let mut consumed = BTreeMap::new();
        let heads_present = t.patterns.iter().all(|p| {
            match cfg.buffers.get(&p.channel).and_then(|b| b.front()) {
                Some(head) => {
                    bindings.insert(p.var.as_str(), head.clone());
                    consumed.insert(p.channel.clone(), head.clone());
                    true
                }
                None => false,
            }
        });
        if !heads_present {
            continue;
        }
        let lookup = |name: &str| -> Option<Value> {
            bindings
                .get(name)
                .or_else(|| cfg.store.get(name))
                .cloned()
                .or_else(|| machine.literals.contains(name).then(|| Value::Enum(name.to_string())))
        };
        let eval_err = |error| BehaviorError::Eval {
            machine: machine.name.clone(),
            transition: index,
            error,
        };
        match eval(&t.guard, &lookup).map_err(eval_err)? {
            Value::Bool(true) => {}
            Value::Bool(false) => continue,
            other => {
                return Err(BehaviorError::GuardNotBoolean {
                    machine: machine.name.clone(),
                    transition: index,
                    value: other,
                })
            }
        }
        let mut emissions = BTreeMap::new();
        for (channel, e) in &t.emissions {
            let value = eval(e, &lookup).map_err(eval_err)?;
            let ty = &machine.output(channel).expect("validated output").msg_type;
            if !ty.conforms(&value) {
                return Err(BehaviorError::OutOfRange {
                    machine: machine.name.clone(),
                    transition: index,
                    target: channel.clone(),
                    value,
                });
            }
            emissions.insert(channel.clone(), value);
        }
        let mut next = cfg.clone();
        for (var, e) in &t.updates {
            let value = eval(e, &lookup).map_err(eval_err)?;
            let ty = &machine.variable(var).expect("validated variable").ty;
            if !ty.conforms(&value) {
                return Err(BehaviorError::OutOfRange {
                    machine: machine.name.clone(),
                    transition: index,
                    target: var.clone(),
                    value,
                });
            }
            next.store.insert(var.clone(), value);
        }
        for p in &t.patterns {
            if let Some(buf) = next.buffers.get_mut(&p.channel) {
                buf.pop_front();
            }
        }
        next.control = t.target.clone();
        branches.push(Branch {
            transition: Some(index),
            config: next,
            consumed,
            emissions,
        });
    }

    let stutter = match machine.effective_policy(policy) {
        IdlePolicy::Idle => true,
        IdlePolicy::Strict if branches.is_empty() => {
            if cfg.buffered() > 0 {
                return Err(BehaviorError::StuckState {
                    machine: machine.name.clone(),
                    state: cfg.control.clone(),
                    buffered: cfg.buffered(),
                });
            }
            true
        }
        IdlePolicy::Strict => false,
    };
    if stutter {
        branches.push(Branch {
            transition: None,
            config: cfg,
            consumed: BTreeMap::new(),
            emissions: BTreeMap::new(),
        });
    }
    Ok(branches)
}

/// Run-tree node budget used when none is given.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticsOptions {
    pub policy: IdlePolicy,
    pub budget: usize,
}

impl Default for SemanticsOptions {
    fn default() -> Self {
        SemanticsOptions {
            policy: IdlePolicy::Idle,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl SemanticsOptions {
    pub fn strict() -> Self {
        SemanticsOptions {
            policy: IdlePolicy::Strict,
            ..Self::default()
        }
    }

    pub fn with_policy(self, policy: IdlePolicy) -> Self {
        SemanticsOptions { policy, ..self }
    }
}

/// The set of output histories of every `horizon`-interval run of `machine`
/// on `input`. Emissions of interval `i` appear in interval `i + 1`.
pub fn denote(
    machine: &StateMachine,
    input: &Valuation,
    horizon: usize,
    opts: &SemanticsOptions,
) -> Result<BTreeSet<Valuation>, BehaviorError> {
    if input.horizon() != horizon {
        return Err(BehaviorError::HorizonMismatch {
            expected: horizon,
            found: input.horizon(),
        });
    }
    let violations = validate_typing(input, &machine.inputs);
    if !violations.is_empty() {
        return Err(BehaviorError::Typing(violations));
    }

    type Node = (MachineConfig, BTreeMap<String, Value>, Valuation);
    let empty_out = Valuation::silent(machine.output_names(), 0);
    let mut frontier: BTreeSet<Node> = BTreeSet::new();
    frontier.insert((machine.initial_config(), BTreeMap::new(), empty_out));
    let mut nodes = 1usize;

    for i in 1..=horizon {
        let arrivals = input.at_interval(i);
        let mut next = BTreeSet::new();
        for (cfg, pending, history) in frontier {
            let mut history = history;
            let delivered = pending
                .into_iter()
                .map(|(c, v)| (c, vec![v]))
                .collect::<BTreeMap<_, _>>();
            history.push_interval(&delivered);
            for b in step(machine, &cfg, &arrivals, opts.policy)? {
                nodes += 1;
                if nodes > opts.budget {
                    return Err(BehaviorError::ExplosionGuard {
                        budget: opts.budget,
                        count: nodes,
                    });
                }
                next.insert((b.config, b.emissions, history.clone()));
            }
        }
        frontier = next;
    }
    Ok(frontier.into_iter().map(|(_, _, h)| h).collect())
}
