use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::kernel::{ChannelId, Type, Value};

/// What a machine may do in an interval where it fires no transition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdlePolicy {
    /// A stutter step is always possible.
    #[default]
    Idle,
    /// Stuttering only when nothing is enabled and all buffers are empty;
    /// pending input with nothing enabled is a [`StuckState`](super::BehaviorError::StuckState).
    Strict,
}

impl fmt::Display for IdlePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdlePolicy::Idle => "idle",
            IdlePolicy::Strict => "strict",
        })
    }
}

impl std::str::FromStr for IdlePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "idle" => Ok(IdlePolicy::Idle),
            "strict" => Ok(IdlePolicy::Strict),
            other => Err(format!("unknown policy `{other}` (expected idle or strict)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub channel: String,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub patterns: Vec<Pattern>,
    pub guard: Expr,
    pub emissions: Vec<(String, Expr)>,
    pub updates: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub ty: Type,
    pub init: Value,
}

/// A state transition diagram with typed local variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMachine {
    pub name: String,
    pub inputs: Vec<ChannelId>,
    pub outputs: Vec<ChannelId>,
    pub states: Vec<String>,
    pub initial: String,
    pub variables: Vec<Variable>,
    pub transitions: Vec<Transition>,
    /// Enumeration literals usable in expressions.
    pub literals: BTreeSet<String>,
    /// Overrides the caller's policy when set.
    pub policy: Option<IdlePolicy>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("machine `{machine}`: {message}")]
    Invalid { machine: String, message: String },
}

impl StateMachine {
    /// Checks the structural invariants: the initial state and every
    /// transition endpoint are declared, patterns read inputs, emissions
    /// write outputs, each at most once per transition, and variable
    /// initial values conform to their types.
    pub fn validate(&self) -> Result<(), MachineError> {
        let fail = |message: String| {
            Err(MachineError::Invalid {
                machine: self.name.clone(),
                message,
            })
        };
        if self.states.is_empty() {
            return fail("no control states".into());
        }
        if !self.states.contains(&self.initial) {
            return fail(format!("initial state `{}` is not declared", self.initial));
        }
        for v in &self.variables {
            if !v.ty.conforms(&v.init) {
                return fail(format!("variable `{}` starts outside its type {}", v.name, v.ty));
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            for s in [&t.source, &t.target] {
                if !self.states.contains(s) {
                    return fail(format!("transition {} uses undeclared state `{s}`", i + 1));
                }
            }
            let mut read = BTreeSet::new();
            for p in &t.patterns {
                if self.input(&p.channel).is_none() {
                    return fail(format!("transition {} reads non-input `{}`", i + 1, p.channel));
                }
                if !read.insert(&p.channel) {
                    return fail(format!("transition {} reads `{}` twice", i + 1, p.channel));
                }
            }
            let mut written = BTreeSet::new();
            for (c, _) in &t.emissions {
                if self.output(c).is_none() {
                    return fail(format!("transition {} writes non-output `{c}`", i + 1));
                }
                if !written.insert(c) {
                    return fail(format!("transition {} writes `{c}` twice", i + 1));
                }
            }
            for (v, _) in &t.updates {
                if self.variable(v).is_none() {
                    return fail(format!("transition {} assigns unknown variable `{v}`", i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn input(&self, name: &str) -> Option<&ChannelId> {
        self.inputs.iter().find(|c| c.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&ChannelId> {
        self.outputs.iter().find(|c| c.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|c| c.name.as_str())
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|c| c.name.as_str())
    }

    pub fn initial_config(&self) -> MachineConfig {
        MachineConfig {
            control: self.initial.clone(),
            store: self
                .variables
                .iter()
                .map(|v| (v.name.clone(), v.init.clone()))
                .collect(),
            buffers: self
                .inputs
                .iter()
                .map(|c| (c.name.clone(), VecDeque::new()))
                .collect(),
        }
    }

    pub fn effective_policy(&self, requested: IdlePolicy) -> IdlePolicy {
        self.policy.unwrap_or(requested)
    }
}

/// A snapshot of one machine between intervals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub control: String,
    pub store: BTreeMap<String, Value>,
    /// Pending input per channel, oldest first.
    pub buffers: BTreeMap<String, VecDeque<Value>>,
}

impl MachineConfig {
    pub fn buffered(&self) -> usize {
        self.buffers.values().map(VecDeque::len).sum()
    }
}
