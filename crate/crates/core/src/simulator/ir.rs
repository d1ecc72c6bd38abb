//! A self-contained, versioned transition-table form of a flattened
//! network, and an interpreter for it.
//!
//! The IR is plain JSON (`format: "fks-ir"`, `version: 1`). Guards and
//! action terms are compiled to a small stack bytecode; `and`/`or` use
//! conditional jumps so they short-circuit like the source language.

use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::session::{choose, NodeDelta, SessionDelta, Stimulus};
use super::SimError;
use crate::behavior::{BehaviorError, IdlePolicy, StateMachine};
use crate::consistency::gate;
use crate::expr::{apply_binary, apply_unary, BinOp, EvalError, Expr, UnOp};
use crate::kernel::{Type, Value};
use crate::model::Model;
use crate::network::{flatten, Endpoint, NetworkDef, NodeBehavior, WiringMode};
use crate::traces::{Party, TraceEvent};

pub const IR_FORMAT: &str = "fks-ir";
pub const IR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrModule {
    pub format: String,
    pub version: u32,
    pub network: String,
    pub inputs: Vec<IrPort>,
    pub outputs: Vec<IrPort>,
    /// Sorted by instance path.
    pub nodes: Vec<IrNode>,
    pub wires: Vec<IrWire>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrPort {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrVar {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: Type,
    pub init: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrNode {
    pub instance: String,
    pub machine: String,
    pub policy: Option<IdlePolicy>,
    pub inputs: Vec<IrPort>,
    pub outputs: Vec<IrPort>,
    pub states: Vec<String>,
    pub initial: usize,
    pub vars: Vec<IrVar>,
    /// Outgoing transitions per control state, in declaration order.
    pub table: Vec<Vec<IrTransition>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrTransition {
    /// Position in the machine's declaration order.
    pub index: usize,
    pub target: usize,
    /// Input ports whose buffer heads are read, into slots `0..`.
    pub reads: Vec<usize>,
    pub guard: Vec<Op>,
    pub emits: Vec<(usize, Vec<Op>)>,
    pub updates: Vec<(usize, Vec<Op>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrEndpoint {
    Env { port: usize },
    Node { node: usize, port: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrWire {
    pub source: IrEndpoint,
    pub sink: IrEndpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "arg", rename_all = "snake_case")]
pub enum Op {
    Push(Value),
    Slot(usize),
    Var(usize),
    Field(String),
    Record(Vec<String>),
    Unary(UnOp),
    Binary(BinOp),
    /// Jump to the target if the top is `false`, leaving it; else pop it.
    JumpIfFalseOrPop(usize),
    /// Jump to the target if the top is `true`, leaving it; else pop it.
    JumpIfTrueOrPop(usize),
}

/// Flattens `network` and compiles it, after the full rule set finds no
/// errors.
pub fn compile_model(model: &Model, network: &str) -> Result<IrModule, SimError> {
    let findings = gate(model.corpus());
    if !findings.is_empty() {
        return Err(SimError::Rejected(findings));
    }
    if model.network_decl(network).is_none() {
        return Err(SimError::UnknownNetwork(network.to_string()));
    }
    let flat = flatten(&model.network(network)?, WiringMode::Lenient)?;
    compile_network(&flat)
}

pub fn compile_network(flat: &NetworkDef) -> Result<IrModule, SimError> {
    let ports = |cs: &[crate::kernel::ChannelId]| -> Vec<IrPort> {
        cs.iter()
            .map(|c| IrPort {
                name: c.name.clone(),
                ty: c.msg_type.clone(),
            })
            .collect()
    };
    let mut nodes = Vec::new();
    for n in &flat.nodes {
        let NodeBehavior::Machine(m) = &n.behavior else {
            return Err(SimError::Ir("network is not flat".into()));
        };
        nodes.push(compile_machine(&n.name, m, &ports)?);
    }
    let node_index = |name: &str| flat.nodes.iter().position(|n| n.name == name).expect("validated");
    let endpoint = |e: &Endpoint, source: bool| -> IrEndpoint {
        match e {
            Endpoint::Env { port } => {
                let list = if source { &flat.inputs } else { &flat.outputs };
                IrEndpoint::Env {
                    port: list.iter().position(|c| &c.name == port).expect("validated"),
                }
            }
            Endpoint::Node { instance, port } => {
                let node = node_index(instance);
                let list = if source { &nodes[node].outputs } else { &nodes[node].inputs };
                IrEndpoint::Node {
                    node,
                    port: list.iter().position(|c| &c.name == port).expect("validated"),
                }
            }
        }
    };
    let wires = flat
        .wires
        .iter()
        .map(|w| IrWire {
            source: endpoint(&w.source, true),
            sink: endpoint(&w.sink, false),
        })
        .collect();
    Ok(IrModule {
        format: IR_FORMAT.into(),
        version: IR_VERSION,
        network: flat.name.clone(),
        inputs: ports(&flat.inputs),
        outputs: ports(&flat.outputs),
        nodes,
        wires,
    })
}

fn compile_machine(
    instance: &str,
    m: &StateMachine,
    ports: &dyn Fn(&[crate::kernel::ChannelId]) -> Vec<IrPort>,
) -> Result<IrNode, SimError> {
    let state = |s: &str| m.states.iter().position(|x| x == s).expect("validated");
    let mut table = vec![Vec::new(); m.states.len()];
    for (index, t) in m.transitions.iter().enumerate() {
        let slots: Vec<&str> = t.patterns.iter().map(|p| p.var.as_str()).collect();
        let scope = Scope {
            slots: &slots,
            vars: m,
        };
        let mut ir = IrTransition {
            index,
            target: state(&t.target),
            reads: t
                .patterns
                .iter()
                .map(|p| m.inputs.iter().position(|c| c.name == p.channel).expect("validated"))
                .collect(),
            guard: scope.compile(&t.guard)?,
            emits: Vec::new(),
            updates: Vec::new(),
        };
        for (c, e) in &t.emissions {
            let port = m.outputs.iter().position(|o| &o.name == c).expect("validated");
            ir.emits.push((port, scope.compile(e)?));
        }
        for (v, e) in &t.updates {
            let var = m.variables.iter().position(|x| &x.name == v).expect("validated");
            ir.updates.push((var, scope.compile(e)?));
        }
        table[state(&t.source)].push(ir);
    }
    Ok(IrNode {
        instance: instance.to_string(),
        machine: m.name.clone(),
        policy: m.policy,
        inputs: ports(&m.inputs),
        outputs: ports(&m.outputs),
        states: m.states.clone(),
        initial: state(&m.initial),
        vars: m
            .variables
            .iter()
            .map(|v| IrVar {
                name: v.name.clone(),
                ty: v.ty.clone(),
                init: v.init.clone(),
            })
            .collect(),
        table,
    })
}

struct Scope<'a> {
    slots: &'a [&'a str],
    vars: &'a StateMachine,
}

impl Scope<'_> {
    fn compile(&self, e: &Expr) -> Result<Vec<Op>, SimError> {
        let mut code = Vec::new();
        self.emit(e, &mut code)?;
        Ok(code)
    }

    fn emit(&self, e: &Expr, code: &mut Vec<Op>) -> Result<(), SimError> {
        match e {
            Expr::Int(n) => code.push(Op::Push(Value::Int(*n))),
            Expr::Bool(b) => code.push(Op::Push(Value::Bool(*b))),
            Expr::Ident(name) => {
                if let Some(i) = self.slots.iter().position(|s| s == name) {
                    code.push(Op::Slot(i));
                } else if let Some(i) = self.vars.variables.iter().position(|v| &v.name == name) {
                    code.push(Op::Var(i));
                } else if self.vars.literals.contains(name) {
                    code.push(Op::Push(Value::Enum(name.clone())));
                } else {
                    return Err(SimError::Ir(format!("unbound name `{name}` in `{}`", self.vars.name)));
                }
            }
            Expr::Field(inner, f) => {
                self.emit(inner, code)?;
                code.push(Op::Field(f.clone()));
            }
            Expr::Record(fields) => {
                for (_, fe) in fields {
                    self.emit(fe, code)?;
                }
                code.push(Op::Record(fields.iter().map(|(n, _)| n.clone()).collect()));
            }
            Expr::Unary(op, inner) => {
                self.emit(inner, code)?;
                code.push(Op::Unary(*op));
            }
            Expr::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                self.emit(l, code)?;
                let jump = code.len();
                code.push(Op::JumpIfFalseOrPop(0));
                self.emit(r, code)?;
                let end = code.len();
                code[jump] = if *op == BinOp::And {
                    Op::JumpIfFalseOrPop(end)
                } else {
                    Op::JumpIfTrueOrPop(end)
                };
            }
            Expr::Binary(op, l, r) => {
                self.emit(l, code)?;
                self.emit(r, code)?;
                code.push(Op::Binary(*op));
            }
        }
        Ok(())
    }
}

/// Runs bytecode against pattern slots and a variable store.
pub fn execute(code: &[Op], slots: &[Value], vars: &[Value]) -> Result<Value, EvalError> {
    let mut stack: Vec<Value> = Vec::new();
    let mut pc = 0;
    let pop = |stack: &mut Vec<Value>| stack.pop().expect("balanced bytecode");
    while pc < code.len() {
        match &code[pc] {
            Op::Push(v) => stack.push(v.clone()),
            Op::Slot(i) => stack.push(slots[*i].clone()),
            Op::Var(i) => stack.push(vars[*i].clone()),
            Op::Field(f) => match pop(&mut stack) {
                Value::Record(mut fields) => {
                    stack.push(fields.remove(f).ok_or_else(|| EvalError::NoField(f.clone()))?);
                }
                _ => return Err(EvalError::NoField(f.clone())),
            },
            Op::Record(names) => {
                let values = stack.split_off(stack.len() - names.len());
                stack.push(Value::Record(names.iter().cloned().zip(values).collect()));
            }
            Op::Unary(op) => {
                let v = pop(&mut stack);
                stack.push(apply_unary(*op, v)?);
            }
            Op::Binary(op) => {
                let r = pop(&mut stack);
                let l = pop(&mut stack);
                stack.push(apply_binary(*op, l, r)?);
            }
            Op::JumpIfFalseOrPop(target) | Op::JumpIfTrueOrPop(target) => {
                let stop_on = matches!(code[pc], Op::JumpIfTrueOrPop(_));
                match stack.last() {
                    Some(Value::Bool(b)) if *b == stop_on => {
                        pc = *target;
                        continue;
                    }
                    Some(Value::Bool(_)) => {
                        stack.pop();
                    }
                    other => {
                        return Err(EvalError::Operand {
                            op: if stop_on { "or" } else { "and" }.into(),
                            found: other.map(Value::to_string).unwrap_or_default(),
                        })
                    }
                }
            }
        }
        pc += 1;
    }
    Ok(pop(&mut stack))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct IrConfig {
    control: usize,
    store: Vec<Value>,
    buffers: Vec<VecDeque<Value>>,
}

#[derive(Debug, Clone)]
struct IrBranch {
    transition: Option<usize>,
    config: IrConfig,
    consumed: BTreeMap<String, Value>,
    emitted: Vec<Option<Value>>,
}

/// Executes an [`IrModule`] with the same observable behavior as a
/// [`SimSession`](super::SimSession) on the source network.
#[derive(Debug)]
pub struct IrInterpreter {
    module: IrModule,
    configs: Vec<IrConfig>,
    pending: Vec<Vec<Option<Value>>>,
    interval: usize,
    rng: ChaCha8Rng,
    policy: IdlePolicy,
}

impl IrInterpreter {
    pub fn new(module: IrModule, seed: u64, policy: IdlePolicy) -> Result<Self, SimError> {
        if module.format != IR_FORMAT || module.version != IR_VERSION {
            return Err(SimError::Ir(format!(
                "unsupported IR {} version {}",
                module.format, module.version
            )));
        }
        let configs = module
            .nodes
            .iter()
            .map(|n| IrConfig {
                control: n.initial,
                store: n.vars.iter().map(|v| v.init.clone()).collect(),
                buffers: vec![VecDeque::new(); n.inputs.len()],
            })
            .collect();
        let pending = module.nodes.iter().map(|n| vec![None; n.outputs.len()]).collect();
        Ok(IrInterpreter {
            module,
            configs,
            pending,
            interval: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            policy,
        })
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    fn party(&self, e: &IrEndpoint) -> Party {
        match e {
            IrEndpoint::Env { .. } => Party::Env,
            IrEndpoint::Node { node, .. } => Party::Instance(self.module.nodes[*node].instance.clone()),
        }
    }

    pub fn step(&mut self, stimuli: &[Stimulus], branch: Option<usize>) -> Result<SessionDelta, SimError> {
        let m = &self.module;
        let mut env: Vec<Vec<Value>> = vec![Vec::new(); m.inputs.len()];
        for s in stimuli {
            let port = m
                .inputs
                .iter()
                .position(|p| p.name == s.channel)
                .ok_or_else(|| SimError::UnknownChannel(s.channel.clone()))?;
            if !m.inputs[port].ty.conforms(&s.value) {
                return Err(SimError::TypeError {
                    channel: s.channel.clone(),
                    value: s.value.clone(),
                    expected: m.inputs[port].ty.to_string(),
                });
            }
            env[port].push(s.value.clone());
        }
        let i = self.interval + 1;

        // Deliver.
        let mut arrivals: Vec<Vec<Vec<Value>>> = m.nodes.iter().map(|n| vec![Vec::new(); n.inputs.len()]).collect();
        let mut outputs: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        let mut events = Vec::new();
        for w in &m.wires {
            let (msgs, channel) = match &w.source {
                IrEndpoint::Env { port } => (env[*port].clone(), m.inputs[*port].name.clone()),
                IrEndpoint::Node { node, port } => (
                    self.pending[*node][*port].iter().cloned().collect(),
                    m.nodes[*node].outputs[*port].name.clone(),
                ),
            };
            match &w.sink {
                IrEndpoint::Env { port } => {
                    outputs.insert(m.outputs[*port].name.clone(), msgs.clone());
                }
                IrEndpoint::Node { node, port } => arrivals[*node][*port] = msgs.clone(),
            }
            if matches!((&w.source, &w.sink), (IrEndpoint::Env { .. }, IrEndpoint::Env { .. })) {
                continue;
            }
            for msg in msgs {
                events.push(TraceEvent {
                    sender: self.party(&w.source),
                    receiver: self.party(&w.sink),
                    channel: channel.clone(),
                    message: msg,
                    interval: i,
                });
            }
        }
        for p in &m.outputs {
            outputs.entry(p.name.clone()).or_default();
        }
        events.sort();

        // Step every node.
        let mut all = Vec::with_capacity(m.nodes.len());
        for (ni, node) in m.nodes.iter().enumerate() {
            all.push(step_node(node, &self.configs[ni], &arrivals[ni], self.policy)?);
        }
        let counts: Vec<usize> = all.iter().map(Vec::len).collect();
        let (picks, chosen) = choose(&mut self.rng, &counts, branch)?;

        let mut nodes = Vec::new();
        for (ni, node) in m.nodes.iter().enumerate() {
            let b = &all[ni][picks[ni]];
            nodes.push(NodeDelta {
                instance: node.instance.clone(),
                from: node.states[self.configs[ni].control].clone(),
                to: node.states[b.config.control].clone(),
                transition: b.transition,
                options: counts[ni],
                consumed: b.consumed.clone(),
                emitted: b
                    .emitted
                    .iter()
                    .enumerate()
                    .filter_map(|(p, v)| v.clone().map(|v| (node.outputs[p].name.clone(), v)))
                    .collect(),
            });
        }
        for (ni, b) in picks.iter().enumerate() {
            let b = all[ni][*b].clone();
            self.configs[ni] = b.config;
            self.pending[ni] = b.emitted;
        }
        self.interval = i;
        Ok(SessionDelta {
            interval: i,
            outputs: outputs.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
            nodes,
            events,
            branches: counts.iter().product(),
            chosen,
        })
    }
}

fn step_node(
    node: &IrNode,
    cfg: &IrConfig,
    arrivals: &[Vec<Value>],
    policy: IdlePolicy,
) -> Result<Vec<IrBranch>, BehaviorError> {
    let mut cfg = cfg.clone();
    for (p, msgs) in arrivals.iter().enumerate() {
        cfg.buffers[p].extend(msgs.iter().cloned());
    }
    let machine = || node.machine.clone();
    let mut out = Vec::new();
    for t in &node.table[cfg.control] {
        let Some(slots) = t
            .reads
            .iter()
            .map(|&p| cfg.buffers[p].front().cloned())
            .collect::<Option<Vec<Value>>>()
        else {
            continue;
        };
        let run = |code: &[Op]| {
            execute(code, &slots, &cfg.store).map_err(|error| BehaviorError::Eval {
                machine: machine(),
                transition: t.index,
                error,
            })
        };
        match run(&t.guard)? {
            Value::Bool(true) => {}
            Value::Bool(false) => continue,
            value => {
                return Err(BehaviorError::GuardNotBoolean {
                    machine: machine(),
                    transition: t.index,
                    value,
                })
            }
        }
        let out_of_range = |target: &str, value: Value| BehaviorError::OutOfRange {
            machine: machine(),
            transition: t.index,
            target: target.to_string(),
            value,
        };
        let mut emitted = vec![None; node.outputs.len()];
        for (p, code) in &t.emits {
            let v = run(code)?;
            if !node.outputs[*p].ty.conforms(&v) {
                return Err(out_of_range(&node.outputs[*p].name, v));
            }
            emitted[*p] = Some(v);
        }
        let mut next = cfg.clone();
        for (var, code) in &t.updates {
            let v = run(code)?;
            if !node.vars[*var].ty.conforms(&v) {
                return Err(out_of_range(&node.vars[*var].name, v));
            }
            next.store[*var] = v;
        }
        for &p in &t.reads {
            next.buffers[p].pop_front();
        }
        next.control = t.target;
        out.push(IrBranch {
            transition: Some(t.index),
            config: next,
            consumed: t
                .reads
                .iter()
                .zip(&slots)
                .map(|(&p, v)| (node.inputs[p].name.clone(), v.clone()))
                .collect(),
            emitted,
        });
    }
    let stutter = match node.policy.unwrap_or(policy) {
        IdlePolicy::Idle => true,
        IdlePolicy::Strict if out.is_empty() => {
            let buffered: usize = cfg.buffers.iter().map(VecDeque::len).sum();
            if buffered > 0 {
                return Err(BehaviorError::StuckState {
                    machine: machine(),
                    state: node.states[cfg.control].clone(),
                    buffered,
                });
            }
            true
        }
        IdlePolicy::Strict => false,
    };
    if stutter {
        out.push(IrBranch {
            transition: None,
            consumed: BTreeMap::new(),
            emitted: vec![None; node.outputs.len()],
            config: cfg,
        });
    }
    Ok(out)
}
