//! Elaboration of parsed documents into semantic objects: machines,
//! networks, traces and refinement claims.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::behavior::{IdlePolicy, MachineError, Pattern, StateMachine, Transition, Variable};
use crate::expr::{eval, Expr};
use crate::kernel::{Bounds, ChannelId, Type, TypeDefError, TypeExpr, TypeShape, TypeTable, Value};
use crate::network::{flatten, Endpoint, NetworkDef, NetworkError, Node, Wire, WiringMode};
use crate::refinement::{RefinementClaim, Spec};
use crate::speclang::{
    load_corpus, ActionDecl, AutomatonDecl, BehaviorRef, ComponentDecl, ContractDecl, Corpus, CorpusError,
    NetworkDecl, PortDecl, RefinementDecl, TraceDecl, TraceExprAst, TraceExprDecl,
};
use crate::traces::{EventTrace, PredicateEnv, TraceError, TraceEvent, TraceExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("no {kind} named `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("`{context}`: {error}")]
    Type { context: String, error: TypeDefError },
    #[error("component `{0}` has no behavior")]
    MissingBehavior(String),
    #[error("`{context}`: {message}")]
    Expression { context: String, message: String },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A corpus together with its resolved datatypes.
#[derive(Debug, Clone)]
pub struct Model {
    corpus: Corpus,
    types: TypeTable,
    literals: BTreeMap<String, String>,
}

impl Model {
    pub fn new(corpus: Corpus) -> Self {
        let types = TypeTable::new(corpus.docs().flat_map(|d| d.datatypes.iter()));
        let mut literals = BTreeMap::new();
        for d in corpus.docs().flat_map(|d| d.datatypes.iter()) {
            if let TypeShape::Enumeration(lits) = &d.shape {
                for l in lits {
                    literals.entry(l.clone()).or_insert_with(|| d.name.clone());
                }
            }
        }
        Model { corpus, types, literals }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Ok(Model::new(load_corpus(path)?))
    }

    pub fn parse(label: &str, text: &str) -> Result<Self, CorpusError> {
        Ok(Model::new(Corpus::parse(label, text)?))
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn types(&self) -> &TypeTable {
        &self.types
    }

    /// Enumeration literal to the name of its type.
    pub fn literals(&self) -> &BTreeMap<String, String> {
        &self.literals
    }

    fn find<'a, T>(&'a self, items: impl Fn(&'a crate::speclang::ModelDocument) -> &'a [T], name: &str, key: impl Fn(&T) -> &str) -> Option<&'a T> {
        self.corpus.docs().flat_map(|d| items(d).iter()).find(|x| key(x) == name)
    }

    pub fn automaton_decl(&self, name: &str) -> Option<&AutomatonDecl> {
        self.find(|d| &d.automata, name, |a| &a.name)
    }

    pub fn component_decl(&self, name: &str) -> Option<&ComponentDecl> {
        self.find(|d| &d.components, name, |c| &c.name)
    }

    pub fn network_decl(&self, name: &str) -> Option<&NetworkDecl> {
        self.find(|d| &d.networks, name, |n| &n.name)
    }

    pub fn trace_decl(&self, name: &str) -> Option<&TraceDecl> {
        self.find(|d| &d.traces, name, |t| &t.name)
    }

    pub fn trace_expr_decl(&self, name: &str) -> Option<&TraceExprDecl> {
        self.find(|d| &d.trace_exprs, name, |t| &t.name)
    }

    pub fn contract_decl(&self, name: &str) -> Option<&ContractDecl> {
        self.find(|d| &d.contracts, name, |c| &c.name)
    }

    pub fn refinement_decl(&self, name: &str) -> Option<&RefinementDecl> {
        self.find(|d| &d.refinements, name, |r| &r.name)
    }

    pub fn automaton_names(&self) -> Vec<&str> {
        self.corpus.docs().flat_map(|d| d.automata.iter().map(|a| a.name.as_str())).collect()
    }

    pub fn network_names(&self) -> Vec<&str> {
        self.corpus.docs().flat_map(|d| d.networks.iter().map(|n| n.name.as_str())).collect()
    }

    pub fn claim_names(&self) -> Vec<&str> {
        self.corpus.docs().flat_map(|d| d.refinements.iter().map(|r| r.name.as_str())).collect()
    }

    pub fn resolve_type(&self, context: &str, ty: &TypeExpr) -> Result<Type, ModelError> {
        self.types.resolve(ty).map_err(|error| ModelError::Type {
            context: context.to_string(),
            error,
        })
    }

    fn channels(&self, context: &str, ports: &[PortDecl]) -> Result<Vec<ChannelId>, ModelError> {
        ports
            .iter()
            .map(|p| Ok(ChannelId::new(&p.name, self.resolve_type(context, &p.ty)?)))
            .collect()
    }

    pub fn machine(&self, name: &str) -> Result<StateMachine, ModelError> {
        let a = self.automaton_decl(name).ok_or_else(|| ModelError::Unknown {
            kind: "automaton",
            name: name.to_string(),
        })?;
        let literal = |n: &str| self.literals.contains_key(n).then(|| Value::Enum(n.to_string()));
        let mut variables = Vec::new();
        for v in &a.vars {
            let context = format!("{name}.{}", v.name);
            let ty = self.resolve_type(&context, &v.ty)?;
            let init = eval(&v.init, &literal).map_err(|e| ModelError::Expression {
                context,
                message: e.to_string(),
            })?;
            variables.push(Variable {
                name: v.name.clone(),
                ty,
                init,
            });
        }
        let transitions = a
            .transitions
            .iter()
            .map(|t| {
                let mut emissions = Vec::new();
                let mut updates = Vec::new();
                for act in &t.actions {
                    match act {
                        ActionDecl::Emit { channel, value } => emissions.push((channel.clone(), value.clone())),
                        ActionDecl::Assign { var, value } => updates.push((var.clone(), value.clone())),
                    }
                }
                Transition {
                    source: t.source.clone(),
                    target: t.target.clone(),
                    patterns: t
                        .patterns
                        .iter()
                        .map(|p| Pattern {
                            channel: p.channel.clone(),
                            var: p.var.clone(),
                        })
                        .collect(),
                    guard: t.guard.clone().unwrap_or(Expr::Bool(true)),
                    emissions,
                    updates,
                }
            })
            .collect();
        let m = StateMachine {
            name: a.name.clone(),
            inputs: self.channels(name, &a.inputs)?,
            outputs: self.channels(name, &a.outputs)?,
            states: a.states.iter().map(|s| s.name.clone()).collect(),
            initial: a
                .states
                .iter()
                .find(|s| s.initial)
                .map(|s| s.name.clone())
                .unwrap_or_default(),
            variables,
            transitions,
            literals: self.literals.keys().cloned().collect(),
            policy: a.policy,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn network(&self, name: &str) -> Result<NetworkDef, ModelError> {
        self.network_in(name, &mut Vec::new())
    }

    fn network_in(&self, name: &str, stack: &mut Vec<String>) -> Result<NetworkDef, ModelError> {
        if stack.iter().any(|s| s == name) {
            let mut cycle = stack.clone();
            cycle.push(name.to_string());
            return Err(NetworkError::CyclicHierarchy(cycle).into());
        }
        let n = self.network_decl(name).ok_or_else(|| ModelError::Unknown {
            kind: "network",
            name: name.to_string(),
        })?;
        stack.push(name.to_string());
        let mut nodes = Vec::new();
        for node in &n.nodes {
            let comp = self.component_decl(&node.component).ok_or_else(|| ModelError::Unknown {
                kind: "component",
                name: node.component.clone(),
            })?;
            let behavior = match &comp.behavior {
                Some(BehaviorRef::Automaton(a)) => Node::machine(&node.name, self.machine(a)?),
                Some(BehaviorRef::Network(child)) => Node::network(&node.name, self.network_in(child, stack)?),
                None => return Err(ModelError::MissingBehavior(comp.name.clone())),
            };
            nodes.push(behavior);
        }
        stack.pop();
        let endpoint = |e: &crate::speclang::EndpointRef| match &e.instance {
            Some(inst) => Endpoint::node(inst, &e.port),
            None => Endpoint::env(&e.port),
        };
        let net = NetworkDef {
            name: n.name.clone(),
            inputs: self.channels(name, &n.inputs)?,
            outputs: self.channels(name, &n.outputs)?,
            nodes,
            wires: n
                .wires
                .iter()
                .map(|w| Wire::new(endpoint(&w.source), endpoint(&w.sink)))
                .collect(),
        };
        net.validate()?;
        Ok(net)
    }

    /// Resolves a name as a component, then an automaton, then a network.
    pub fn spec(&self, name: &str) -> Result<Spec, ModelError> {
        if let Some(c) = self.component_decl(name) {
            return match &c.behavior {
                Some(BehaviorRef::Automaton(a)) => Ok(Spec::Machine(self.machine(a)?)),
                Some(BehaviorRef::Network(n)) => Ok(Spec::Network(self.network(n)?)),
                None => Err(ModelError::MissingBehavior(c.name.clone())),
            };
        }
        if self.automaton_decl(name).is_some() {
            return Ok(Spec::Machine(self.machine(name)?));
        }
        if self.network_decl(name).is_some() {
            return Ok(Spec::Network(self.network(name)?));
        }
        Err(ModelError::Unknown {
            kind: "component, automaton or network",
            name: name.to_string(),
        })
    }

    /// A named trace and the network it is stated against.
    pub fn trace(&self, name: &str) -> Result<(EventTrace, String), ModelError> {
        let t = self.trace_decl(name).ok_or_else(|| ModelError::Unknown {
            kind: "trace",
            name: name.to_string(),
        })?;
        let events = t
            .events
            .iter()
            .map(|e| TraceEvent {
                sender: e.sender.clone(),
                receiver: e.receiver.clone(),
                channel: e.channel.clone(),
                message: e.message.clone(),
                interval: e.interval,
            })
            .collect();
        Ok((EventTrace::new(events)?, t.network.clone()))
    }

    pub fn trace_expr(&self, name: &str) -> Result<TraceExpr, ModelError> {
        self.trace_expr_in(name, &mut BTreeSet::new())
    }

    fn trace_expr_in(&self, name: &str, seen: &mut BTreeSet<String>) -> Result<TraceExpr, ModelError> {
        if self.trace_decl(name).is_some() {
            return Ok(TraceExpr::Leaf(self.trace(name)?.0));
        }
        let decl = self.trace_expr_decl(name).ok_or_else(|| ModelError::Unknown {
            kind: "trace or trace expression",
            name: name.to_string(),
        })?;
        if !seen.insert(name.to_string()) {
            return Err(ModelError::Expression {
                context: name.to_string(),
                message: "trace expression refers to itself".into(),
            });
        }
        let out = self.lower(&decl.expr, seen);
        seen.remove(name);
        out
    }

    fn lower(&self, e: &TraceExprAst, seen: &mut BTreeSet<String>) -> Result<TraceExpr, ModelError> {
        Ok(match e {
            TraceExprAst::Ref(n) => self.trace_expr_in(n, seen)?,
            TraceExprAst::Seq(a, b) => TraceExpr::seq(self.lower(a, seen)?, self.lower(b, seen)?),
            TraceExprAst::Par(a, b) => TraceExpr::par(self.lower(a, seen)?, self.lower(b, seen)?),
            TraceExprAst::Iter(a, n) => TraceExpr::iter(self.lower(a, seen)?, *n),
        })
    }

    /// Channel names usable in predicates over traces of `network`: its
    /// external inputs and every node output, by port name.
    pub fn predicate_env(&self, network: &str) -> Result<PredicateEnv, ModelError> {
        let flat = flatten(&self.network(network)?, WiringMode::Lenient)?;
        let mut channels = BTreeMap::new();
        for c in flat.inputs.iter().chain(flat.nodes.iter().flat_map(|n| n.outputs().iter())) {
            channels.entry(c.name.clone()).or_insert_with(|| c.msg_type.clone());
        }
        Ok(PredicateEnv {
            channels,
            literals: self.literals.clone(),
        })
    }

    pub fn claim(&self, name: &str) -> Result<RefinementClaim, ModelError> {
        let r = self.refinement_decl(name).ok_or_else(|| ModelError::Unknown {
            kind: "refinement",
            name: name.to_string(),
        })?;
        let mut bounds = Bounds::new(r.horizon);
        for (ch, values) in &r.domains {
            bounds = bounds.with_domain(ch, values.clone());
        }
        if let Some(n) = r.per_interval {
            bounds.max_per_interval = n;
        }
        Ok(RefinementClaim {
            name: r.name.clone(),
            kind: r.kind,
            abstract_ref: r.abstract_ref.clone(),
            concrete_ref: r.concrete_ref.clone(),
            repr: r.repr.clone(),
            abst: r.abst.clone(),
            bounds,
            policy: r.policy.unwrap_or(IdlePolicy::Idle),
            slack: r.slack.unwrap_or(0),
        })
    }
}
