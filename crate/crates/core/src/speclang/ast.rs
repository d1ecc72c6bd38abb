//! Abstract syntax of `.fks` model documents.
//!
//! Source positions are carried for diagnostics but never take part in
//! equality: two documents are equal iff their abstract syntax is.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::behavior::IdlePolicy;
use crate::expr::Expr;
use crate::kernel::{DataTypeDef, TypeExpr, Value};
use crate::traces::Party;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl Hash for Pos {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub imports: Vec<String>,
    pub datatypes: Vec<DataTypeDef>,
    pub automata: Vec<AutomatonDecl>,
    pub components: Vec<ComponentDecl>,
    pub networks: Vec<NetworkDecl>,
    pub traces: Vec<TraceDecl>,
    pub trace_exprs: Vec<TraceExprDecl>,
    pub contracts: Vec<ContractDecl>,
    pub refinements: Vec<RefinementDecl>,
}

impl ModelDocument {
    pub fn is_empty(&self) -> bool {
        self == &ModelDocument::default()
    }

    pub fn component(&self, name: &str) -> Option<&ComponentDecl> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn automaton(&self, name: &str) -> Option<&AutomatonDecl> {
        self.automata.iter().find(|a| a.name == name)
    }

    pub fn network(&self, name: &str) -> Option<&NetworkDecl> {
        self.networks.iter().find(|n| n.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub init: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDecl {
    pub name: String,
    pub initial: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternDecl {
    pub channel: String,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionDecl {
    Emit { channel: String, value: Expr },
    Assign { var: String, value: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDecl {
    pub source: String,
    pub target: String,
    pub patterns: Vec<PatternDecl>,
    pub guard: Option<Expr>,
    pub actions: Vec<ActionDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDecl {
    pub name: String,
    pub policy: Option<IdlePolicy>,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub vars: Vec<VarDecl>,
    pub states: Vec<StateDecl>,
    pub transitions: Vec<TransitionDecl>,
    pub pos: Pos,
}

impl AutomatonDecl {
    pub fn input(&self, name: &str) -> Option<&PortDecl> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&PortDecl> {
        self.outputs.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorRef {
    Automaton(String),
    Network(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDecl {
    pub name: String,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub behavior: Option<BehaviorRef>,
    pub pos: Pos,
}

impl ComponentDecl {
    pub fn input(&self, name: &str) -> Option<&PortDecl> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&PortDecl> {
        self.outputs.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDecl {
    pub name: String,
    pub component: String,
    pub pos: Pos,
}

/// A wire endpoint: `port` alone names an external port of the enclosing
/// network, `instance.port` a port of a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndpointRef {
    pub instance: Option<String>,
    pub port: String,
}

impl fmt::Display for EndpointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.instance {
            Some(inst) => write!(f, "{inst}.{}", self.port),
            None => f.write_str(&self.port),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireDecl {
    pub source: EndpointRef,
    pub sink: EndpointRef,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDecl {
    pub name: String,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub nodes: Vec<NodeDecl>,
    pub wires: Vec<WireDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDecl {
    pub sender: Party,
    pub receiver: Party,
    pub channel: String,
    pub message: Value,
    pub interval: usize,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDecl {
    pub name: String,
    pub network: String,
    pub events: Vec<EventDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceExprAst {
    Ref(String),
    Seq(Box<TraceExprAst>, Box<TraceExprAst>),
    Par(Box<TraceExprAst>, Box<TraceExprAst>),
    Iter(Box<TraceExprAst>, usize),
}

impl TraceExprAst {
    pub fn references(&self) -> Vec<&str> {
        match self {
            TraceExprAst::Ref(name) => vec![name],
            TraceExprAst::Seq(a, b) | TraceExprAst::Par(a, b) => {
                let mut out = a.references();
                out.extend(b.references());
                out
            }
            TraceExprAst::Iter(a, _) => a.references(),
        }
    }
}

impl fmt::Display for TraceExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceExprAst::Ref(name) => f.write_str(name),
            TraceExprAst::Seq(a, b) => write!(f, "seq({a}, {b})"),
            TraceExprAst::Par(a, b) => write!(f, "par({a}, {b})"),
            TraceExprAst::Iter(a, n) => write!(f, "iter({a}, {n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceExprDecl {
    pub name: String,
    pub expr: TraceExprAst,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractDecl {
    pub name: String,
    pub trace: String,
    pub assume: Expr,
    pub commit: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementKind {
    Behavioral,
    Interface,
    Structural,
    Inheritance,
}

impl RefinementKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RefinementKind::Behavioral => "behavioral",
            RefinementKind::Interface => "interface",
            RefinementKind::Structural => "structural",
            RefinementKind::Inheritance => "inheritance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementDecl {
    pub name: String,
    pub kind: RefinementKind,
    pub abstract_ref: String,
    pub concrete_ref: String,
    pub repr: Option<String>,
    pub abst: Option<String>,
    pub horizon: usize,
    pub domains: Vec<(String, Vec<Value>)>,
    pub per_interval: Option<usize>,
    pub policy: Option<IdlePolicy>,
    pub slack: Option<usize>,
    pub pos: Pos,
}
