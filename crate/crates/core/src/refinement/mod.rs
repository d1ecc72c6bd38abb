//! Bounded refinement checking.
//!
//! Every check enumerates the input histories allowed by its bounds, for
//! horizons `0..=k` in ascending order, and compares output sets. A claim
//! that holds does so only at the stated bounds. A claim that fails comes
//! with the smallest witness at the smallest failing horizon.

mod check;
mod slack;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::behavior::{denote, IdlePolicy, SemanticsOptions, StateMachine};
use crate::kernel::{Bounds, ChannelId, EnumerationError, Valuation};
use crate::model::{Model, ModelError};
use crate::network::{denote_network, NetworkDef, NetworkError, Node};
use crate::speclang::RefinementKind;

pub use check::{check_behavioral, check_inheritance, check_interface, check_structural, Check, TRANSLATOR_DELAY};
pub use slack::within_slack;

/// Anything with a stream semantics: a machine or a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "def", rename_all = "snake_case")]
pub enum Spec {
    Machine(StateMachine),
    Network(NetworkDef),
}

impl Spec {
    pub fn name(&self) -> &str {
        match self {
            Spec::Machine(m) => &m.name,
            Spec::Network(n) => &n.name,
        }
    }

    pub fn inputs(&self) -> &[ChannelId] {
        match self {
            Spec::Machine(m) => &m.inputs,
            Spec::Network(n) => &n.inputs,
        }
    }

    pub fn outputs(&self) -> &[ChannelId] {
        match self {
            Spec::Machine(m) => &m.outputs,
            Spec::Network(n) => &n.outputs,
        }
    }

    pub fn denote(&self, x: &Valuation, k: usize, opts: &SemanticsOptions) -> Result<BTreeSet<Valuation>, NetworkError> {
        match self {
            Spec::Machine(m) => Ok(denote(m, x, k, opts)?),
            Spec::Network(n) => denote_network(n, x, k, opts),
        }
    }

    pub fn as_node(&self, instance: &str) -> Node {
        match self {
            Spec::Machine(m) => Node::machine(instance, m.clone()),
            Spec::Network(n) => Node::network(instance, n.clone()),
        }
    }

    pub fn as_network(&self) -> NetworkDef {
        match self {
            Spec::Machine(m) => NetworkDef::wrapping("main", m.clone()),
            Spec::Network(n) => n.clone(),
        }
    }
}

/// A refinement claim as written in a model document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementClaim {
    pub name: String,
    pub kind: RefinementKind,
    pub abstract_ref: String,
    pub concrete_ref: String,
    pub repr: Option<String>,
    pub abst: Option<String>,
    pub bounds: Bounds,
    pub policy: IdlePolicy,
    pub slack: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub horizon: usize,
    pub input: Valuation,
    pub offending_output: Valuation,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    HoldsAtBounds {
        horizon: usize,
        inputs_checked: usize,
        /// Pipeline delay added by interface translators.
        #[serde(skip_serializing_if = "Option::is_none")]
        delay: Option<usize>,
    },
    Fails(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsAtBounds { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            Verdict::HoldsAtBounds { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefinementError {
    #[error("interfaces do not match: {0}")]
    InterfaceMismatch(String),
    #[error("translator `{translator}` is nondeterministic ({count} outputs for one input)")]
    NondeterministicTranslator { translator: String, count: usize },
    #[error("claim `{claim}`: {message}")]
    BadClaim { claim: String, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Model(#[from] Box<ModelError>),
}

impl From<ModelError> for RefinementError {
    fn from(e: ModelError) -> Self {
        RefinementError::Model(Box::new(e))
    }
}

impl From<crate::behavior::BehaviorError> for RefinementError {
    fn from(e: crate::behavior::BehaviorError) -> Self {
        RefinementError::Network(NetworkError::Behavior(e))
    }
}

impl RefinementClaim {
    /// Resolves the claim's references in `model`.
    pub fn prepare(&self, model: &Model, budget: usize) -> Result<Check, RefinementError> {
        let opts = SemanticsOptions {
            policy: self.policy,
            budget,
        };
        let abstract_spec = model.spec(&self.abstract_ref)?;
        let concrete = model.spec(&self.concrete_ref)?;
        let check = match self.kind {
            RefinementKind::Behavioral => Check::behavioral(abstract_spec, concrete, self.bounds.clone(), opts),
            RefinementKind::Inheritance => Check::inheritance(concrete, abstract_spec, self.bounds.clone(), opts),
            RefinementKind::Structural => {
                let Spec::Network(net) = concrete else {
                    return Err(RefinementError::BadClaim {
                        claim: self.name.clone(),
                        message: format!("concrete side `{}` is not a network", self.concrete_ref),
                    });
                };
                Check::structural(abstract_spec, net, self.bounds.clone(), self.slack, opts)
            }
            RefinementKind::Interface => {
                let missing = |what: &str| RefinementError::BadClaim {
                    claim: self.name.clone(),
                    message: format!("interface refinement needs `{what}`"),
                };
                let repr = model.machine(self.repr.as_deref().ok_or_else(|| missing("repr"))?)?;
                let abst = model.machine(self.abst.as_deref().ok_or_else(|| missing("abst"))?)?;
                Check::interface(abstract_spec, concrete, repr, abst, self.bounds.clone(), opts)
            }
        };
        Ok(check)
    }
}
