//! Interactive, seeded simulation of networks, a compiled transition-table
//! form of the same, and the line-delimited JSON protocol that drives both.

mod ir;
mod protocol;
mod session;

pub use ir::{compile_model, compile_network, execute, IrInterpreter, IrModule, IrNode, IrTransition, Op, IR_FORMAT, IR_VERSION};
pub use protocol::{serve, ErrorBody, Request, Response, SimService};
pub use session::{create_session, NodeDelta, NodeState, SessionDelta, SimSession, Snapshot, Stimulus};

use crate::behavior::BehaviorError;
use crate::consistency::Finding;
use crate::kernel::Value;
use crate::model::ModelError;
use crate::network::NetworkError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("model rejected with {} error finding(s)", .0.len())]
    Rejected(Vec<Finding>),
    #[error("no network named `{0}`")]
    UnknownNetwork(String),
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("session `{0}` is closed")]
    SessionClosed(String),
    #[error("no external input `{0}`")]
    UnknownChannel(String),
    #[error("message {value} on `{channel}` does not conform to {expected}")]
    TypeError {
        channel: String,
        value: Value,
        expected: String,
    },
    #[error("branch {branch} is out of range; {branches} branch(es) available")]
    BranchOutOfRange { branch: usize, branches: usize },
    #[error("{0}")]
    Stuck(String),
    #[error("{0}")]
    Eval(String),
    #[error("invalid IR: {0}")]
    Ir(String),
    #[error(transparent)]
    Model(ModelError),
    #[error(transparent)]
    Network(NetworkError),
}

impl From<BehaviorError> for SimError {
    fn from(e: BehaviorError) -> Self {
        match e {
            BehaviorError::StuckState { .. } => SimError::Stuck(e.to_string()),
            BehaviorError::Eval { .. } | BehaviorError::GuardNotBoolean { .. } | BehaviorError::OutOfRange { .. } => {
                SimError::Eval(e.to_string())
            }
            other => SimError::Network(NetworkError::Behavior(other)),
        }
    }
}

impl From<NetworkError> for SimError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Behavior(b) => b.into(),
            other => SimError::Network(other),
        }
    }
}

impl From<ModelError> for SimError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Network(n) => n.into(),
            other => SimError::Model(other),
        }
    }
}

impl SimError {
    /// Stable protocol error code.
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Rejected(_) => "rejected",
            SimError::UnknownNetwork(_) => "unknown_network",
            SimError::UnknownSession(_) => "unknown_session",
            SimError::SessionClosed(_) => "session_closed",
            SimError::UnknownChannel(_) | SimError::TypeError { .. } => "type_error",
            SimError::BranchOutOfRange { .. } => "branch_out_of_range",
            SimError::Stuck(_) => "stuck",
            SimError::Eval(_) => "eval",
            SimError::Ir(_) | SimError::Model(_) | SimError::Network(_) => "model",
        }
    }
}
