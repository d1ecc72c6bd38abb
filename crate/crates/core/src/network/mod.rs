//! Networks of components wired by directed, typed channels, and their
//! compositional semantics.
//!
//! Wires transport instantly; the one-interval delay lives in the nodes.
//! A channel has one writer and one reader. Fan-out needs an explicit
//! duplicator node.

mod def;
mod engine;
mod semantics;

use crate::behavior::BehaviorError;
use crate::kernel::EnumerationError;

pub use def::{flatten, Direction, Endpoint, NetworkDef, Node, NodeBehavior, Wire, WiringMode};
pub use engine::{select, Budget, Delivery, Engine, GlobalConfig};
pub use semantics::{compose_check, denote_flat, denote_network, ComposeVerdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("network `{network}`: {message}")]
    Invalid { network: String, message: String },
    #[error("wire `{wire}` connects {source_type} to {sink_type}")]
    TypeMismatch {
        wire: String,
        source_type: String,
        sink_type: String,
    },
    #[error("network hierarchy is cyclic: {}", .0.join(" -> "))]
    CyclicHierarchy(Vec<String>),
    #[error("network `{network}`: port `{instance}.{port}` ({direction:?}) is not wired")]
    DanglingPort {
        network: String,
        instance: String,
        port: String,
        direction: Direction,
    },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}
