//! Event traces: exemplary runs as timed send/receive events, their
//! composition operators, membership against network semantics, and
//! pointwise assumption/commitment monitors.
//!
//! An event's channel is the port name at its sending end. For messages
//! from the environment that is the external input name.

mod contract;
mod language;
mod membership;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behavior::BehaviorError;
use crate::kernel::Value;
use crate::network::NetworkError;

pub use contract::{check_assumption_commitment, AcVerdict, PredicateEnv};
pub use language::{language, TraceExpr};
pub use membership::{generate_traces, membership, Divergence, MembershipVerdict};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Env,
    /// Instance path in the flattened network, e.g. `w/sq`.
    Instance(String),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Env => f.write_str("env"),
            Party::Instance(path) => f.write_str(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceEvent {
    pub sender: Party,
    pub receiver: Party,
    pub channel: String,
    pub message: Value,
    /// 1-based interval in which the message arrives.
    pub interval: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} : {}!{} @{}",
            self.sender, self.receiver, self.channel, self.message, self.interval
        )
    }
}

/// Events in order of non-decreasing interval.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventTrace {
    events: Vec<TraceEvent>,
}

impl EventTrace {
    pub fn new(events: Vec<TraceEvent>) -> Result<Self, TraceError> {
        if let Some(pos) = events.windows(2).position(|w| w[1].interval < w[0].interval) {
            return Err(TraceError::Unordered { index: pos + 1 });
        }
        if let Some(pos) = events.iter().position(|e| e.interval == 0) {
            return Err(TraceError::Unordered { index: pos });
        }
        Ok(EventTrace { events })
    }

    pub fn empty() -> Self {
        EventTrace::default()
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Interval of the last event, 0 for the empty trace.
    pub fn span(&self) -> usize {
        self.events.last().map_or(0, |e| e.interval)
    }

    /// The same trace with every event ordered canonically within its
    /// interval.
    pub fn normalized(&self) -> EventTrace {
        let mut events = self.events.clone();
        events.sort_by(|a, b| a.interval.cmp(&b.interval).then_with(|| a.cmp(b)));
        EventTrace { events }
    }

    pub(crate) fn from_sorted(events: Vec<TraceEvent>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].interval <= w[1].interval));
        EventTrace { events }
    }
}

impl fmt::Display for EventTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("event {index} has a smaller or zero interval than the event before it")]
    Unordered { index: usize },
    #[error("trace language exceeded the budget of {budget} traces")]
    ExplosionGuard { budget: usize },
    #[error("environment event on `{0}`, which is not an external input")]
    UnknownInput(String),
    #[error("predicate: {0}")]
    PredicateTypeError(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl From<BehaviorError> for TraceError {
    fn from(e: BehaviorError) -> Self {
        TraceError::Network(NetworkError::Behavior(e))
    }
}
