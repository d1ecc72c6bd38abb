//! State machines and their stream semantics.
//!
//! A machine fires at most one transition per interval, and whatever it
//! emits becomes visible in the next interval. That delay is what makes
//! every denotation time-guarded by construction.

mod guarded;
mod machine;
mod step;

use crate::expr::EvalError;
use crate::kernel::{EnumerationError, TypingViolation, Value};

pub use guarded::{check_time_guardedness, check_time_guardedness_with, GuardednessVerdict, Sampler};
pub use machine::{IdlePolicy, MachineConfig, MachineError, Pattern, StateMachine, Transition, Variable};
pub use step::{denote, step, Branch, SemanticsOptions, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BehaviorError {
    #[error("message {value} on `{channel}` does not conform to {expected}")]
    TypeError {
        channel: String,
        value: Value,
        expected: String,
    },
    #[error("`{machine}` has no input channel `{channel}`")]
    UnknownChannel { machine: String, channel: String },
    #[error("`{machine}` is stuck in `{state}` with {buffered} buffered message(s) and nothing enabled")]
    StuckState {
        machine: String,
        state: String,
        buffered: usize,
    },
    #[error("`{machine}` transition {}: {error}", .transition + 1)]
    Eval {
        machine: String,
        transition: usize,
        error: EvalError,
    },
    #[error("`{machine}` transition {}: guard evaluated to {value}", .transition + 1)]
    GuardNotBoolean {
        machine: String,
        transition: usize,
        value: Value,
    },
    #[error("`{machine}` transition {}: value {value} for `{target}` is out of range", .transition + 1)]
    OutOfRange {
        machine: String,
        transition: usize,
        target: String,
        value: Value,
    },
    #[error("run tree exceeded the budget of {budget} nodes ({count} reached)")]
    ExplosionGuard { budget: usize, count: usize },
    #[error("input horizon {found} differs from the requested horizon {expected}")]
    HorizonMismatch { expected: usize, found: usize },
    #[error("ill-typed input: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Typing(Vec<TypingViolation>),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}
