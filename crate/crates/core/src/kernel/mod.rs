//! Messages, channels, timed streams and channel valuations.
//!
//! Every semantic judgment in the toolkit is made over finite horizons:
//! a [`TimedStream`] of horizon `k` is the first `k` intervals of a
//! communication history.

mod enumerate;
mod stream;
mod types;

pub use enumerate::{enumerate_streams, enumerate_valuations, Bounds, EnumerationError};
pub use stream::{validate_typing, StreamError, TimedStream, TypingViolation, Valuation};
pub use types::{ChannelId, DataTypeDef, Type, TypeDefError, TypeExpr, TypeShape, TypeTable, Value};
