use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{ChannelId, Type, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("interval index {index} is beyond horizon {horizon}")]
    IndexBeyondHorizon { index: usize, horizon: usize },
    #[error("horizon mismatch: expected {expected}, got {found} on channel `{channel}`")]
    HorizonMismatch {
        channel: String,
        expected: usize,
        found: usize,
    },
}

/// A finite-horizon communication history: one message sequence per time
/// interval. Interval boundaries are the ticks.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimedStream {
    intervals: Vec<Vec<Value>>,
}

impl TimedStream {
    pub fn new(intervals: Vec<Vec<Value>>) -> Self {
        TimedStream { intervals }
    }

    /// A stream of `horizon` empty intervals.
    pub fn silent(horizon: usize) -> Self {
        TimedStream {
            intervals: vec![Vec::new(); horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Vec<Value>] {
        &self.intervals
    }

    /// Messages of the 1-based interval `i`.
    pub fn interval(&self, i: usize) -> Option<&[Value]> {
        i.checked_sub(1)
            .and_then(|idx| self.intervals.get(idx))
            .map(Vec::as_slice)
    }

    pub fn push_interval(&mut self, messages: Vec<Value>) {
        self.intervals.push(messages);
    }

    pub fn message_count(&self) -> usize {
        self.intervals.iter().map(Vec::len).sum()
    }

    /// Forgets the interval structure, keeping message order.
    pub fn time_abstraction(&self) -> Vec<Value> {
        self.intervals.iter().flatten().cloned().collect()
    }

    pub fn prefix_through(&self, i: usize) -> Result<TimedStream, StreamError> {
        if i > self.horizon() {
            return Err(StreamError::IndexBeyondHorizon {
                index: i,
                horizon: self.horizon(),
            });
        }
        Ok(TimedStream {
            intervals: self.intervals[..i].to_vec(),
        })
    }

    /// Interval-wise concatenation: `other`'s intervals follow `self`'s.
    pub fn concat(&self, other: &TimedStream) -> TimedStream {
        let mut intervals = self.intervals.clone();
        intervals.extend(other.intervals.iter().cloned());
        TimedStream { intervals }
    }

    /// Pads with empty intervals up to `horizon`; never truncates.
    pub fn extended_to(&self, horizon: usize) -> TimedStream {
        let mut out = self.clone();
        while out.intervals.len() < horizon {
            out.intervals.push(Vec::new());
        }
        out
    }

    /// Drops the first `n` intervals.
    pub fn shifted_back(&self, n: usize) -> TimedStream {
        TimedStream {
            intervals: self.intervals.iter().skip(n).cloned().collect(),
        }
    }

    /// True if every interval carries at most one message.
    pub fn is_synchronous(&self) -> bool {
        self.intervals.iter().all(|m| m.len() <= 1)
    }
}

impl fmt::Display for TimedStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, messages) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str("[")?;
            for (j, m) in messages.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{m}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// Assignment of one timed stream to every channel of a set, all with the
/// same horizon.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Valuation {
    entries: BTreeMap<String, TimedStream>,
    horizon: usize,
}

impl Valuation {
    pub fn new(horizon: usize, entries: BTreeMap<String, TimedStream>) -> Result<Self, StreamError> {
        for (channel, stream) in &entries {
            if stream.horizon() != horizon {
                return Err(StreamError::HorizonMismatch {
                    channel: channel.clone(),
                    expected: horizon,
                    found: stream.horizon(),
                });
            }
        }
        Ok(Valuation { entries, horizon })
    }

    /// All channels silent for `horizon` intervals.
    pub fn silent<'a>(channels: impl IntoIterator<Item = &'a str>, horizon: usize) -> Self {
        Valuation {
            entries: channels
                .into_iter()
                .map(|c| (c.to_string(), TimedStream::silent(horizon)))
                .collect(),
            horizon,
        }
    }

    pub fn from_streams<S: Into<String>>(
        streams: impl IntoIterator<Item = (S, TimedStream)>,
    ) -> Result<Self, StreamError> {
        let entries: BTreeMap<String, TimedStream> =
            streams.into_iter().map(|(c, s)| (c.into(), s)).collect();
        let horizon = entries.values().next().map_or(0, TimedStream::horizon);
        Valuation::new(horizon, entries)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, channel: &str) -> Option<&TimedStream> {
        self.entries.get(channel)
    }

    pub fn channels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, TimedStream> {
        &self.entries
    }

    pub fn is_silent(&self) -> bool {
        self.entries.values().all(|s| s.message_count() == 0)
    }

    /// Messages on every channel in 1-based interval `i`.
    pub fn at_interval(&self, i: usize) -> BTreeMap<String, Vec<Value>> {
        self.entries
            .iter()
            .map(|(c, s)| (c.clone(), s.interval(i).map(<[Value]>::to_vec).unwrap_or_default()))
            .collect()
    }

    pub fn prefix_through(&self, i: usize) -> Result<Valuation, StreamError> {
        if i > self.horizon {
            return Err(StreamError::IndexBeyondHorizon {
                index: i,
                horizon: self.horizon,
            });
        }
        let entries = self
            .entries
            .iter()
            .map(|(c, s)| Ok((c.clone(), s.prefix_through(i)?)))
            .collect::<Result<_, StreamError>>()?;
        Ok(Valuation { entries, horizon: i })
    }

    pub fn extended_to(&self, horizon: usize) -> Valuation {
        let horizon = horizon.max(self.horizon);
        Valuation {
            entries: self
                .entries
                .iter()
                .map(|(c, s)| (c.clone(), s.extended_to(horizon)))
                .collect(),
            horizon,
        }
    }

    pub fn shifted_back(&self, n: usize) -> Valuation {
        let n = n.min(self.horizon);
        Valuation {
            entries: self
                .entries
                .iter()
                .map(|(c, s)| (c.clone(), s.shifted_back(n)))
                .collect(),
            horizon: self.horizon - n,
        }
    }

    /// Restriction to the named channels; channels not present are skipped.
    pub fn project<'a>(&self, channels: impl IntoIterator<Item = &'a str>) -> Valuation {
        let entries = channels
            .into_iter()
            .filter_map(|c| self.entries.get(c).map(|s| (c.to_string(), s.clone())))
            .collect();
        Valuation {
            entries,
            horizon: self.horizon,
        }
    }

    /// Renames channels according to `map`; unmapped channels keep their name.
    pub fn renamed(&self, map: &BTreeMap<String, String>) -> Valuation {
        Valuation {
            entries: self
                .entries
                .iter()
                .map(|(c, s)| (map.get(c).cloned().unwrap_or_else(|| c.clone()), s.clone()))
                .collect(),
            horizon: self.horizon,
        }
    }

    /// Adds silent streams for `channels` not yet present.
    pub fn with_silent<'a>(&self, channels: impl IntoIterator<Item = &'a str>) -> Valuation {
        let mut out = self.clone();
        for c in channels {
            out.entries
                .entry(c.to_string())
                .or_insert_with(|| TimedStream::silent(self.horizon));
        }
        out
    }

    /// Appends one interval to every channel. Channels missing from
    /// `messages` receive an empty interval; unknown channels are ignored.
    pub fn push_interval(&mut self, messages: &BTreeMap<String, Vec<Value>>) {
        for (channel, stream) in self.entries.iter_mut() {
            stream.push_interval(messages.get(channel).cloned().unwrap_or_default());
        }
        self.horizon += 1;
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (c, s)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c}: {s}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypingViolation {
    MissingChannel { channel: String },
    UndeclaredChannel { channel: String },
    IllTyped {
        channel: String,
        /// 1-based interval.
        interval: usize,
        /// 0-based position within the interval.
        position: usize,
        expected: String,
    },
}

impl fmt::Display for TypingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypingViolation::MissingChannel { channel } => write!(f, "missing channel {channel}"),
            TypingViolation::UndeclaredChannel { channel } => {
                write!(f, "undeclared channel {channel}")
            }
            TypingViolation::IllTyped {
                channel,
                interval,
                position,
                expected,
            } => write!(
                f,
                "message on {channel} at interval {interval}, position {position} is not of type {expected}"
            ),
        }
    }
}

/// Checks that `valuation` covers exactly `decl` and every message conforms
/// to its channel type. An empty result means the valuation is well typed.
pub fn validate_typing(valuation: &Valuation, decl: &[ChannelId]) -> Vec<TypingViolation> {
    let mut violations = Vec::new();
    let declared: BTreeMap<&str, &Type> =
        decl.iter().map(|c| (c.name.as_str(), &c.msg_type)).collect();
    for (name, ty) in &declared {
        let Some(stream) = valuation.get(name) else {
            violations.push(TypingViolation::MissingChannel {
                channel: name.to_string(),
            });
            continue;
        };
        for (i, messages) in stream.intervals().iter().enumerate() {
            for (pos, msg) in messages.iter().enumerate() {
                if !ty.conforms(msg) {
                    violations.push(TypingViolation::IllTyped {
                        channel: name.to_string(),
                        interval: i + 1,
                        position: pos,
                        expected: ty.to_string(),
                    });
                }
            }
        }
    }
    for channel in valuation.channels() {
        if !declared.contains_key(channel) {
            violations.push(TypingViolation::UndeclaredChannel {
                channel: channel.to_string(),
            });
        }
    }
    violations
}
