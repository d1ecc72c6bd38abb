use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stream::{TimedStream, Valuation};
use super::types::{ChannelId, Value};

/// Finite bounds for exhaustive checks over input histories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub horizon: usize,
    /// Candidate messages per channel. Channels without an entry use the
    /// full domain of their type.
    pub domains: BTreeMap<String, Vec<Value>>,
    pub max_per_interval: usize,
}

impl Bounds {
    pub fn new(horizon: usize) -> Self {
        Bounds {
            horizon,
            domains: BTreeMap::new(),
            max_per_interval: 1,
        }
    }

    pub fn with_domain(mut self, channel: impl Into<String>, values: Vec<Value>) -> Self {
        self.domains.insert(channel.into(), values);
        self
    }

    pub fn at_horizon(&self, horizon: usize) -> Self {
        Bounds {
            horizon,
            ..self.clone()
        }
    }

    pub fn domain_for(&self, channel: &ChannelId) -> Vec<Value> {
        self.domains
            .get(&channel.name)
            .cloned()
            .unwrap_or_else(|| channel.msg_type.values())
    }
}

/// Hard ceiling on the number of enumerated valuations.
pub const ENUMERATION_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("enumeration would produce {count} valuations (limit {limit})")]
    TooMany { count: u64, limit: u64 },
    #[error("domain value {value} for channel `{channel}` does not conform to its type")]
    IllTypedDomain { channel: String, value: Value },
}

/// Every message sequence of length `0..=max_len` over `domain`, shortest
/// first, lexicographic within a length.
fn interval_contents(domain: &[Value], max_len: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|prefix| {
                domain.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// All timed streams of the given horizon whose intervals carry at most
/// `max_per_interval` messages drawn from `domain`.
pub fn enumerate_streams(domain: &[Value], horizon: usize, max_per_interval: usize) -> Vec<TimedStream> {
    let contents = interval_contents(domain, max_per_interval);
    let mut streams = vec![Vec::<Vec<Value>>::new()];
    for _ in 0..horizon {
        streams = streams
            .into_iter()
            .flat_map(|prefix| {
                contents.iter().map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    streams.into_iter().map(TimedStream::new).collect()
}

/// All valuations over `channels` within `bounds`, in ascending order.
pub fn enumerate_valuations(channels: &[ChannelId], bounds: &Bounds) -> Result<Vec<Valuation>, EnumerationError> {
    let mut per_channel = Vec::with_capacity(channels.len());
    let mut count: u64 = 1;
    for channel in channels {
        let domain = bounds.domain_for(channel);
        if let Some(bad) = domain.iter().find(|v| !channel.msg_type.conforms(v)) {
            return Err(EnumerationError::IllTypedDomain {
                channel: channel.name.clone(),
                value: bad.clone(),
            });
        }
        let per_interval: u64 = (0..=bounds.max_per_interval as u32)
            .map(|j| (domain.len() as u64).saturating_pow(j))
            .fold(0u64, u64::saturating_add);
        count = count.saturating_mul(per_interval.saturating_pow(bounds.horizon as u32));
        if count > ENUMERATION_LIMIT {
            return Err(EnumerationError::TooMany {
                count,
                limit: ENUMERATION_LIMIT,
            });
        }
        per_channel.push((channel.name.clone(), domain));
    }
    per_channel.sort_by(|a, b| a.0.cmp(&b.0));

    let mut partial: Vec<BTreeMap<String, TimedStream>> = vec![BTreeMap::new()];
    for (name, domain) in &per_channel {
        let streams = enumerate_streams(domain, bounds.horizon, bounds.max_per_interval);
        partial = partial
            .into_iter()
            .flat_map(|entries| {
                streams.iter().map(move |s| {
                    let mut next = entries.clone();
                    next.insert(name.clone(), s.clone());
                    next
                })
            })
            .collect();
    }
    let mut out: Vec<Valuation> = partial
        .into_iter()
        .map(|entries| Valuation::new(bounds.horizon, entries).expect("uniform horizon"))
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Type;

    #[test]
    fn counts_match_closed_form() {
        let ch = ChannelId::new("In", Type::Int { lo: 0, hi: 9 });
        let bounds = Bounds::new(4).with_domain("In", vec![Value::Int(0), Value::Int(1)]);
        // three choices per interval: silent, 0, 1
        assert_eq!(enumerate_valuations(std::slice::from_ref(&ch), &bounds).unwrap().len(), 81);
        let two = Bounds {
            max_per_interval: 2,
            ..bounds.at_horizon(1)
        };
        assert_eq!(enumerate_valuations(&[ch], &two).unwrap().len(), 1 + 2 + 4);
    }

    #[test]
    fn zero_horizon_has_single_valuation() {
        let ch = ChannelId::new("In", Type::Bool);
        let all = enumerate_valuations(&[ch], &Bounds::new(0)).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].horizon(), 0);
    }

    #[test]
    fn ill_typed_domain_rejected() {
        let ch = ChannelId::new("In", Type::Int { lo: 0, hi: 1 });
        let bounds = Bounds::new(1).with_domain("In", vec![Value::Int(5)]);
        assert!(matches!(
            enumerate_valuations(&[ch], &bounds),
            Err(EnumerationError::IllTypedDomain { .. })
        ));
    }

    #[test]
    fn explosion_is_refused() {
        let ch = ChannelId::new("In", Type::Int { lo: 0, hi: 1000 });
        assert!(matches!(
            enumerate_valuations(&[ch], &Bounds::new(5)),
            Err(EnumerationError::TooMany { .. })
        ));
    }
}
