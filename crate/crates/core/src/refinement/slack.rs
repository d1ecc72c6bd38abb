use crate::kernel::{TimedStream, Valuation, Value};

/// Whether `concrete` matches `reference` up to `slack` extra intervals of
/// latency, channel by channel.
///
/// For every `j <= k`, the messages of `concrete` through `j` must be a
/// prefix of those of `reference` through `j` (never early), and for every
/// `j <= k - slack`, the messages of `reference` through `j` must be a
/// prefix of those of `concrete` through `j + slack` (at most `slack`
/// late). With `slack = 0` this is timed equality.
pub fn within_slack(concrete: &Valuation, reference: &Valuation, slack: usize) -> bool {
    let k = concrete.horizon();
    if reference.horizon() != k || !concrete.channels().eq(reference.channels()) {
        return false;
    }
    concrete.entries().iter().all(|(c, o)| {
        let a = reference.get(c).expect("same channels");
        let o_prefixes = cumulative(o);
        let a_prefixes = cumulative(a);
        (0..=k).all(|j| is_prefix(&o_prefixes[j], &a_prefixes[j]))
            && (0..=k.saturating_sub(slack))
                .filter(|j| j + slack <= k)
                .all(|j| is_prefix(&a_prefixes[j], &o_prefixes[j + slack]))
    })
}

/// Time abstraction of every prefix, indexed by prefix length.
fn cumulative(s: &TimedStream) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    let mut acc = Vec::new();
    for interval in s.intervals() {
        acc.extend(interval.iter().cloned());
        out.push(acc.clone());
    }
    out
}

fn is_prefix(a: &[Value], b: &[Value]) -> bool {
    a.len() <= b.len() && a == &b[..a.len()]
}
