use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{EventTrace, TraceError, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceExpr {
    Leaf(EventTrace),
    Seq(Box<TraceExpr>, Box<TraceExpr>),
    Par(Box<TraceExpr>, Box<TraceExpr>),
    Iter(Box<TraceExpr>, usize),
}

impl TraceExpr {
    pub fn leaf(t: EventTrace) -> Self {
        TraceExpr::Leaf(t)
    }

    pub fn seq(a: TraceExpr, b: TraceExpr) -> Self {
        TraceExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: TraceExpr, b: TraceExpr) -> Self {
        TraceExpr::Par(Box::new(a), Box::new(b))
    }

    pub fn iter(a: TraceExpr, n: usize) -> Self {
        TraceExpr::Iter(Box::new(a), n)
    }
}

/// Every trace denoted by `expr` that ends within `horizon` intervals.
///
/// `seq` shifts the second trace past the last interval of the first;
/// `par` interleaves both traces in every way that keeps each operand's
/// order and keeps intervals non-decreasing; `iter(e, n)` is the union
/// of the sequential powers `0..=n`.
pub fn language(expr: &TraceExpr, horizon: usize, budget: usize) -> Result<BTreeSet<EventTrace>, TraceError> {
    let mut counter = Counter { budget, used: 0 };
    lang(expr, horizon, &mut counter)
}

struct Counter {
    budget: usize,
    used: usize,
}

impl Counter {
    fn add(&mut self, set: &BTreeSet<EventTrace>) -> Result<(), TraceError> {
        self.used += set.len();
        if self.used > self.budget {
            return Err(TraceError::ExplosionGuard { budget: self.budget });
        }
        Ok(())
    }
}

fn lang(expr: &TraceExpr, k: usize, counter: &mut Counter) -> Result<BTreeSet<EventTrace>, TraceError> {
    let out = match expr {
        TraceExpr::Leaf(t) => {
            let mut s = BTreeSet::new();
            if t.span() <= k {
                s.insert(t.clone());
            }
            s
        }
        TraceExpr::Seq(a, b) => seq_sets(&lang(a, k, counter)?, &lang(b, k, counter)?, k),
        TraceExpr::Par(a, b) => {
            let la = lang(a, k, counter)?;
            let lb = lang(b, k, counter)?;
            let mut s = BTreeSet::new();
            for ta in &la {
                for tb in &lb {
                    interleave(ta.events(), tb.events(), &mut Vec::new(), &mut s);
                }
            }
            s
        }
        TraceExpr::Iter(a, n) => {
            let base = lang(a, k, counter)?;
            let mut power: BTreeSet<EventTrace> = [EventTrace::empty()].into();
            let mut all = power.clone();
            for _ in 0..*n {
                power = seq_sets(&base, &power, k);
                counter.add(&power)?;
                all.extend(power.iter().cloned());
            }
            all
        }
    };
    counter.add(&out)?;
    Ok(out)
}

fn seq_sets(la: &BTreeSet<EventTrace>, lb: &BTreeSet<EventTrace>, k: usize) -> BTreeSet<EventTrace> {
    let mut s = BTreeSet::new();
    for ta in la {
        let offset = ta.span();
        for tb in lb {
            if tb.span() + if tb.is_empty() { 0 } else { offset } > k {
                continue;
            }
            let mut events = ta.events().to_vec();
            events.extend(tb.events().iter().map(|e| TraceEvent {
                interval: e.interval + offset,
                ..e.clone()
            }));
            s.insert(EventTrace::from_sorted(events));
        }
    }
    s
}

fn interleave(a: &[TraceEvent], b: &[TraceEvent], prefix: &mut Vec<TraceEvent>, out: &mut BTreeSet<EventTrace>) {
    if a.is_empty() || b.is_empty() {
        let mut events = prefix.clone();
        events.extend_from_slice(a);
        events.extend_from_slice(b);
        if events.windows(2).all(|w| w[0].interval <= w[1].interval) {
            out.insert(EventTrace::from_sorted(events));
        }
        return;
    }
    let last = prefix.last().map_or(0, |e| e.interval);
    for (head, rest_a, rest_b) in [(&a[0], &a[1..], b), (&b[0], a, &b[1..])] {
        if head.interval >= last {
            prefix.push(head.clone());
            interleave(rest_a, rest_b, prefix, out);
            prefix.pop();
        }
    }
}
