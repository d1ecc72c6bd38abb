use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EventTrace, Party, TraceError};
use crate::expr::{eval, typecheck, Expr, SType};
use crate::kernel::{Type, Value};

/// Names a predicate may refer to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateEnv {
    pub channels: BTreeMap<String, Type>,
    /// Enumeration literal to the name of its type.
    pub literals: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AcVerdict {
    Satisfied,
    /// `position` is the 0-based message position at which the commitment
    /// first fails, or `None` for a predicate that mentions no channel.
    Violated { position: Option<usize> },
    /// The assumption does not hold, so nothing is promised.
    Vacuous,
}

/// Evaluates an assumption over the trace's environment messages and a
/// commitment over all of its messages.
///
/// Predicates are pointwise: a channel name stands for the j-th message on
/// that channel, and the predicate must hold for every j below the
/// shortest referenced channel's message count.
pub fn check_assumption_commitment(
    trace: &EventTrace,
    assume: &Expr,
    commit: &Expr,
    env: &PredicateEnv,
) -> Result<AcVerdict, TraceError> {
    for e in [assume, commit] {
        let lookup = |name: &str| -> Option<SType> {
            env.channels
                .get(name)
                .map(SType::from)
                .or_else(|| env.literals.get(name).map(|t| SType::Enum(t.clone())))
        };
        match typecheck(e, &lookup) {
            Ok(SType::Bool) => {}
            Ok(other) => {
                return Err(TraceError::PredicateTypeError(format!(
                    "`{e}` has type {other}, expected bool"
                )))
            }
            Err(err) => return Err(TraceError::PredicateTypeError(format!("`{e}`: {err}"))),
        }
    }
    if first_failure(trace, assume, env, true)?.is_some() {
        return Ok(AcVerdict::Vacuous);
    }
    Ok(match first_failure(trace, commit, env, false)? {
        None => AcVerdict::Satisfied,
        Some(position) => AcVerdict::Violated { position },
    })
}

/// `Some(position)` for the first binding under which `pred` is false.
fn first_failure(
    trace: &EventTrace,
    pred: &Expr,
    env: &PredicateEnv,
    inputs_only: bool,
) -> Result<Option<Option<usize>>, TraceError> {
    let referenced: BTreeSet<&str> = pred
        .identifiers()
        .into_iter()
        .filter(|n| env.channels.contains_key(*n))
        .collect();
    let mut streams: BTreeMap<&str, Vec<&Value>> = referenced.iter().map(|c| (*c, Vec::new())).collect();
    for e in trace.events() {
        if inputs_only && e.sender != Party::Env {
            continue;
        }
        if let Some(s) = streams.get_mut(e.channel.as_str()) {
            s.push(&e.message);
        }
    }
    let eval_at = |j: Option<usize>| -> Result<bool, TraceError> {
        let lookup = |name: &str| -> Option<Value> {
            match (streams.get(name), j) {
                (Some(s), Some(j)) => Some(s[j].clone()),
                _ => env.literals.contains_key(name).then(|| Value::Enum(name.to_string())),
            }
        };
        match eval(pred, &lookup) {
            Ok(Value::Bool(b)) => Ok(b),
            Ok(v) => Err(TraceError::PredicateTypeError(format!("`{pred}` evaluated to {v}"))),
            Err(err) => Err(TraceError::PredicateTypeError(format!("`{pred}`: {err}"))),
        }
    };
    if referenced.is_empty() {
        return Ok((!eval_at(None)?).then_some(None));
    }
    let n = streams.values().map(Vec::len).min().unwrap_or(0);
    for j in 0..n {
        if !eval_at(Some(j))? {
            return Ok(Some(Some(j)));
        }
    }
    Ok(None)
}
