//! Cross-view consistency rules over a corpus of model documents.
//!
//! The rules are syntactic: they compare declarations across views and
//! never run a model. Cross-view mismatches are errors. Incompleteness
//! (missing behaviors, open ports, unused datatypes) is a warning, which
//! never blocks anything.
//!
//! | code     | severity | views | checks |
//! |----------|----------|-------|--------|
//! | C-IF-01  | error    | automaton, component | transition channels belong to the owning component's interface, with equal types |
//! | C-IF-02  | error    | component, network | behavior references and node components resolve |
//! | C-HY-01  | error    | component, network | a network behind a component exposes exactly the component's ports |
//! | C-TY-01  | error    | network | wire endpoints resolve and carry equal types |
//! | C-ET-01  | error    | trace, network | event channels exist and messages are well typed |
//! | C-ET-02  | error    | trace, network | the trace's network and event parties exist |
//! | W-CMP-01 | warning  | component | component has no behavior |
//! | W-NET-01 | warning  | network | port left unwired |
//! | W-DT-01  | warning  | datatype | datatype never referenced |

mod rules;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::speclang::{Corpus, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Datatype,
    Automaton,
    Component,
    Network,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyRule {
    pub code: &'static str,
    pub severity: Severity,
    pub scope: &'static [ViewKind],
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub severity: Severity,
    /// Document the finding belongs to.
    pub file: String,
    /// Element path within the document, e.g. `automaton Sq/transition 1`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} [{}] {}: {}",
            self.file, self.severity, self.code, self.path, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule code `{0}`")]
pub struct UnknownRuleCode(pub String);

use ViewKind::*;

pub const RULES: &[ConsistencyRule] = &[
    ConsistencyRule {
        code: "C-IF-01",
        severity: Severity::Error,
        scope: &[Automaton, Component],
        description: "automaton transition channels belong to the owning component's interface, with equal types",
    },
    ConsistencyRule {
        code: "C-IF-02",
        severity: Severity::Error,
        scope: &[Component, Network],
        description: "component behaviors and network node components resolve",
    },
    ConsistencyRule {
        code: "C-HY-01",
        severity: Severity::Error,
        scope: &[Component, Network],
        description: "a network used as a component's behavior has exactly the component's ports",
    },
    ConsistencyRule {
        code: "C-TY-01",
        severity: Severity::Error,
        scope: &[Network, Component],
        description: "wire endpoints resolve and carry equal types",
    },
    ConsistencyRule {
        code: "C-ET-01",
        severity: Severity::Error,
        scope: &[Trace, Network, Component],
        description: "trace event channels exist and messages conform to their types",
    },
    ConsistencyRule {
        code: "C-ET-02",
        severity: Severity::Error,
        scope: &[Trace, Network],
        description: "a trace's network, senders and receivers exist",
    },
    ConsistencyRule {
        code: "W-CMP-01",
        severity: Severity::Warning,
        scope: &[Component],
        description: "component has no behavior",
    },
    ConsistencyRule {
        code: "W-NET-01",
        severity: Severity::Warning,
        scope: &[Network, Component],
        description: "port left unwired",
    },
    ConsistencyRule {
        code: "W-DT-01",
        severity: Severity::Warning,
        scope: &[Datatype],
        description: "datatype is never referenced",
    },
];

pub fn rule(code: &str) -> Option<&'static ConsistencyRule> {
    RULES.iter().find(|r| r.code == code)
}

/// Every shipped rule code.
pub fn all_codes() -> BTreeSet<String> {
    RULES.iter().map(|r| r.code.to_string()).collect()
}

/// Runs the selected rules over `corpus`. Findings are sorted by file,
/// path and code.
pub fn run_rules<S: AsRef<str>>(corpus: &Corpus, selection: &[S]) -> Result<Vec<Finding>, UnknownRuleCode> {
    let mut codes = BTreeSet::new();
    for s in selection {
        let r = rule(s.as_ref()).ok_or_else(|| UnknownRuleCode(s.as_ref().to_string()))?;
        codes.insert(r.code);
    }
    let ctx = rules::Context::new(corpus);
    let mut findings: Vec<Finding> = codes.into_iter().flat_map(|code| ctx.run(code)).collect();
    findings.sort();
    findings.dedup();
    Ok(findings)
}

/// Warnings about incomplete parts of the corpus. Never errors.
pub fn completeness_report(corpus: &Corpus) -> Vec<Finding> {
    let codes: Vec<&str> = RULES
        .iter()
        .filter(|r| r.severity == Severity::Warning)
        .map(|r| r.code)
        .collect();
    run_rules(corpus, &codes).expect("shipped codes")
}

/// Error findings of every rule plus wellformedness errors, as findings.
/// Empty iff the corpus may be simulated or compiled.
pub fn gate(corpus: &Corpus) -> Vec<Finding> {
    let mut out: Vec<Finding> = corpus
        .wellformedness()
        .into_iter()
        .filter(|(_, d)| d.severity == Severity::Error)
        .map(|(file, d)| Finding {
            code: d.code,
            severity: d.severity,
            file,
            path: d.path,
            message: d.message,
        })
        .collect();
    let codes: Vec<&str> = RULES
        .iter()
        .filter(|r| r.severity == Severity::Error)
        .map(|r| r.code)
        .collect();
    out.extend(run_rules(corpus, &codes).expect("shipped codes"));
    out.sort();
    out
}
