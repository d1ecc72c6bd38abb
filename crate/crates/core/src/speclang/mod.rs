//! Concrete syntax for model documents (`.fks`): parser, canonical printer
//! and single-document wellformedness checks.
//!
//! # Diagnostic codes
//!
//! Codes are stable identifiers; messages may change.
//!
//! | code      | meaning |
//! |-----------|---------|
//! | E-SYN-01  | syntax error |
//! | E-RES-01  | unresolved channel in a transition |
//! | E-RES-02  | unresolved control state |
//! | E-RES-03  | unresolved name in an expression or assignment |
//! | E-RES-04  | unresolved datatype |
//! | E-RES-05  | unresolved node or external port in a wire |
//! | E-RES-06  | unresolved trace reference |
//! | E-IMP-01  | import cycle |
//! | E-IMP-02  | imported file cannot be read or parsed |
//! | WF-DUP-01 | two declarations share a name |
//! | WF-DUP-02 | two members of one declaration share a name |
//! | WF-TY-01  | expression has the wrong type |
//! | WF-TY-02  | invalid datatype definition |
//! | WF-ST-01  | automaton must have exactly one initial state |
//! | WF-DIR-01 | port used against its direction |
//! | WF-TR-01  | transition reads or writes one channel twice, or rebinds a variable |
//! | WF-WI-01  | wire endpoint used twice, or wire from input straight to output |
//! | WF-EV-01  | trace intervals must start at 1 and never decrease |
//! | WF-TX-01  | trace expression refers to itself |
//! | WF-RF-01  | refinement claim is missing a field its kind requires |

mod ast;
mod check;
mod corpus;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use check::{check_wellformedness, check_wellformedness_in};
pub use corpus::{load_corpus, Corpus, CorpusError, SourceDocument};
pub use parser::{parse_expr, parse_stream_spec, parse_value, SyntaxError};
pub use printer::{event as print_event, trace as print_trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub pos: Option<Pos>,
    /// Element path within the document, e.g. `automaton Sq/transition 2`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &str, pos: Option<Pos>, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            pos,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(pos) = self.pos { write!(f, "{pos}: ")? }
        write!(f, "{} [{}]", self.severity, self.code)?;
        if !self.path.is_empty() {
            write!(f, " {}", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseReport {
    pub document: Option<ModelDocument>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseReport {
    pub fn is_success(&self) -> bool {
        self.document.is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// Parses a document and resolves its local references. Never panics:
/// every failure is reported as a positioned diagnostic.
pub fn parse_model(text: &str) -> ParseReport {
    let doc = match parser::parse_document(text) {
        Ok(doc) => doc,
        Err(e) => {
            return ParseReport {
                document: None,
                diagnostics: vec![Diagnostic::error("E-SYN-01", Some(e.pos), "", e.message)],
            }
        }
    };
    let diagnostics = check::resolve_references(&doc, &[]);
    let failed = diagnostics.iter().any(|d| d.severity == Severity::Error);
    ParseReport {
        document: (!failed).then_some(doc),
        diagnostics,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("document is not wellformed: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
pub struct IllformedDocument(pub Vec<Diagnostic>);

/// Canonical text of a wellformed document.
pub fn print_model(doc: &ModelDocument) -> Result<String, IllformedDocument> {
    let findings: Vec<Diagnostic> = check_wellformedness(doc)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !findings.is_empty() {
        return Err(IllformedDocument(findings));
    }
    Ok(printer::print_document(doc))
}

/// Canonical text without the wellformedness gate, for formatting
/// documents that are still incomplete.
pub fn format_model(doc: &ModelDocument) -> String {
    printer::print_document(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_empty_document() {
        let report = parse_model("");
        assert!(report.document.unwrap().is_empty());
        let printed = print_model(&ModelDocument::default()).unwrap();
        assert!(parse_model(&printed).document.unwrap().is_empty());
    }

    #[test]
    fn syntax_error_has_position() {
        let report = parse_model("datatype X = \n  float");
        assert!(report.document.is_none());
        let d = &report.diagnostics[0];
        assert_eq!(d.code, "E-SYN-01");
        assert_eq!(d.pos.unwrap().line, 2);
    }

    #[test]
    fn garbage_never_panics() {
        for src in ["}", "automaton", "automaton A { transition", "trace T on N { env ->", "\"", "@@@", "refinement R behavioral { }"] {
            let report = parse_model(src);
            assert!(report.document.is_none(), "{src}");
            assert!(report.errors().all(|d| d.pos.is_some()));
        }
    }
}
