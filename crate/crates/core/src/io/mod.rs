//! File formats: TOML contract and scenario documents, CSV traces and
//! curves, JSON reports.

mod contract_doc;
mod curve;
mod report;
mod scenario;
mod trace;

use std::fmt;

pub use contract_doc::{parse_contract, serialize_contract};
pub use curve::{parse_curve, sample_curve, write_curve, CurveError, CurvePoint, CURVE_HEADER};
pub use report::{parse_report, render_report, write_report};
pub use scenario::{parse_scenario, serialize_scenario};
pub use trace::{parse_trace, write_trace, TRACE_HEADER};

/// A document that could not be read, with the position of the problem
/// when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl DocumentError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: None,
            message: message.into(),
        }
    }

    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            field: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for DocumentError {}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
        + 1
}

fn toml_error(text: &str, err: toml::de::Error) -> DocumentError {
    let message = err.message().to_string();
    let field = backticked(&message);
    DocumentError {
        line: err.span().map(|s| line_of(text, s.start)),
        field,
        message,
    }
}

/// First `` `name` `` in a serde message, which names the offending field.
fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}
