//! Structured diagnostics emitted by the compiler pipeline.
//!
//! Every error or warning carries the phase that produced it and a JSON
//! pointer into the user's specification, so tooling can map a message back
//! to the offending spec fragment.

use serde::Serialize;
use std::fmt;

/// How severe a diagnostic is. Errors abort compilation after the phase
/// that produced them completes; warnings never do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// The compiler phase a diagnostic originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Scan,
    Parse,
    Link,
    Assemble,
}

/// A single error or warning tied to a location in the input spec.
///
/// `path` is a JSON pointer (RFC 6901) into the specification document,
/// e.g. `/scales/0/type`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub phase: Phase,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(phase: Phase, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            phase,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(phase: Phase, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            phase,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let phase = match self.phase {
            Phase::Scan => "scan",
            Phase::Parse => "parse",
            Phase::Link => "link",
            Phase::Assemble => "assemble",
        };
        write!(f, "{sev}[{phase}] {}: {}", self.path, self.message)
    }
}

/// True if any diagnostic in the slice is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
