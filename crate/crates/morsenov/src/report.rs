//! Pass/fail reports for identity checks.
//!
//! Every verification routine in this crate returns a [`VerificationReport`]:
//! the name of the identity that was tested together with the list of
//! violations, each naming the generator/class tuple where the identity
//! failed and the exact nonzero residual at that tuple. An empty violation
//! list means the identity holds everywhere it was evaluated.

use serde_json::{json, Value};

/// Outcome of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// A single failure site: the tuple of identifiers the identity was
/// evaluated at, and the exact residual found there (rendered canonically,
/// e.g. `-2` or `3/4 + T^(1/2)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tuple: Vec<String>,
    pub residual: String,
}

impl Violation {
    pub fn new<I, S, R>(tuple: I, residual: R) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        R: ToString,
    {
        Violation {
            tuple: tuple.into_iter().map(Into::into).collect(),
            residual: residual.to_string(),
        }
    }
}

/// Result of checking one identity over a whole system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    identity: String,
    violations: Vec<Violation>,
}

impl VerificationReport {
    /// Build a report; violations are sorted by tuple for determinism.
    pub fn new(identity: impl Into<String>, mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| a.tuple.cmp(&b.tuple));
        VerificationReport {
            identity: identity.into(),
            violations,
        }
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn status(&self) -> Status {
        if self.violations.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// `{"identity", "status", "violations": [{"tuple", "residual"}]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "identity": self.identity,
            "status": self.status().as_str(),
            "violations": self
                .violations
                .iter()
                .map(|v| json!({ "tuple": v.tuple, "residual": v.residual }))
                .collect::<Vec<_>>(),
        })
    }

    /// One human line: `identity: pass` or `identity: fail (n violations; first ...)`.
    pub fn summary(&self) -> String {
        match self.violations.len() {
            0 => format!("{}: pass", self.identity),
            n => {
                let first = &self.violations[0];
                format!(
                    "{}: fail ({} violation{}; first at ({}) with residual {})",
                    self.identity,
                    n,
                    if n == 1 { "" } else { "s" },
                    first.tuple.join(", "),
                    first.residual
                )
            }
        }
    }
}
