//! Pass/fail bookkeeping shared by the verification suites and the CLI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// How `lhs` is compared against `rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs ≤ rhs + tolerance`
    Le,
    /// `lhs < rhs + tolerance`
    Lt,
    /// `lhs ≥ rhs − tolerance`
    Ge,
    /// `|lhs − rhs| ≤ tolerance`
    Eq,
}

/// One named inequality or identity together with its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The family of results the check belongs to.
    pub tag: String,
    pub relation: Relation,
    pub status: CheckStatus,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        tag: impl Into<String>,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let holds = match relation {
            Relation::Le => lhs <= rhs + tolerance,
            Relation::Lt => lhs < rhs + tolerance,
            Relation::Ge => lhs >= rhs - tolerance,
            Relation::Eq => (lhs - rhs).abs() <= tolerance,
        };
        Check {
            name: name.into(),
            tag: tag.into(),
            relation,
            status: if holds { CheckStatus::Pass } else { CheckStatus::Fail },
            lhs,
            rhs,
            tolerance,
            note: None,
        }
    }

    pub fn le(name: impl Into<String>, tag: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, tag, Relation::Le, lhs, rhs, tol)
    }

    pub fn lt(name: impl Into<String>, tag: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, tag, Relation::Lt, lhs, rhs, tol)
    }

    pub fn ge(name: impl Into<String>, tag: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, tag, Relation::Ge, lhs, rhs, tol)
    }

    pub fn close(name: impl Into<String>, tag: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(name, tag, Relation::Eq, lhs, rhs, tol)
    }

    /// A yes/no property, encoded as `1 = 1`.
    pub fn holds(name: impl Into<String>, tag: impl Into<String>, ok: bool) -> Self {
        Self::new(name, tag, Relation::Eq, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    /// Marks the check as not applicable, keeping the computed sides.
    pub fn skip(mut self, reason: impl Into<String>) -> Self {
        self.status = CheckStatus::Skipped;
        self.note = Some(reason.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Output of a CLI command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the command's inputs.
    pub inputs: String,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.failed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Hex SHA-256 over a sequence of byte strings, each length-prefixed.
pub fn digest<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::le("a", "t", 1.0, 1.0, 0.0).passed());
        assert!(Check::lt("a", "t", 1.0, 1.0, 0.0).failed());
        assert!(Check::ge("a", "t", 1.0, 1.0 + 1e-12, 1e-10).passed());
        assert!(Check::close("a", "t", 1.0, 1.1, 0.05).failed());
        assert!(Check::holds("a", "t", false).failed());
        assert!(Check::le("a", "t", f64::NAN, 1.0, 0.0).failed());
        assert_eq!(Check::holds("a", "t", false).skip("n/a").status, CheckStatus::Skipped);
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest([b"ab".as_slice(), b"c"]), digest([b"a".as_slice(), b"bc"]));
    }
}
