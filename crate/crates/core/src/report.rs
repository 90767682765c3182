//! Versioned, deterministic verification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "report_v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    Evidence,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Only a failure counts against a run.
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indeterminate => "INDETERMINATE",
            Verdict::Evidence => "EVIDENCE",
        };
        f.write_str(s)
    }
}

/// One verified claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// Human-readable statement of what was checked.
    pub anchor: String,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub witness: Value,
    pub precision_loss: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl CheckRecord {
    pub fn new(check_id: &str, anchor: &str, verdict: Verdict) -> Self {
        CheckRecord {
            check_id: check_id.into(),
            anchor: anchor.into(),
            params: BTreeMap::new(),
            verdict,
            witness: Value::Null,
            precision_loss: 0,
            wall_time_ms: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn witness(mut self, w: impl Serialize) -> Self {
        self.witness = serde_json::to_value(w).unwrap_or(Value::Null);
        self
    }

    pub fn loss(mut self, loss: i64) -> Self {
        self.precision_loss = loss.max(0);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub tool_version: String,
    pub config: BTreeMap<String, Value>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(config: BTreeMap<String, Value>) -> Self {
        VerificationReport {
            schema: SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: CheckRecord) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = CheckRecord>) {
        self.checks.extend(cs);
    }

    /// Worst verdict: FAIL over INDETERMINATE over EVIDENCE over PASS.
    pub fn overall(&self) -> Verdict {
        let rank = |v: Verdict| match v {
            Verdict::Fail => 3,
            Verdict::Indeterminate => 2,
            Verdict::Evidence => 1,
            Verdict::Pass => 0,
        };
        self.checks.iter().map(|c| c.verdict).max_by_key(|&v| rank(v)).unwrap_or(Verdict::Pass)
    }

    pub fn any_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_failure())
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        // round-trip through Value so every map is key-sorted
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &std::path::Path) -> crate::Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_serialize_uppercase() {
        assert_eq!(serde_json::to_string(&Verdict::Indeterminate).unwrap(), "\"INDETERMINATE\"");
        assert_eq!(Verdict::Evidence.to_string(), "EVIDENCE");
    }

    #[test]
    fn report_json_is_stable() {
        let mut cfg = BTreeMap::new();
        cfg.insert("z".to_string(), Value::from(1));
        cfg.insert("a".to_string(), Value::from(2));
        let mut r = VerificationReport::new(cfg);
        r.push(CheckRecord::new("x", "a claim", Verdict::Pass).param("p", 2).witness(vec![1, 2]));
        let a = r.to_json();
        assert_eq!(a, r.clone().to_json());
        assert!(a.find("\"a\"").unwrap() < a.find("\"z\"").unwrap());
        assert!(!a.contains("wall_time_ms"));
        let back: VerificationReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.overall(), Verdict::Pass);
    }

    #[test]
    fn overall_prefers_failure() {
        let mut r = VerificationReport::new(BTreeMap::new());
        r.push(CheckRecord::new("a", "", Verdict::Evidence));
        r.push(CheckRecord::new("b", "", Verdict::Indeterminate));
        assert_eq!(r.overall(), Verdict::Indeterminate);
        r.push(CheckRecord::new("c", "", Verdict::Fail));
        assert_eq!(r.overall(), Verdict::Fail);
        assert!(r.any_failure());
    }
}
