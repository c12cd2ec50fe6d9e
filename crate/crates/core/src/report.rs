//! JSON reporting for checks and benchmark runs.

use serde::{Deserialize, Serialize};

use crate::circuit::ChallengeClass;
use crate::equiv::{CheckOutcome, Verdict, Witness};

pub const SCHEMA_VERSION: u32 = 1;

/// One checked pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub class: String,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub wall_ms: u64,
    pub path_var_peak: usize,
    pub rule_firings: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub equivalent: usize,
    pub not_equivalent: usize,
    pub inconclusive: usize,
    pub error: usize,
    pub timeout: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub records: Vec<Record>,
    pub totals: Totals,
}

impl Default for Report {
    fn default() -> Self {
        Report { schema: SCHEMA_VERSION, records: Vec::new(), totals: Totals::default() }
    }
}

impl Record {
    pub fn from_outcome(name: &str, outcome: &CheckOutcome) -> Record {
        let (witness, detail) = match &outcome.verdict {
            Verdict::NotEquivalent(w) => (Some(w.clone()), None),
            Verdict::Inconclusive(r) => (None, Some(format!("{r:?}"))),
            Verdict::Error(e) => (None, Some(e.clone())),
            Verdict::Equivalent => (None, None),
        };
        Record {
            name: name.to_string(),
            class: outcome.class.to_string(),
            verdict: outcome.verdict.label().to_string(),
            witness,
            detail,
            wall_ms: outcome.metrics.wall_ms,
            path_var_peak: outcome.metrics.path_var_peak,
            rule_firings: outcome.metrics.rule_firings,
        }
    }

    pub fn error(name: &str, class: Option<ChallengeClass>, message: String) -> Record {
        Record {
            name: name.to_string(),
            class: class.map(|c| c.to_string()).unwrap_or_else(|| "unknown".into()),
            verdict: "error".into(),
            witness: None,
            detail: Some(message),
            wall_ms: 0,
            path_var_peak: 0,
            rule_firings: 0,
        }
    }

    pub fn zero_timings(&mut self) {
        self.wall_ms = 0;
    }
}

impl Report {
    pub fn push(&mut self, record: Record) {
        match record.verdict.as_str() {
            "equivalent" => self.totals.equivalent += 1,
            "not_equivalent" => self.totals.not_equivalent += 1,
            "timeout" => self.totals.timeout += 1,
            "error" => self.totals.error += 1,
            _ => self.totals.inconclusive += 1,
        }
        self.records.push(record);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// One benchmark pair: program paths relative to the suite directory, with
/// an optional expected verdict label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_track_records() {
        let mut r = Report::default();
        r.push(Record {
            name: "a".into(),
            class: "Mix".into(),
            verdict: "equivalent".into(),
            witness: None,
            detail: None,
            wall_ms: 1,
            path_var_peak: 2,
            rule_firings: 3,
        });
        r.push(Record::error("b", None, "boom".into()));
        assert_eq!(r.totals.equivalent, 1);
        assert_eq!(r.totals.error, 1);
        let text = r.to_json();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.records.len(), 2);
        assert_eq!(back.schema, SCHEMA_VERSION);
    }

    #[test]
    fn manifest_parses() {
        let text = r#"[{"name":"t","a":"x.qasm","b":"y.qasm","expect":"equivalent"},{"name":"u","a":"p.qasm","b":"q.qasm"}]"#;
        let entries = parse_manifest(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].expect.as_deref(), Some("equivalent"));
        assert!(entries[1].expect.is_none());
    }
}
