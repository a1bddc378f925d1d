//! Self-describing run reports: named check rows plus the environment and
//! the effective configuration that produced them. Reports serialize to JSON
//! that survives a parse/re-serialize round trip byte for byte.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One verified quantity. The pass flag always means
/// `|predicted - estimated| <= tolerance`; interval checks fold their bracket
/// into the (midpoint, half-width) form so the same invariant covers them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub predicted: f64,
    pub estimated: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn distance(name: impl Into<String>, predicted: f64, estimated: f64, tolerance: f64) -> Self {
        let pass = (predicted - estimated).abs() <= tolerance;
        CheckRow { name: name.into(), predicted, estimated, tolerance, pass }
    }

    /// Containment check `lo <= estimated <= hi`, stored as a distance check
    /// against the bracket midpoint.
    pub fn bracket(name: impl Into<String>, lo: f64, hi: f64, estimated: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        CheckRow::distance(name, mid, estimated, half)
    }

    /// The row invariant: the recorded flag matches the recorded numbers.
    pub fn consistent(&self) -> bool {
        self.pass == ((self.predicted - self.estimated).abs() <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub config_hash: String,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub name: String,
    pub rows: Vec<CheckRow>,
    pub environment: Environment,
    /// Full effective configuration (every default materialized).
    pub config: serde_json::Value,
}

impl ReportRecord {
    pub fn new(name: impl Into<String>, config: serde_json::Value, seed: u64, workers: usize) -> Self {
        let hash = config_hash(&config);
        ReportRecord {
            name: name.into(),
            rows: Vec::new(),
            environment: Environment { seed, config_hash: hash, workers },
            config,
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Hex SHA-256 of the compact serialization of the config value.
pub fn config_hash(config: &serde_json::Value) -> String {
    let compact = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(compact.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
