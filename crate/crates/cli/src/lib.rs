//! Batch experiment runner around `mbm-core`: JSON-configured pipelines with
//! CSV/JSON artifacts, and named verification suites with pass/fail rows.

pub mod config;
pub mod pipelines;
pub mod report;
pub mod suites;

/// A configuration problem (bad key, unknown pipeline, unparsable value).
/// Callers map this to the usage/config exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}
