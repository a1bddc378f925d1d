//! Experiment configuration: every field has a default, unknown keys are
//! rejected, and the full effective configuration is embedded in each report
//! so runs are self-describing.

use crate::ConfigError;
use serde::{Deserialize, Serialize};

pub const PIPELINES: [&str; 7] = [
    "simulate",
    "exponents",
    "frontier",
    "boxdim",
    "pboxdim",
    "levelset",
    "gauss",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Pipeline to run; one of `PIPELINES`.
    pub pipeline: String,
    /// Regularity-function address, e.g. "constant:h=0.5",
    /// "smooth-sine:base=0.5,amp=0.2,freq=3",
    /// "fbm-sample:a=0.375,lo=0.5,hi=0.75,seed=9".
    pub hurst: String,
    /// Analysis target: "path" analyzes the synthesized process;
    /// "chirp:alpha=A,beta=B" analyzes the deterministic chirp instead.
    pub target: String,
    /// Path synthesis: "fft" (section ladder) or "quadrature" (per-point
    /// kernel quadrature; slow, honors the quad_* overrides).
    pub method: String,
    /// Analysis window; snapped outward onto the dyadic grid.
    pub t_min: f64,
    pub t_max: f64,
    /// Grid step 2^-step_log2.
    pub step_log2: u32,
    /// The driving noise starts this far below the window (fft method).
    pub noise_margin: f64,
    /// Field coefficients.
    pub a_plus: f64,
    pub a_minus: f64,
    /// Master seed; ensemble task k runs at seed + k.
    pub seed: u64,
    /// Ensemble size for seed-averaged pipelines.
    pub n_seeds: u32,
    /// Analysis times.
    pub probes: Vec<f64>,
    /// Dyadic ball radii 2^-coarse ..= 2^-fine for exponent and frontier
    /// estimation.
    pub scale_coarse: u32,
    pub scale_fine: u32,
    /// Dyadic cell sizes 2^-coarse ..= 2^-fine for box counting.
    pub delta_coarse: u32,
    pub delta_fine: u32,
    /// Locality radius for dimension estimates.
    pub rho: f64,
    /// Level for the levelset pipeline.
    pub level: f64,
    /// Dyadic conditioning radii 2^-coarse ..= 2^-fine (gauss pipeline).
    pub radius_coarse: u32,
    pub radius_fine: u32,
    /// Tolerance applied to the report check rows this pipeline emits.
    pub tolerance: f64,
    /// Quadrature overrides; None keeps the method defaults.
    pub quad_u_trunc: Option<f64>,
    pub quad_tail_tol: Option<f64>,
    pub quad_anchor_delta: Option<f64>,
    pub quad_fd_step: Option<f64>,
    /// Output stem: writes <out>/<stem>.csv and <out>/<stem>.json.
    pub out_stem: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pipeline: "simulate".into(),
            hurst: "constant:h=0.5".into(),
            target: "path".into(),
            method: "fft".into(),
            t_min: 0.0,
            t_max: 1.0,
            step_log2: 10,
            noise_margin: 4.0,
            a_plus: 1.0,
            a_minus: 0.0,
            seed: 1,
            n_seeds: 1,
            probes: vec![0.5],
            scale_coarse: 2,
            scale_fine: 7,
            delta_coarse: 4,
            delta_fine: 9,
            rho: 0.1,
            level: 0.0,
            radius_coarse: 4,
            radius_fine: 7,
            tolerance: 0.1,
            quad_u_trunc: None,
            quad_tail_tol: None,
            quad_anchor_delta: None,
            quad_fd_step: None,
            out_stem: "experiment".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !PIPELINES.contains(&self.pipeline.as_str()) {
            return Err(ConfigError(format!(
                "field 'pipeline': unknown pipeline '{}', expected one of {}",
                self.pipeline,
                PIPELINES.join(", ")
            )));
        }
        if !(self.t_min < self.t_max) {
            return Err(ConfigError(format!(
                "field 't_min'/'t_max': window [{}, {}] is empty",
                self.t_min, self.t_max
            )));
        }
        if self.step_log2 == 0 || self.step_log2 > 24 {
            return Err(ConfigError(format!(
                "field 'step_log2': {} outside 1..=24",
                self.step_log2
            )));
        }
        if self.probes.is_empty() {
            return Err(ConfigError("field 'probes': needs at least one time".into()));
        }
        if self.n_seeds == 0 {
            return Err(ConfigError("field 'n_seeds': must be at least 1".into()));
        }
        if self.pipeline == "gauss" && (self.n_seeds as usize) < mbm_core::gauss::MIN_SEEDS {
            return Err(ConfigError(format!(
                "field 'n_seeds': the gauss pipeline needs at least {}",
                mbm_core::gauss::MIN_SEEDS
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(ConfigError("field 'tolerance': must be positive".into()));
        }
        if self.target != "path" && !self.target.starts_with("chirp") {
            return Err(ConfigError(format!(
                "field 'target': expected 'path' or 'chirp:alpha=A,beta=B', got '{}'",
                self.target
            )));
        }
        if self.method != "fft" && self.method != "quadrature" {
            return Err(ConfigError(format!(
                "field 'method': expected 'fft' or 'quadrature', got '{}'",
                self.method
            )));
        }
        if self.out_stem.is_empty()
            || self
                .out_stem
                .chars()
                .any(|c| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
        {
            return Err(ConfigError(format!(
                "field 'out_stem': '{}' must be a nonempty [A-Za-z0-9_-]+ name",
                self.out_stem
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        2f64.powi(-(self.step_log2 as i32))
    }

    /// The effective configuration as a JSON value with sorted keys.
    pub fn as_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = ExperimentConfig::from_json(r#"{"pipelin": "simulate"}"#).unwrap_err();
        assert!(err.0.contains("pipelin"), "{}", err.0);
    }

    #[test]
    fn unknown_pipeline_is_rejected_by_field() {
        let err = ExperimentConfig::from_json(r#"{"pipeline": "no-such"}"#).unwrap_err();
        assert!(err.0.contains("pipeline") && err.0.contains("no-such"), "{}", err.0);
    }

    #[test]
    fn partial_configs_inherit_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"pipeline": "exponents", "seed": 7}"#).unwrap();
        assert_eq!(cfg.pipeline, "exponents");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.hurst, "constant:h=0.5");
        assert_eq!(cfg.probes, vec![0.5]);
    }

    #[test]
    fn invalid_values_are_rejected() {
        for bad in [
            r#"{"t_min": 1.0, "t_max": 0.0}"#,
            r#"{"n_seeds": 0}"#,
            r#"{"pipeline": "gauss", "n_seeds": 5}"#,
            r#"{"method": "magic"}"#,
            r#"{"target": "sine"}"#,
            r#"{"out_stem": "a/b"}"#,
            r#"{"step_log2": 0}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
