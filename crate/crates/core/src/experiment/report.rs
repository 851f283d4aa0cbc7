use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    /// The quantity the check measures.
    pub measured: f64,
    /// Distance from failing; positive for a pass.
    pub margin: f64,
    pub runtime_ms: f64,
    pub detail: String,
}

/// What a check computes, before timing is attached.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub measured: f64,
    pub margin: f64,
    pub detail: String,
}

impl Outcome {
    /// Passes when `margin > 0`.
    pub fn by_margin(measured: f64, margin: f64, detail: impl Into<String>) -> Self {
        Outcome { passed: margin > 0.0, measured, margin, detail: detail.into() }
    }
}

/// Runs `f` and records its outcome; an error becomes a failed check.
pub fn timed(name: &str, f: impl FnOnce() -> Result<Outcome>) -> CheckRecord {
    let start = Instant::now();
    let out = f();
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok(o) => CheckRecord {
            name: name.into(),
            passed: o.passed,
            measured: o.measured,
            margin: o.margin,
            runtime_ms,
            detail: o.detail,
        },
        Err(e) => CheckRecord {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            margin: f64::NAN,
            runtime_ms,
            detail: format!("error: {e}"),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl EnvStamp {
    pub fn current() -> Self {
        EnvStamp {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub suite: String,
    pub config_hash: String,
    pub env: EnvStamp,
    /// Sorted by name.
    pub checks: Vec<CheckRecord>,
    pub failed: usize,
}

impl RunReport {
    pub fn new(suite: &str, config: &ExperimentConfig, mut checks: Vec<CheckRecord>) -> Result<Self> {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let failed = checks.iter().filter(|c| !c.passed).count();
        Ok(RunReport { suite: suite.into(), config_hash: config_hash(config)?, env: EnvStamp::current(), checks, failed })
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// SHA-256 of the normalized config, ignoring the output directory.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let mut c = config.clone();
    c.out_dir = None;
    let digest = Sha256::digest(serde_json::to_vec(&c)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn errors_become_failures_and_checks_are_sorted() {
        let cfg = ExperimentConfig::from_json(r#"{"n": 1}"#).unwrap();
        let checks = vec![
            timed("b", || Ok(Outcome::by_margin(1.0, 0.5, ""))),
            timed("a", || Err(Error::Domain("boom".into()))),
        ];
        let r = RunReport::new("all", &cfg, checks).unwrap();
        assert_eq!(r.checks[0].name, "a");
        assert!(r.checks[0].detail.contains("boom"));
        assert_eq!((r.failed, r.exit_code()), (1, 1));
        assert_eq!(r.config_hash.len(), 64);
    }

    #[test]
    fn hash_ignores_the_output_directory() {
        let a = ExperimentConfig::from_json(r#"{"n": 1}"#).unwrap();
        let b = ExperimentConfig::from_json(r#"{"n": 1, "out_dir": "/tmp/x"}"#).unwrap();
        let c = ExperimentConfig::from_json(r#"{"n": 2}"#).unwrap();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
    }
}
