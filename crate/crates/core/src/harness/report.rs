use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::doc::{BracketDocument, InstanceSource};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// extra instance joined to the seeded ones in criteria 1 and 3
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSource>,
    /// extra brackets joined to the seeded ones in criteria 1 and 2
    #[serde(default)]
    pub brackets: Vec<BracketDocument>,
    #[serde(default = "unit")]
    pub tol_scale: f64,
    /// per-check tolerance overrides by record name or criterion prefix (`"c4"`)
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// criteria to run; all when empty
    #[serde(default)]
    pub suites: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn unit() -> f64 {
    1.0
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 20240607,
            instance: None,
            brackets: vec![],
            tol_scale: 1.0,
            tolerances: BTreeMap::new(),
            suites: vec![],
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.tol_scale.is_finite() && self.tol_scale > 0.0) {
            return Err(HarnessError::schema("tol_scale", "must be positive"));
        }
        if let Some(InstanceSource::Path(p)) = &self.instance {
            if !p.is_file() {
                return Err(HarnessError::schema("instance.path", format!("{} does not exist", p.display())));
            }
        }
        if let Some(&k) = self.suites.iter().find(|&&k| !(1..=9).contains(&k)) {
            return Err(HarnessError::schema("suites", format!("unknown criterion {k}")));
        }
        for (name, t) in &self.tolerances {
            if !(t.is_finite() && *t > 0.0) {
                return Err(HarnessError::schema(format!("tolerances.{name}"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn runs(&self, criterion: u8) -> bool {
        self.suites.is_empty() || self.suites.contains(&criterion)
    }

    /// Tolerance of a record: an exact override, else a prefix override, else `base * tol_scale`.
    pub fn tolerance(&self, name: &str, base: f64) -> f64 {
        if let Some(t) = self.tolerances.get(name) {
            return *t;
        }
        let prefix = self
            .tolerances
            .iter()
            .filter(|(k, _)| name.starts_with(&format!("{k}.")))
            .max_by_key(|(k, _)| k.len());
        match prefix {
            Some((_, t)) => *t,
            None => base * self.tol_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub criterion: u8,
    pub inputs_digest: String,
    /// `None` when the check could not be evaluated
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckRecord {
    pub fn measured(name: impl Into<String>, criterion: u8, inputs_digest: String, residual: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            criterion,
            inputs_digest,
            residual: residual.is_finite().then_some(residual),
            tolerance,
            pass: residual < tolerance,
            detail: String::new(),
        }
    }

    pub fn failed(name: impl Into<String>, criterion: u8, inputs_digest: String, tolerance: f64, why: String) -> Self {
        CheckRecord {
            name: name.into(),
            criterion,
            inputs_digest,
            residual: None,
            tolerance,
            pass: false,
            detail: why,
        }
    }

    /// Appends to the detail; an error message already recorded is kept.
    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        let d = detail.into();
        if !d.is_empty() {
            self.detail = if self.detail.is_empty() { d } else { format!("{}; {d}", self.detail) };
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    /// seconds since the Unix epoch
    pub timestamp: u64,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: Environment,
    pub config: ExperimentConfig,
    pub pass: bool,
    /// sorted by name
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(config: ExperimentConfig, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            environment: Environment::current(),
            config,
            pass: records.iter().all(|r| r.pass),
            records,
        }
    }

    pub fn failing(&self) -> Vec<String> {
        self.records.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect()
    }

    pub fn criterion_pass(&self, k: u8) -> Option<bool> {
        let mut it = self.records.iter().filter(|r| r.criterion == k).peekable();
        it.peek()?;
        Some(it.all(|r| r.pass))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// First 16 hex digits of the SHA-256 of the JSON form of `inputs`.
pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}
