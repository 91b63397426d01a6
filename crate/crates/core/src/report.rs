//! Run reports: what was run, on which inputs, with which outcome.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::schema::REPORT_V1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn of_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(Self::of_bytes(path.display().to_string(), &bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    /// Operation that produced the verdict.
    pub operation: String,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedded: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    pub tool_version: String,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub verdicts: Vec<Verdict>,
    pub certificates: Vec<CertificateRef>,
    pub residuals: BTreeMap<String, f64>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: impl Into<String>, tolerance: f64) -> Self {
        Self {
            schema: REPORT_V1.into(),
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            tolerance,
            seed: None,
            inputs: Vec::new(),
            verdicts: Vec::new(),
            certificates: Vec::new(),
            residuals: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn verdict(&mut self, operation: impl Into<String>, pass: bool, detail: impl Into<String>) -> &mut Self {
        self.verdicts.push(Verdict {
            operation: operation.into(),
            tolerance: self.tolerance,
            pass,
            detail: detail.into(),
        });
        self
    }

    pub fn residual(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.residuals.insert(name.into(), value);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_time_s = started.elapsed().as_secs_f64();
    }

    /// Copy with `wall_time_s` zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{parse, to_canonical};

    #[test]
    fn hashes_and_round_trip() {
        let h = InputHash::of_bytes("x", b"abc");
        assert_eq!(h.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let mut r = RunReport::new("embed", 1e-9);
        r.inputs.push(h);
        r.verdict("embed_test", true, "feasible").residual("reconstruction", 1e-15);
        let text = to_canonical(&r).unwrap();
        let back: RunReport = parse(&text, REPORT_V1).unwrap();
        assert_eq!(back, r);
        assert!(back.all_pass());
        assert_eq!(back.verdicts[0].tolerance, 1e-9);
    }
}
