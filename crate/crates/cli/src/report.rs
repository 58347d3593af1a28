//! Report envelope written by the checking subcommands: the command
//! name, a content digest per input file, the result object, and a
//! digest over all three. Reruns on the same inputs produce the same
//! digest; wall-clock timings live in their own field, outside the
//! digest preimage.

use std::collections::BTreeMap;
use std::time::Duration;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

/// A sealed report. `digest` covers `command`, `inputs` and `result`
/// serialized with sorted keys; `timings_ms` is excluded so two runs on
/// the same inputs agree byte for byte once timings are dropped.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Input label -> sha256 of the file bytes as given.
    pub inputs: BTreeMap<String, String>,
    pub result: Value,
    pub digest: String,
    pub timings_ms: BTreeMap<String, u64>,
}

/// Accumulates inputs and timings while a command runs.
#[derive(Debug, Clone, Default)]
pub struct ReportBuilder {
    command: String,
    inputs: BTreeMap<String, String>,
    timings_ms: BTreeMap<String, u64>,
}

impl ReportBuilder {
    pub fn new(command: &str) -> ReportBuilder {
        ReportBuilder {
            command: command.to_string(),
            ..ReportBuilder::default()
        }
    }

    /// Record an input file by content digest.
    pub fn input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs.insert(label.to_string(), sha256_hex(bytes));
    }

    pub fn timing(&mut self, label: &str, elapsed: Duration) {
        self.timings_ms
            .insert(label.to_string(), elapsed.as_millis() as u64);
    }

    pub fn timings(&mut self, map: BTreeMap<String, u64>) {
        self.timings_ms.extend(map);
    }

    /// Seal the envelope. serde_json objects iterate in sorted key
    /// order, so the digest preimage is canonical.
    pub fn finish(self, result: impl Serialize) -> Result<Report> {
        let result = serde_json::to_value(result)?;
        let preimage = serde_json::to_string(&json!({
            "command": self.command,
            "inputs": self.inputs,
            "result": result,
        }))?;
        Ok(Report {
            tool: "incompact".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            inputs: self.inputs,
            result,
            digest: sha256_hex(preimage.as_bytes()),
            timings_ms: self.timings_ms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_timings() {
        let mut a = ReportBuilder::new("chrom");
        a.input("graph", b"{}");
        a.timing("solve", Duration::from_millis(5));
        let mut b = ReportBuilder::new("chrom");
        b.input("graph", b"{}");
        b.timing("solve", Duration::from_millis(900));
        let ra = a.finish(json!({"value": 3})).unwrap();
        let rb = b.finish(json!({"value": 3})).unwrap();
        assert_eq!(ra.digest, rb.digest);
        assert_ne!(ra.timings_ms, rb.timings_ms);
    }

    #[test]
    fn digest_tracks_content() {
        let base = ReportBuilder::new("chrom").finish(json!({"value": 3})).unwrap();
        let other_result = ReportBuilder::new("chrom").finish(json!({"value": 4})).unwrap();
        let other_command = ReportBuilder::new("colnum").finish(json!({"value": 3})).unwrap();
        let mut with_input = ReportBuilder::new("chrom");
        with_input.input("graph", b"{}");
        let with_input = with_input.finish(json!({"value": 3})).unwrap();
        assert_ne!(base.digest, other_result.digest);
        assert_ne!(base.digest, other_command.digest);
        assert_ne!(base.digest, with_input.digest);
    }
}
