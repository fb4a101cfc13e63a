use gptlab_core::ScalarMode;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::codec;
use crate::error::CliResult;

/// Result of one command: what was asked, on which data, the verdict and
/// the certificates backing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub task: String,
    /// arguments as given, without the output destination
    pub command: Vec<String>,
    /// fully resolved input data; `verify` re-checks against this
    pub inputs: Value,
    pub verdict: String,
    pub certificates: Value,
    pub mode: ScalarMode,
    /// floating-mode tolerance the report was produced with
    pub eps: Option<f64>,
    pub timing_ms: Option<u64>,
}

/// Hex sha256 of the canonical serialization.
pub fn digest(inputs: &Value) -> String {
    hex::encode(Sha256::digest(codec::canonical(inputs).as_bytes()))
}

impl Report {
    pub fn to_document(&self) -> Value {
        let mut m = Map::new();
        m.insert("task".into(), json!(self.task));
        m.insert("command".into(), json!(self.command));
        m.insert("inputs".into(), self.inputs.clone());
        m.insert("inputs_digest".into(), json!(digest(&self.inputs)));
        m.insert("verdict".into(), json!(self.verdict));
        m.insert("certificates".into(), self.certificates.clone());
        if let Some(e) = self.eps {
            m.insert("eps".into(), json!(e));
        }
        if let Some(t) = self.timing_ms {
            m.insert("timing_ms".into(), json!(t));
        }
        codec::document("report", self.mode, m)
    }

    /// Parses a report and checks its digest.
    pub fn from_document(doc: &Value) -> CliResult<Report> {
        let mode = codec::document_mode(doc)?;
        codec::check_header(doc, mode)?;
        let command = codec::field(doc, "command")?
            .as_array()
            .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
            .unwrap_or_default();
        let report = Report {
            task: codec::str_field(doc, "task")?.to_string(),
            command,
            inputs: codec::field(doc, "inputs")?.clone(),
            verdict: codec::str_field(doc, "verdict")?.to_string(),
            certificates: codec::field(doc, "certificates")?.clone(),
            mode,
            eps: doc.get("eps").and_then(Value::as_f64),
            timing_ms: doc.get("timing_ms").and_then(Value::as_u64),
        };
        Ok(report)
    }
}
