//! JSON report envelope shared by every `quadinr` command.
//!
//! Computed numbers live under `results`; published figures used for
//! comparison live under `reference_values` and are never mixed in.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result, TOOL_VERSION};

/// JSON Schema (draft 7) every report conforms to.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_values: Option<Value>,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: impl Serialize, results: impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            inputs: serde_json::to_value(inputs)?,
            results: serde_json::to_value(results)?,
            reference_values: None,
            tool_version: TOOL_VERSION.to_string(),
            seed: None,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn with_reference(mut self, reference: impl Serialize) -> Result<Self> {
        self.reference_values = Some(serde_json::to_value(reference)?);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes to `path`, or to stdout when `path` is `None` or `-`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        match path {
            Some(p) if p.as_os_str() != "-" => {
                std::fs::write(p, text).map_err(|e| Error::io(p, e))
            }
            _ => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip() {
        let r = ReportDocument::new("fourier", json!({"points": 4097}), json!({"b1": 1.0320491})).unwrap()
            .with_reference(json!({"b1": 1.032}))
            .unwrap()
            .with_seed(7);
        let back = ReportDocument::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn schema_is_json() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["type"], "object");
    }
}
