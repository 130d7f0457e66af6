//! Result documents with a reproducibility header.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::OutputFormat;

/// Header fields common to every command. Thread count and output path are
/// left out because they do not affect results.
#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub program: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_sha256: String,
}

impl RunInfo {
    pub fn new<C: Serialize>(command: &'static str, seed: u64, config: &C) -> Self {
        let canonical = serde_json::to_vec(&json!({ "command": command, "seed": seed, "config": config }))
            .expect("config serialises");
        let digest = Sha256::digest(&canonical);
        Self {
            program: "unitroot",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

/// A rendered result: header lines plus a table, or a JSON document.
pub struct Document {
    pub info: RunInfo,
    /// Extra `key: value` header lines.
    pub notes: Vec<(String, String)>,
    pub body: String,
    pub json: Value,
}

impl Document {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let notes: serde_json::Map<String, Value> = self
                    .notes
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect();
                let doc = json!({ "meta": self.info, "notes": notes, "result": self.json });
                let mut s = serde_json::to_string_pretty(&doc).expect("json value");
                s.push('\n');
                s
            }
            OutputFormat::Csv | OutputFormat::Markdown => {
                let (open, close) = match format {
                    OutputFormat::Csv => ("# ", ""),
                    _ => ("<!-- ", " -->"),
                };
                let mut out = String::new();
                let mut line = |text: String| {
                    out.push_str(open);
                    out.push_str(&text);
                    out.push_str(close);
                    out.push('\n');
                };
                line(format!(
                    "{} {} {}",
                    self.info.program, self.info.version, self.info.command
                ));
                line(format!("seed: {}", self.info.seed));
                line(format!("config-sha256: {}", self.info.config_sha256));
                for (k, v) in &self.notes {
                    line(format!("{k}: {v}"));
                }
                out.push_str(&self.body);
                out
            }
        }
    }
}
