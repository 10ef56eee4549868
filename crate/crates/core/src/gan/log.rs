use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// One training-log line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// `g_pretrain`, `d_pretrain`, `g_step` or `d_step`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<usize>,
    pub step: usize,
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_q_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_q_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_q_ad: Option<f64>,
    /// Fraction of the sampled batch under an aliased prefix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aliased_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<bool>,
}

impl LogRecord {
    pub fn new(kind: &str, step: usize, loss: f64) -> Self {
        LogRecord {
            kind: kind.into(),
            round: None,
            generator: None,
            step,
            loss,
            mean_q_d: None,
            mean_q_a: None,
            mean_q_ad: None,
            aliased_rate: None,
            baseline: None,
        }
    }
}

/// Newline-delimited JSON sink.
pub struct JsonlLog {
    out: BufWriter<File>,
}

impl JsonlLog {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        Ok(JsonlLog { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write(&mut self, rec: &LogRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, rec)?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}
