use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Record of one command run: the fully resolved configuration plus hashes
/// of everything read and written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub status: String,
    pub config: RunConfig,
    pub inputs: Vec<FileHash>,
    pub artifacts: Vec<FileHash>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(format!("{:x}", h.finalize()))
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            status: "ok".into(),
            config: config.clone(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), PipelineError> {
        let sha256 = sha256_file(path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileHash { path: path.display().to_string(), sha256 });
        Ok(())
    }

    /// Records an artifact under `dir` by its file name.
    pub fn artifact(&mut self, dir: &Path, name: &str) -> Result<(), PipelineError> {
        let sha256 = sha256_file(&dir.join(name)).map_err(|e| PipelineError::Runtime(format!("{name}: {e}")))?;
        self.artifacts.push(FileHash { path: name.into(), sha256 });
        Ok(())
    }

    /// Writes `manifest_<command>.json` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf, PipelineError> {
        let path = dir.join(format!("manifest_{}.json", self.command.replace('-', "_")));
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
