use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PipelineError;
use crate::classify::{Method, DEFAULT_PORTS};
use crate::gan::GanConfig;

pub const ENV_PREFIX: &str = "SIXGAN_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master RNG seed for classification, training and generation.
    pub seed: u64,
    pub paths: PathsConfig,
    pub classify: ClassifyConfig,
    pub gan: GanConfig,
    pub generate: GenerateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            paths: PathsConfig::default(),
            classify: ClassifyConfig::default(),
            gan: GanConfig::default(),
            generate: GenerateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Seed address list, one per line.
    pub seeds: Option<PathBuf>,
    /// Known aliased prefixes, one CIDR per line.
    pub aliases: Option<PathBuf>,
    /// Synthetic universe spec used for evaluation.
    pub spec: Option<PathBuf>,
    /// Working directory for labels, checkpoints, candidates and reports.
    pub out: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig { seeds: None, aliases: None, spec: None, out: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub method: Method,
    /// Class count for the clustering methods.
    pub k: usize,
    /// Service ports for the embedded-port rule.
    pub ports: Vec<u16>,
    /// Entropy fingerprint prefix, in nybbles.
    pub fingerprint_prefix: usize,
    /// Smallest prefix group that gets its own fingerprint.
    pub min_group: usize,
    pub embed_dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_pts: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            method: Method::Rfc,
            k: 6,
            ports: DEFAULT_PORTS.to_vec(),
            fingerprint_prefix: 8,
            min_group: 10,
            embed_dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_pts: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// Total candidates across all generators.
    pub budget: usize,
    /// Per-pattern generation rates for budget allocation; uniform if absent.
    pub rates: Option<Vec<f64>>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig { budget: 50_000, rates: None }
    }
}

/// Command-line values that take precedence over file and environment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub method: Option<Method>,
    pub k: Option<usize>,
    pub rates: Option<Vec<f64>>,
    pub spec: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults, then the JSON file, then `SIXGAN_*` variables from `env`,
    /// then `flags`. Nested keys in variable names are joined with `__`, e.g.
    /// `SIXGAN_GAN__REWARD__ALPHA=0.5`.
    pub fn resolve(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        flags: &Overrides,
    ) -> Result<RunConfig, PipelineError> {
        let mut tree = serde_json::to_value(RunConfig::default()).expect("config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| PipelineError::Config(format!("reading {}: {e}", path.display())))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
            merge(&mut tree, doc);
        }
        let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        vars.sort();
        for (key, raw) in vars {
            let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(|s| s.to_ascii_lowercase()).collect();
            set_path(&mut tree, &path, env_value(&raw)).map_err(|m| PipelineError::Config(format!("{key}: {m}")))?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(tree).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, f: &Overrides) {
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.budget {
            self.generate.budget = v;
        }
        if let Some(v) = f.method {
            self.classify.method = v;
        }
        if let Some(v) = f.k {
            self.classify.k = v;
        }
        if let Some(v) = &f.rates {
            self.generate.rates = Some(v.clone());
        }
        if let Some(v) = &f.spec {
            self.paths.spec = Some(v.clone());
        }
        if let Some(v) = &f.out {
            self.paths.out = v.clone();
        }
        if let Some(v) = &f.seeds {
            self.paths.seeds = Some(v.clone());
        }
        if let Some(v) = &f.aliases {
            self.paths.aliases = Some(v.clone());
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.gan.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.classify.k == 0 {
            return Err(PipelineError::Config("classify.k must be >= 1".into()));
        }
        if !(1..32).contains(&self.classify.fingerprint_prefix) {
            return Err(PipelineError::Config("classify.fingerprint_prefix must be in 1..32".into()));
        }
        if let Some(r) = &self.generate.rates {
            if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || r.iter().all(|&x| x == 0.0) {
                return Err(PipelineError::Config(format!("rates must be non-negative and not all zero: {r:?}")));
            }
        }
        Ok(())
    }
}

/// Parses an environment value as JSON where possible (numbers, booleans,
/// arrays), else keeps it as a string.
fn env_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(tree: &mut Value, path: &[String], value: Value) -> Result<(), String> {
    let (last, parents) = path.split_last().ok_or("empty key")?;
    let mut node = tree;
    for p in parents {
        node = node.get_mut(p).filter(|n| n.is_object()).ok_or_else(|| format!("unknown config section `{p}`"))?;
    }
    let obj = node.as_object_mut().ok_or("not a config section")?;
    if !obj.contains_key(last) {
        return Err(format!("unknown config key `{last}`"));
    }
    // Path-like and optional string keys stay strings even when they look numeric.
    let value = match (&obj[last], value) {
        (Value::String(_) | Value::Null, Value::Number(n)) if !last.ends_with("rates") => Value::String(n.to_string()),
        (_, v) => v,
    };
    obj.insert(last.clone(), value);
    Ok(())
}
