use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OracleError;

/// Structural IID rule a family's active addresses follow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyRule {
    LowByte,
    EmbeddedIpv4,
    EmbeddedPort {
        #[serde(default = "default_ports")]
        ports: Vec<u16>,
    },
    IeeeDerived {
        /// Vendor prefixes as 24-bit values; empty allows any.
        #[serde(default)]
        ouis: Vec<u32>,
    },
    PatternBytes {
        /// Byte value repeated at least three times in the IID.
        tag: u8,
    },
    Randomized,
}

fn default_ports() -> Vec<u16> {
    vec![22, 53, 80, 443]
}

fn default_span() -> u64 {
    1
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    /// CIDR strings with nybble-aligned lengths up to /64.
    pub prefixes: Vec<String>,
    pub rule: FamilyRule,
    /// Probability that a conforming address is active, in (0, 1].
    pub density: f64,
    /// Subnet-id values allowed between the prefix and the IID: the nybbles
    /// in that range, read as one integer, must be below this.
    #[serde(default = "default_span")]
    pub subnet_span: u64,
    /// Relative share of sampled seeds.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub seeds: usize,
    /// Share of the seed list drawn from under aliased prefixes.
    #[serde(default)]
    pub aliased_seed_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniverseSpec {
    /// Keys the membership hash and the sampling RNG.
    pub seed: u64,
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub aliased_prefixes: Vec<String>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
}

impl UniverseSpec {
    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        serde_json::from_str(text).map_err(|e| OracleError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Spec(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
