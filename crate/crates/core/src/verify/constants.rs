//! Frozen inequality constants: measured once at a fixed seed, scaled by a
//! safety factor and asserted afterwards.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable naming a constants file that replaces the built-in one.
pub const CONSTANTS_ENV: &str = "WHITNEY_CONSTANTS";

const BUILTIN: &str = include_str!("../../constants/frozen.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConstant {
    pub n: usize,
    pub m: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma32Constant {
    pub n: usize,
    pub m: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimConstant {
    pub n: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConstant {
    pub n: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrozenConstants {
    pub seed: u64,
    pub safety_factor: f64,
    /// Field seminorm over jet seminorm.
    pub kappa: Vec<OrderConstant>,
    pub lemma32: Vec<Lemma32Constant>,
    /// `|p_Q − y| ≤ C·|x − y|` for vertices `x` of `Q*`.
    pub nearest_point: Vec<DimConstant>,
    /// Largest number of enlarged cubes through one point.
    pub overlap: Vec<DimConstant>,
    /// `‖D^k φ_Q(z)‖ · d(z,E)^k`.
    pub partition: Vec<PartitionConstant>,
    /// `‖F(x) − P_y(x)‖ / (|x−y|^m ω(|x−y|))` for the trace fixture.
    pub trace_decay: f64,
}

impl FrozenConstants {
    pub fn kappa(&self, n: usize, m: usize) -> Option<f64> {
        self.kappa.iter().find(|c| c.n == n && c.m == m).map(|c| c.value)
    }

    pub fn lemma32(&self, n: usize, m: usize) -> Option<(f64, f64)> {
        self.lemma32.iter().find(|c| c.n == n && c.m == m).map(|c| (c.a, c.b))
    }

    pub fn nearest_point(&self, n: usize) -> Option<f64> {
        self.nearest_point.iter().find(|c| c.n == n).map(|c| c.value)
    }

    pub fn overlap(&self, n: usize) -> Option<f64> {
        self.overlap.iter().find(|c| c.n == n).map(|c| c.value)
    }

    pub fn partition(&self, n: usize, k: usize) -> Option<f64> {
        self.partition.iter().find(|c| c.n == n && c.k == k).map(|c| c.value)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("constants serialize");
        s.push('\n');
        s
    }
}

/// Parsed constants plus where they came from and the SHA-256 of the raw bytes.
#[derive(Clone, Debug)]
pub struct LoadedConstants {
    pub constants: FrozenConstants,
    pub source: String,
    pub sha256: String,
}

fn parse(text: &str, source: String) -> Result<LoadedConstants> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let constants: FrozenConstants = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::schema(format!("{source}: {}", e.path()), e.inner().to_string()))?;
    Ok(LoadedConstants {
        constants,
        source,
        sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
    })
}

impl LoadedConstants {
    pub fn builtin() -> Result<Self> {
        parse(BUILTIN, "builtin".into())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse(&text, path.display().to_string())
    }

    /// An explicit path wins, then the environment variable, then the built-in file.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::from_path(p);
        }
        match std::env::var_os(CONSTANTS_ENV) {
            Some(p) if !p.is_empty() => Self::from_path(&PathBuf::from(p)),
            _ => Self::builtin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_and_round_trips() {
        let c = LoadedConstants::builtin().unwrap();
        assert_eq!(c.sha256.len(), 64);
        assert_eq!(c.constants.to_json(), BUILTIN);
        assert!(c.constants.safety_factor >= 1.0);
    }

    #[test]
    fn unknown_fields_are_named() {
        let mut v: serde_json::Value = serde_json::from_str(BUILTIN).unwrap();
        v["kappa"] = serde_json::json!([{"n": 1, "m": 0, "value": 2.0, "extra": 1}]);
        let err = parse(&v.to_string(), "t".into()).unwrap_err().to_string();
        assert!(err.contains("kappa[0]"), "{err}");
    }
}
