//! Run configuration files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "offspring": {"4": 1},
//!   "rule": {"type": "threshold", "zeta": {"2,4": 0.5, "3,4": 0.5}},
//!   "increments": {"kind": "atomic", "atoms": [[-1, 0.25], [0, 0.5], [1, 0.25]]},
//!   "seed": 1, "depth": 10, "replicas": 10000
//! }
//! ```

use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::increments::IncrementLaw;
use crate::mc::SimConfig;
use crate::models::VotingModel;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: VotingModel,
    pub increments: IncrementLaw,
    pub seed: u64,
    pub depth: usize,
    pub replicas: usize,
    /// Lattice spacing for the grid recursion; the natural one of `q` if absent.
    pub h: Option<f64>,
    raw: Value,
}

impl RunConfig {
    pub fn from_json(value: Value) -> Result<Self> {
        if !value.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let version = value.get("schema_version").map_or(Some(SCHEMA_VERSION), Value::as_u64);
        if version != Some(SCHEMA_VERSION) {
            return Err(Error::Config(format!("unsupported schema_version {}", value["schema_version"])));
        }
        let model = VotingModel::from_json(&value)?;
        let increments = match value.get("increments") {
            Some(inc) => IncrementLaw::from_json(inc)?,
            None => IncrementLaw::lazy_symmetric(),
        };
        let uint = |key: &str, default: u64| -> Result<u64> {
            match value.get(key) {
                None => Ok(default),
                Some(v) => v.as_u64().ok_or_else(|| Error::Config(format!("\"{key}\" must be a nonnegative integer"))),
            }
        };
        let seed = uint("seed", 0)?;
        let depth = uint("depth", 10)? as usize;
        let replicas = uint("replicas", 10_000)? as usize;
        if replicas == 0 {
            return Err(Error::Config("\"replicas\" must be at least 1".into()));
        }
        let h = match value.get("h") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_f64().filter(|h| *h > 0.0).ok_or_else(|| Error::Config("\"h\" must be positive".into()))?),
        };
        Ok(Self { model, increments, seed, depth, replicas, h, raw: value })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        Self::from_json(value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.raw["seed"] = Value::from(seed);
    }

    pub fn set_depth(&mut self, depth: usize) {
        self.depth = depth;
        self.raw["depth"] = Value::from(depth);
    }

    pub fn set_replicas(&mut self, replicas: usize) {
        self.replicas = replicas.max(1);
        self.raw["replicas"] = Value::from(self.replicas);
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.model.clone(), self.increments.clone(), self.depth, self.replicas, self.seed)
    }

    pub fn grid_h(&self) -> f64 {
        self.h.unwrap_or_else(|| self.increments.default_h())
    }

    /// Compact JSON with sorted keys.
    pub fn canonical_json(&self) -> String {
        self.raw.to_string()
    }

    pub fn raw(&self) -> &Value {
        &self.raw
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
