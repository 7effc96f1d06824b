//! On-disk results cache keyed by a hash of each stage's parameters.
//!
//! An entry lives at `<root>/<stage>/<sha256>.json`. The key covers the
//! stage name, the crate version and the JSON form of the parameters, so a
//! changed parameter only invalidates the stages that read it. JSON floats
//! round-trip exactly, so cached and fresh results are bit-identical.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const CACHE_DIR_VAR: &str = "FPME_CACHE_DIR";

#[derive(Debug, Default)]
pub struct Cache {
    root: Option<PathBuf>,
    executed: Mutex<Vec<String>>,
    hits: Mutex<Vec<String>>,
}

impl Cache {
    /// A cache that stores nothing; every stage runs.
    pub fn disabled() -> Self {
        Cache::default()
    }

    pub fn at(root: impl Into<PathBuf>) -> Self {
        Cache {
            root: Some(root.into()),
            ..Default::default()
        }
    }

    /// `FPME_CACHE_DIR` when set, otherwise `fallback`.
    pub fn from_env(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_VAR) {
            Some(dir) if !dir.is_empty() => Cache::at(dir),
            _ => Cache::at(fallback),
        }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn key<P: Serialize>(stage: &str, params: &P) -> Result<String> {
        let json = serde_json::to_string(params).map_err(|e| HarnessError::Serialization(e.to_string()))?;
        let mut h = Sha256::new();
        h.update(stage.as_bytes());
        h.update([0]);
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(json.as_bytes());
        Ok(hex::encode(h.finalize()))
    }

    /// Returns the cached value for (stage, params) or computes and stores it.
    /// Unreadable entries are recomputed.
    pub fn get_or_compute<P, T, F>(&self, stage: &str, params: &P, compute: F) -> Result<T>
    where
        P: Serialize,
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let key = Cache::key(stage, params)?;
        let label = format!("{stage}/{key}");
        let Some(root) = &self.root else {
            let value = compute()?;
            self.executed.lock().unwrap().push(label);
            return Ok(value);
        };
        let dir = root.join(stage);
        let path = dir.join(format!("{key}.json"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            match serde_json::from_str(&text) {
                Ok(value) => {
                    self.hits.lock().unwrap().push(label);
                    return Ok(value);
                }
                Err(e) => log::warn!("ignoring unreadable cache entry {}: {e}", path.display()),
            }
        }
        let value = compute()?;
        let text = serde_json::to_string(&value).map_err(|e| HarnessError::Serialization(e.to_string()))?;
        std::fs::create_dir_all(&dir).map_err(HarnessError::io(&dir))?;
        // write then rename, so a concurrent reader never sees half a file
        let tmp = dir.join(format!("{key}.json.tmp{}", std::process::id()));
        std::fs::write(&tmp, text).map_err(HarnessError::io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(HarnessError::io(&path))?;
        self.executed.lock().unwrap().push(label);
        Ok(value)
    }

    /// Stage labels `stage/key` computed during this run, in completion order.
    pub fn executed(&self) -> Vec<String> {
        self.executed.lock().unwrap().clone()
    }

    pub fn hits(&self) -> Vec<String> {
        self.hits.lock().unwrap().clone()
    }
}
