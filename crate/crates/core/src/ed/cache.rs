//! On-disk ground-state cache keyed by a hash of the model and truncation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GroundState;
use crate::error::Result;
use crate::model::ModelParams;

#[derive(Serialize)]
struct Key<'a> {
    params: &'a ModelParams,
    n_max: usize,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundStateCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    state: GroundState,
}

impl GroundStateCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex sha256 of the canonical JSON of the inputs that determine the ground state.
    pub fn key(params: &ModelParams, n_max: usize, seed: u64) -> String {
        let json = serde_json::to_vec(&Key { params, n_max, seed }).expect("key serializes");
        hex::encode(Sha256::digest(json))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("gs-{key}.json"))
    }

    pub fn load(&self, key: &str) -> Result<Option<GroundState>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        let entry: Entry = serde_json::from_slice(&fs::read(path)?)?;
        Ok((entry.key == key).then_some(entry.state))
    }

    pub fn store(&self, key: &str, state: &GroundState) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            key: key.to_owned(),
            state: state.clone(),
        };
        let tmp = self.dir.join(format!(".gs-{key}.tmp"));
        fs::write(&tmp, serde_json::to_vec(&entry)?)?;
        fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}
