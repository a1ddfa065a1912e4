//! Output directory bookkeeping and the run manifest written next to every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub tool: String,
    /// sha256 of the canonical JSON of `config`.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub versions: Versions,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

/// Hex sha256 of the canonical JSON form; object keys come out sorted.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_vec(config).expect("JSON values serialize");
    hex::encode(Sha256::digest(canonical))
}

/// Collects artifacts of one command and writes the manifest last.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn new(dir: &Path, command: &str, config: serde_json::Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            context: format!("creating {}", dir.display()),
            source,
        })?;
        let config_hash = config_hash(&config);
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_owned(),
                config,
                versions: Versions {
                    tool: format!("spinboson {}", env!("CARGO_PKG_VERSION")),
                    config_hash,
                },
                outputs: Vec::new(),
                notes: Vec::new(),
            },
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        })?;
        self.manifest.outputs.push(name.to_owned());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(spinboson::Error::from)?;
        self.write(name, &(text + "\n"))
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.manifest.notes.push(note.into());
    }

    pub fn finish(self) -> Result<RunManifest, CliError> {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(spinboson::Error::from)?;
        fs::write(&path, text + "\n").map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        })?;
        Ok(self.manifest)
    }
}
