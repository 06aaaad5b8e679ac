//! Output directory writer. Every file goes through one [`Artifacts`]
//! value, which records its SHA-256 for the manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    records: Vec<ArtifactRecord>,
}

pub const MANIFEST_NAME: &str = "manifest.toml";

pub fn sha256_hex(data: &[u8]) -> String {
    format!("{:x}", Sha256::digest(data))
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, data).map_err(|source| CliError::Io { path, source })?;
        self.records.push(ArtifactRecord {
            path: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len() as u64,
        });
        Ok(())
    }

    /// Renders into a buffer with `f`, then writes it as `name`.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> selfdiff_core::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    /// Writes `manifest.toml`: the resolved configuration followed by one
    /// entry per produced file.
    pub fn finish(self, header: &str, config_toml: &str) -> Result<Vec<ArtifactRecord>, CliError> {
        #[derive(Serialize)]
        struct Files<'a> {
            files: &'a [ArtifactRecord],
        }
        let nested: toml::Value = toml::from_str(config_toml).expect("round trip of own output");
        let config = toml::to_string(&toml::Value::Table(
            [("config".to_string(), nested)].into_iter().collect(),
        ))
        .expect("serializable");
        let files = toml::to_string(&Files {
            files: &self.records,
        })
        .expect("serializable");
        let text = format!("{header}\n{config}\n{files}");
        let path = self.dir.join(MANIFEST_NAME);
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        Ok(self.records)
    }
}
