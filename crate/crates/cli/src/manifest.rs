//! Output manifests: every emitted file listed with its checksum, keyed
//! by the config hash so downstream commands can refuse mismatched
//! artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mfmax_core::error::{Error, Result};
use mfmax_core::io::kv::{KvReader, KvWriter};
use mfmax_core::io::sha256_file;

pub const MANIFEST_FORMAT: &str = "mfmax-manifest-v1";
pub const TOOL_VERSION: &str = concat!("mfmax ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone)]
pub struct Manifest {
    pub kind: String,
    pub config_sha256: String,
    pub artifacts: Vec<(String, String)>,
    pub elapsed_ms: u128,
}

/// Collects artifacts as they are written and finalizes the manifest.
pub struct ManifestBuilder {
    out_dir: PathBuf,
    kind: String,
    config_sha256: String,
    files: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path, kind: &str, config_sha256: &str) -> Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            kind: kind.into(),
            config_sha256: config_sha256.into(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.out_dir
    }

    /// Register a file (relative to the output directory) after writing it.
    pub fn add(&mut self, relative: &str) {
        self.files.push(relative.to_string());
    }

    pub fn write_text(&mut self, relative: &str, text: &str) -> Result<()> {
        std::fs::write(self.out_dir.join(relative), text)?;
        self.add(relative);
        Ok(())
    }

    pub fn finish(mut self) -> Result<Manifest> {
        self.files.sort();
        let mut artifacts = Vec::new();
        for f in &self.files {
            let sha = sha256_file(&self.out_dir.join(f))?;
            artifacts.push((f.clone(), sha));
        }
        let elapsed_ms = self.started.elapsed().as_millis();
        let manifest = Manifest {
            kind: self.kind.clone(),
            config_sha256: self.config_sha256.clone(),
            artifacts,
            elapsed_ms,
        };
        let mut w = KvWriter::new(MANIFEST_FORMAT);
        w.set("tool", TOOL_VERSION);
        w.set("kind", &manifest.kind);
        w.set("config_sha256", &manifest.config_sha256);
        w.set("elapsed_ms", elapsed_ms);
        w.set("artifact_count", manifest.artifacts.len());
        for (i, (path, sha)) in manifest.artifacts.iter().enumerate() {
            w.set(&format!("artifact.{i}.path"), path);
            w.set(&format!("artifact.{i}.sha256"), sha);
        }
        std::fs::write(self.out_dir.join("manifest.txt"), w.into_string())?;
        Ok(manifest)
    }
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.txt"))?;
        let mut r = KvReader::parse(&text)?;
        let format = r.required("format")?;
        if format != MANIFEST_FORMAT {
            return Err(Error::Parse(format!("manifest format '{format}'")));
        }
        let _tool = r.required("tool")?;
        let kind = r.required("kind")?;
        let config_sha256 = r.required("config_sha256")?;
        let elapsed_ms = r.required_usize("elapsed_ms")? as u128;
        let count = r.required_usize("artifact_count")?;
        let mut artifacts = Vec::with_capacity(count);
        for i in 0..count {
            artifacts.push((
                r.required(&format!("artifact.{i}.path"))?,
                r.required(&format!("artifact.{i}.sha256"))?,
            ));
        }
        r.finish()?;
        Ok(Self { kind, config_sha256, artifacts, elapsed_ms })
    }

    /// Check the directory's files still match their recorded checksums.
    pub fn verify_files(&self, dir: &Path) -> Result<()> {
        for (path, sha) in &self.artifacts {
            let actual = sha256_file(&dir.join(path))?;
            if actual != *sha {
                return Err(Error::Parse(format!(
                    "artifact '{path}' checksum mismatch (manifest {sha}, file {actual})"
                )));
            }
        }
        Ok(())
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Parse(format!(
                "expected a {kind} directory, found '{}'",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn expect_config(&self, sha: &str) -> Result<()> {
        if self.config_sha256 != sha {
            return Err(Error::Parse(format!(
                "artifact was produced by a different config ({} != {sha})",
                self.config_sha256
            )));
        }
        Ok(())
    }
}
