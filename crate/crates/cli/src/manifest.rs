//! Run manifests and the output writer.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_FORMAT: &str = "leafkit-run/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRecord {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format: String,
    pub toolkit_version: String,
    pub command: String,
    pub preset: Option<String>,
    pub config_hash: String,
    /// The resolved config, defaults included.
    pub config: ExperimentConfig,
    pub stages: Vec<StageTiming>,
    pub files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Single sink for every output file of a run.
///
/// Writes happen in call order from one thread; the manifest lists files
/// sorted by path.
#[derive(Debug)]
pub struct OutputWriter {
    root: PathBuf,
    files: BTreeMap<String, FileRecord>,
    stages: Vec<StageTiming>,
}

impl OutputWriter {
    pub fn new(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: BTreeMap::new(), stages: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `rel` under the root.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.insert(rel, bytes);
        Ok(path)
    }

    pub fn write_json<S: Serialize>(&mut self, rel: &str, value: &S) -> CliResult<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("output serializes") + "\n";
        self.write(rel, text.as_bytes())
    }

    /// Records a file some other routine already wrote under the root.
    pub fn record(&mut self, path: &Path) -> CliResult<()> {
        let rel = path
            .strip_prefix(&self.root)
            .map_err(|_| CliError::Usage(format!("{} is outside the output directory", path.display())))?;
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        self.insert(&rel, &bytes);
        Ok(())
    }

    fn insert(&mut self, rel: &str, bytes: &[u8]) {
        let record = FileRecord { path: rel.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) };
        self.files.insert(rel.to_string(), record);
    }

    /// Runs `f`, recording its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: impl Into<String>, f: impl FnOnce(&mut Self) -> CliResult<T>) -> CliResult<T> {
        let start = Instant::now();
        let out = f(self)?;
        self.stages.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        Ok(out)
    }

    pub fn files(&self) -> impl Iterator<Item = &FileRecord> {
        self.files.values()
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self, command: &str, preset: Option<&str>, config: &ExperimentConfig) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            format: RUN_FORMAT.into(),
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            preset: preset.map(str::to_string),
            config_hash: config.hash(),
            config: config.clone(),
            stages: self.stages,
            files: self.files.into_values().collect(),
        };
        let path = self.root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StateSpec;
    use leafkit_core::ChainSpec;

    #[test]
    fn lists_every_file_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = OutputWriter::new(dir.path()).unwrap();
        w.write("b/x.csv", b"1,2\n").unwrap();
        w.write("a.json", b"{}").unwrap();
        std::fs::write(dir.path().join("ext.txt"), b"hi").unwrap();
        w.record(&dir.path().join("ext.txt")).unwrap();
        w.timed("noop", |_| Ok(())).unwrap();
        let cfg = ExperimentConfig::new(ChainSpec::chaotic(6).unwrap(), StateSpec::uniform());
        let m = w.finish("foliate", None, &cfg).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["a.json", "b/x.csv", "ext.txt"]);
        assert_eq!(m.files[0].sha256, sha256_hex(b"{}"));
        assert_eq!(m.stages.len(), 1);
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
