//! Run manifests: every invocation writes a JSON record of its parameters,
//! emitted artifacts, seeds, tool version, and wall time, so that each data
//! file in the output directory is referenced by exactly one manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use cwq_core::{CwqError, Result};

/// Schema version of the manifest layout.
const SCHEMA_VERSION: u32 = 1;

/// JSON record of one CLI invocation.
#[derive(Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub seeds: BTreeMap<String, u64>,
}

/// Collects parameters, artifacts, and seeds while a subcommand runs, then
/// writes the manifest next to the data files.
pub struct Runner {
    subcommand: &'static str,
    out_dir: PathBuf,
    start: Instant,
    parameters: BTreeMap<String, serde_json::Value>,
    artifacts: Vec<String>,
    seeds: BTreeMap<String, u64>,
}

impl Runner {
    /// Creates the output directory and starts the wall clock.
    pub fn new(subcommand: &'static str, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| {
            CwqError::Numerical(format!("cannot create {}: {e}", out_dir.display()))
        })?;
        Ok(Self {
            subcommand,
            out_dir: out_dir.to_path_buf(),
            start: Instant::now(),
            parameters: BTreeMap::new(),
            artifacts: Vec::new(),
            seeds: BTreeMap::new(),
        })
    }

    /// Records one named parameter.
    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameter values are plain data");
        self.parameters.insert(key.to_string(), v);
    }

    /// Records one named seed.
    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    /// Resolves `name` inside the output directory and registers it as an
    /// artifact of this run.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.out_dir.join(name)
    }

    /// Writes `content` to a registered artifact.
    pub fn write_artifact(&mut self, name: &str, content: &[u8]) -> Result<PathBuf> {
        let path = self.artifact(name);
        fs::write(&path, content)
            .map_err(|e| CwqError::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// Writes the manifest and prints the artifact paths.
    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            subcommand: self.subcommand.to_string(),
            parameters: self.parameters,
            artifacts: self.artifacts.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
            seeds: self.seeds,
        };
        let name = format!("{}_manifest.json", self.subcommand.replace('-', "_"));
        let path = self.out_dir.join(&name);
        let mut body = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CwqError::Numerical(format!("manifest serialization failed: {e}")))?;
        body.push(b'\n');
        fs::write(&path, body)
            .map_err(|e| CwqError::Numerical(format!("cannot write {}: {e}", path.display())))?;
        for artifact in &self.artifacts {
            println!("wrote {}", self.out_dir.join(artifact).display());
        }
        println!("wrote {}", path.display());
        Ok(())
    }
}
