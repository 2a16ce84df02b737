use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Record of one run: enough to reproduce every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every flag of the run, as `flag -> value`.
    pub config: BTreeMap<String, String>,
    /// Files written next to the manifest.
    pub artifacts: Vec<String>,
    pub tool_version: String,
}

/// Flatten serialized arguments into `flag -> value` strings. Lists are
/// comma-joined; absent options are left out.
pub fn flat_config<T: Serialize>(args: &T) -> Result<BTreeMap<String, String>, CliError> {
    let value = serde_json::to_value(args).map_err(CliError::Json)?;
    let serde_json::Value::Object(fields) = value else {
        unreachable!("argument structs serialize to objects")
    };
    let mut out = BTreeMap::new();
    for (key, v) in fields {
        let text = match v {
            serde_json::Value::Null => continue,
            serde_json::Value::String(s) => s,
            serde_json::Value::Array(items) if items.is_empty() => continue,
            serde_json::Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
            other => scalar(&other),
        };
        out.insert(key, text);
    }
    Ok(out)
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Command line that reproduces a manifest's run into `outdir`.
pub fn replay_argv(manifest: &RunManifest, outdir: &Path) -> Vec<String> {
    let mut argv = vec!["lphvg".to_string(), manifest.subcommand.clone()];
    for (key, value) in &manifest.config {
        for item in value.split(',') {
            argv.push(format!("--{key}"));
            argv.push(item.to_string());
        }
    }
    argv.push("--outdir".into());
    argv.push(outdir.display().to_string());
    argv
}

/// Output directory whose files are written atomically (temp file + rename).
pub struct OutDir {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.dir, name, contents)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(CliError::Json)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(self, subcommand: &str, config: BTreeMap<String, String>) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config,
            artifacts: self.artifacts,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(CliError::Json)?;
        text.push('\n');
        write_atomic(&self.dir, MANIFEST, &text)?;
        Ok(manifest)
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(&target, e))?;
    tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not a run manifest: {e}", path.display())))
}
