use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kings_core::Tolerances;
use serde::Serialize;
use serde_json::Value;

/// Provenance record written next to every emitted artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: u64,
    pub version: String,
    pub tolerances: Tolerances,
    /// Tolerance used by this run's pass/fail comparisons.
    pub tolerance: f64,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value, seed: u64, tolerance: f64) -> Self {
        Self {
            command: command.into(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            tolerances: Tolerances::DEFAULT,
            tolerance,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub struct Emitter {
    pub formats: Vec<Format>,
    pub out: Option<PathBuf>,
    pub manifest: RunManifest,
}

impl Emitter {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Prints `text` when requested, or when every other format goes to files.
    pub fn text(&self, text: &str) {
        if self.wants(Format::Text) || self.out.is_some() {
            println!("{text}");
        }
    }

    /// Emits the JSON result: to `<out>/<stem>.json` with a manifest sibling,
    /// or to stdout wrapped together with the manifest.
    pub fn json<T: Serialize>(&self, stem: &str, result: &T) -> Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        match &self.out {
            Some(dir) => {
                let path = dir.join(format!("{stem}.json"));
                write_string(&path, &serde_json::to_string_pretty(result)?)?;
                self.write_manifest(stem)
            }
            None => {
                let wrapped = serde_json::json!({ "manifest": self.manifest, "result": result });
                println!("{}", serde_json::to_string_pretty(&wrapped)?);
                Ok(())
            }
        }
    }

    /// Emits CSV produced by `write` to `<out>/<stem>.csv`, or to stdout.
    pub fn csv(
        &self,
        stem: &str,
        write: impl FnOnce(&mut Vec<u8>) -> kings_core::Result<()>,
    ) -> Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut buf = Vec::new();
        write(&mut buf)?;
        match &self.out {
            Some(dir) => {
                write_string(&dir.join(format!("{stem}.csv")), std::str::from_utf8(&buf)?)?;
                self.write_manifest(stem)
            }
            None => {
                print!("{}", String::from_utf8(buf)?);
                Ok(())
            }
        }
    }

    pub fn write_manifest(&self, stem: &str) -> Result<()> {
        let dir = self.out.as_deref().unwrap_or(Path::new("."));
        let path = dir.join(format!("{stem}.manifest.json"));
        write_string(&path, &serde_json::to_string_pretty(&self.manifest)?)
    }
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, format!("{}\n", contents.trim_end()))
        .with_context(|| format!("writing {}", path.display()))
}
