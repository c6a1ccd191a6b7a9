use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ecs_tda::data::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::Command;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce and audit a run. No timestamps or thread
/// counts, so reruns produce identical bytes.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub invocation: Command,
    pub resolved: serde_json::Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Output directory that remembers the hash of everything written to it.
pub struct OutDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn finish(mut self, invocation: &Command, resolved: serde_json::Value, inputs: Vec<FileRecord>) -> Result<()> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            invocation: invocation.clone(),
            resolved,
            inputs,
            outputs: std::mem::take(&mut self.written)
                .into_iter()
                .map(|(path, sha256)| FileRecord { path, sha256 })
                .collect(),
        };
        self.write_json("manifest.json", &manifest)
    }
}

/// Square matrix with labelled rows and columns.
pub fn labelled_matrix_csv(ids: &[String], rows: &[Vec<f64>]) -> String {
    let mut s = String::from("id");
    for id in ids {
        s.push(',');
        s.push_str(id);
    }
    s.push('\n');
    for (id, row) in ids.iter().zip(rows) {
        s.push_str(id);
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Window-by-scale grid in the same layout as the ECS dumps.
pub fn grid_csv(rows: &[Vec<f64>]) -> String {
    let r = rows.first().map_or(0, Vec::len);
    let mut s = String::from("window");
    for j in 1..=r {
        let _ = write!(s, ",scale_{j}");
    }
    s.push('\n');
    for (k, row) in rows.iter().enumerate() {
        let _ = write!(s, "{}", k + 1);
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}
