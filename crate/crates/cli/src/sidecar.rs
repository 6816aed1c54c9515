//! JSON run metadata written next to every output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Top-level keys are fixed; command-specific detail lives in `params` and
/// `diagnostics`.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub command: &'static str,
    pub params: Value,
    pub alpha: Option<f64>,
    pub eigenvalues: Value,
    pub iterations: Value,
    pub diagnostics: Value,
}

impl Sidecar {
    pub fn write(&self, path: &Path) -> Result<()> {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }
}

/// `out.csv` → `out.csv.json`.
pub fn path_for(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
