//! Experiment reports: named text tables, recorded checks and plot series.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use cwikel_core::Check;

use crate::CliError;

/// A named output payload; the extension of `name` tells its format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub content: String,
}

/// Points for one plot, with an optional fitted curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub fit: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub kind: String,
    /// SHA-256 over the configuration and every input file.
    pub inputs_digest: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub wall_clock_s: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|t| t.name == name).map(|t| t.content.as_str())
    }

    /// Writes `report.json` and every table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}-{}", self.id, t.name));
            write_text(&path, &t.content)?;
            written.push(path);
        }
        let path = dir.join(format!("{}-report.json", self.id));
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(&path, &json)?;
        written.push(path);
        Ok(written)
    }

    /// Human-readable verdict lines.
    pub fn summary(&self) -> String {
        let mut out = format!("{} ({}), digest {}\n", self.id, self.kind, &self.inputs_digest[..16]);
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: lhs {:.6e}, rhs {:.6e}, slack {}\n",
                if c.holds { "ok" } else { "FAIL" },
                c.anchor,
                c.lhs,
                c.rhs,
                c.slack
            ));
        }
        out.push_str(&format!("  wall clock {:.3}s\n", self.wall_clock_s));
        out
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Incremental SHA-256 over labelled byte strings.
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        self.0.update((label.len() as u64).to_le_bytes());
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn hex(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Default for InputDigest {
    fn default() -> Self {
        Self::new()
    }
}
