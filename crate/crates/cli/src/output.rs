//! CSV tables, JSON summaries and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Float with 17 significant digits; the same value always prints the same way.
pub fn float17(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Semicolon-joined floats for list-valued cells.
pub fn float_list(v: &[f64]) -> String {
    v.iter().map(|x| float17(*x)).collect::<Vec<_>>().join(";")
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Table { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(v) => float17(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => quote(s),
                    Cell::Bool(b) => b.to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// SHA-256 of the canonical (defaults filled in) config JSON.
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub stages: Vec<Stage>,
    pub warnings: Vec<String>,
    pub status: String,
    pub artifacts: Vec<String>,
    pub config: serde_json::Value,
}

pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write tables, summary and manifest into `dir`.
pub fn write_artifacts(dir: &Path, tables: &[Table], summary: &serde_json::Value, manifest: &mut RunManifest) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in tables {
        let name = format!("{}.csv", t.name);
        std::fs::write(dir.join(&name), t.to_csv())?;
        manifest.artifacts.push(name);
    }
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    std::fs::write(dir.join("summary.json"), s)?;
    manifest.artifacts.push("summary.json".into());
    manifest.artifacts.push("manifest.json".into());
    let mut m = serde_json::to_string_pretty(manifest)?;
    m.push('\n');
    std::fs::write(dir.join("manifest.json"), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = float17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(float17(f64::NAN), "NaN");
    }

    #[test]
    fn csv_quoting_and_order() {
        let mut t = Table::new("x", &["a", "b", "c"]);
        t.push(vec![1usize.into(), "p,q".into(), true.into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1,\"p,q\",true\n");
    }
}
