//! Result files. Every CSV starts with a comment line
//! `# schema_version=1 config_hash=<sha256>`; every JSON summary carries the
//! same two fields plus the resolved configuration.

use crate::config::ExperimentConfig;
use crate::Result;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV table with string cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form; `inf`, `-inf` and `nan` for the specials.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    config: serde_json::Value,
    written: Vec<PathBuf>,
}

impl Artifacts {
    /// Create the directory and write `config.resolved.toml`.
    pub fn create(dir: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let toml = cfg.resolved_toml();
        let path = dir.join("config.resolved.toml");
        fs::write(&path, &toml)?;
        let mut echo = cfg.clone();
        echo.output_dir = None;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hash: cfg.hash(),
            config: serde_json::to_value(&echo)?,
            written: vec![path],
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        let mut buf = format!("# schema_version={SCHEMA_VERSION} config_hash={}\n", self.hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        self.file(name, &buf)
    }

    /// Wrap `summary` as `{schema_version, config_hash, command, config, result}`.
    pub fn json<T: Serialize>(&mut self, name: &str, command: &str, summary: &T) -> Result<(PathBuf, serde_json::Value)> {
        let value = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.hash,
            "command": command,
            "config": self.config,
            "result": summary,
        });
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok((self.file(name, text.as_bytes())?, value))
    }

    pub fn file(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 224.4956993896896, -0.0, 1e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn csv_carries_the_header_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        let mut a = Artifacts::create(dir.path(), &cfg).unwrap();
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![num(1.5), "a,b".into()]);
        let p = a.csv("t.csv", &t).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text, format!("# schema_version=1 config_hash={}\nx,y\n1.5,\"a,b\"\n", cfg.hash()));
        assert!(dir.path().join("config.resolved.toml").exists());
    }
}
