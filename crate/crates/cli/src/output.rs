//! Deterministic, locale-independent writers.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
    precision: usize,
}

impl Output {
    pub fn new(dir: &Path, precision: usize) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            precision,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Scientific notation with `precision` significant digits.
    pub fn num(&self, v: f64) -> String {
        format!("{:.*e}", self.precision - 1, v)
    }

    /// Name fragment for a crack length, e.g. `0.05`.
    pub fn length_tag(len: f64) -> String {
        format!("{len}")
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_writer(File::create(&path)?);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| self.num(*v)))?;
        }
        w.flush()?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}
