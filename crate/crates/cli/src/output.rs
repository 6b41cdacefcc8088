//! Output directory bookkeeping: every file written goes through [`Artifacts`] so it
//! ends up in the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    manifest: Vec<String>,
}

/// Shortest round-trip decimal, `NaN` for missing values.
pub fn num(v: f64) -> String {
    format!("{v}")
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &[String] {
        &self.manifest
    }

    fn register(&mut self, name: &str) -> PathBuf {
        if !self.manifest.iter().any(|m| m == name) {
            self.manifest.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.register(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.register(name);
        let mut f = fs::File::create(path)?;
        f.write_all(body.as_bytes())?;
        Ok(())
    }
}
