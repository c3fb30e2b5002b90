use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Writes result files into one directory, each carrying the resolved config.
pub struct Sink<'a> {
    dir: PathBuf,
    config: &'a RunConfig,
    pub written: Vec<PathBuf>,
}

impl<'a> Sink<'a> {
    pub fn new(dir: &Path, config: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    /// CSV with the configuration as leading `#` lines.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if !self.config.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.dir.join(format!("{name}.csv"));
        let mut file = fs::File::create(&path)?;
        for line in self.config.embedded().to_toml().lines() {
            writeln!(file, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    /// JSON object `{"config": ..., <payload fields>}`.
    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<(), CliError> {
        if !self.config.wants(Format::Json) {
            return Ok(());
        }
        let mut doc = json!({ "config": self.config.embedded() });
        match serde_json::to_value(payload)? {
            Value::Object(map) => doc.as_object_mut().unwrap().extend(map),
            other => {
                doc["result"] = other;
            }
        }
        let path = self.dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
