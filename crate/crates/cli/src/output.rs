//! CSV tables, gnuplot scripts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use t5drive::config::ConfigFile;

use crate::error::CliError;

/// Collects the files a command writes under one output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
    emit_plots: bool,
}

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl OutputDir {
    pub fn create(root: &Path, emit_plots: bool) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            emit_plots,
        })
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }

    /// Writes a table; `rows` are already formatted cells.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    /// Gnuplot script plotting `y` columns against `x` from `csv_name`,
    /// written only with `--emit-plots`.
    pub fn write_plot(
        &mut self,
        csv_name: &str,
        header: &[&str],
        x: &str,
        ys: &[&str],
        logscale_x: bool,
    ) -> Result<(), CliError> {
        if !self.emit_plots {
            return Ok(());
        }
        let col = |name: &str| header.iter().position(|h| *h == name).map(|i| i + 1).unwrap_or(1);
        let stem = csv_name.trim_end_matches(".csv");
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key autotitle columnhead\n");
        s.push_str(&format!("set terminal pngcairo size 1000,600\nset output '{stem}.png'\n"));
        s.push_str(&format!("set xlabel '{x}'\n"));
        if logscale_x {
            s.push_str("set logscale x\n");
        }
        let series: Vec<String> = ys
            .iter()
            .map(|y| format!("'{csv_name}' using {}:{} with lines", col(x), col(y)))
            .collect();
        s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
        self.write_text(&format!("{stem}.gp"), &s)
    }
}

/// SHA-256 of the configuration as canonical JSON (keys sorted).
pub fn config_digest(cfg: &ConfigFile) -> Result<String, CliError> {
    let value = serde_json::to_value(cfg)?;
    let canonical = serde_json::to_string(&value)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: String,
    pub config_digest: String,
    pub parameters: serde_json::Value,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 188.49555921538757, -1e-300, 2e6] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(2e6), "2000000");
    }
}
