//! Lagrangian and Eulerian record writers.
//!
//! CSV columns are fixed: `t,i,x,u,gamma` and `t,x,rho,u,gamma,rho_star`, with
//! `rho_star` left empty for homogeneous runs. JSON lines carry the same fields, one
//! object per record. Floats are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use granular_core::dynamics::SimState;
use granular_core::eulerian::EulerianField;
use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::CliError;

pub const LAGRANGIAN_HEADER: &str = "t,i,x,u,gamma";
pub const EULERIAN_HEADER: &str = "t,x,rho,u,gamma,rho_star";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Serialize)]
struct LagrangianRecord {
    t: f64,
    i: usize,
    x: f64,
    u: f64,
    gamma: f64,
}

#[derive(Serialize)]
struct EulerianRecord {
    t: f64,
    x: f64,
    rho: f64,
    u: f64,
    gamma: f64,
    rho_star: Option<f64>,
}

pub struct RecordWriter {
    path: PathBuf,
    out: BufWriter<File>,
    format: OutputFormat,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RecordWriter {
    /// Creates `dir/stem.csv` or `dir/stem.jsonl` and writes the CSV header.
    pub fn create(
        dir: &Path,
        stem: &str,
        header: &str,
        format: OutputFormat,
    ) -> Result<Self, CliError> {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path,
            format,
        };
        if format == OutputFormat::Csv {
            writeln!(w.out, "{header}").map_err(io_err(&w.path))?;
        }
        Ok(w)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn emit<R: Serialize>(
        &mut self,
        record: &R,
        csv: impl FnOnce() -> String,
    ) -> Result<(), CliError> {
        match self.format {
            OutputFormat::Csv => writeln!(self.out, "{}", csv()).map_err(io_err(&self.path)),
            OutputFormat::JsonLines => {
                serde_json::to_writer(&mut self.out, record).map_err(|e| CliError::Io {
                    path: self.path.clone(),
                    source: e.into(),
                })?;
                writeln!(self.out).map_err(io_err(&self.path))
            }
        }
    }

    pub fn write_particles(
        &mut self,
        t: f64,
        x: &[f64],
        u: &[f64],
        gamma: &[f64],
    ) -> Result<(), CliError> {
        for i in 0..x.len() {
            let r = LagrangianRecord {
                t,
                i,
                x: x[i],
                u: u[i],
                gamma: gamma[i],
            };
            self.emit(&r, || {
                format!(
                    "{},{},{},{},{}",
                    fmt_f64(t),
                    i,
                    fmt_f64(r.x),
                    fmt_f64(r.u),
                    fmt_f64(r.gamma)
                )
            })?;
        }
        Ok(())
    }

    pub fn write_state(&mut self, s: &SimState) -> Result<(), CliError> {
        self.write_particles(s.t, &s.x, &s.u, &s.gamma)
    }

    pub fn write_field(&mut self, field: &EulerianField) -> Result<(), CliError> {
        for p in &field.samples {
            let r = EulerianRecord {
                t: field.t,
                x: p.x,
                rho: p.rho,
                u: p.u,
                gamma: p.gamma,
                rho_star: p.rho_star,
            };
            self.emit(&r, || {
                format!(
                    "{},{},{},{},{},{}",
                    fmt_f64(r.t),
                    fmt_f64(r.x),
                    fmt_f64(r.rho),
                    fmt_f64(r.u),
                    fmt_f64(r.gamma),
                    r.rho_star.map(fmt_f64).unwrap_or_default()
                )
            })?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}
