//! NDJSON time series: one [`RecordRow`] per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

/// A [`DiagnosticsRecord`] plus the run metadata a reader needs to group
/// rows from several runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordRow {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    pub yw_l2: f64,
    pub bar_hs: f64,
    pub ux_neq0_l2: f64,
    pub uy_l2: f64,
    pub dt_used: f64,
    pub boundary_frac: f64,
    pub step_count: u64,
    pub s: f64,
    pub epsilon: f64,
}

impl RecordRow {
    pub fn new(r: &DiagnosticsRecord, s: f64, epsilon: f64) -> Self {
        RecordRow {
            t: r.t,
            l2: r.l2,
            hs: r.hs,
            yw_l2: r.yw_l2,
            bar_hs: r.bar_hs,
            ux_neq0_l2: r.ux_neq0_l2,
            uy_l2: r.uy_l2,
            dt_used: r.dt_used,
            boundary_frac: r.boundary_frac,
            step_count: r.step_count,
            s,
            epsilon,
        }
    }

    pub fn record(&self) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t: self.t,
            l2: self.l2,
            hs: self.hs,
            yw_l2: self.yw_l2,
            bar_hs: self.bar_hs,
            ux_neq0_l2: self.ux_neq0_l2,
            uy_l2: self.uy_l2,
            dt_used: self.dt_used,
            boundary_frac: self.boundary_frac,
            step_count: self.step_count,
        }
    }

    pub fn parse(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }

    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub struct NdjsonWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl NdjsonWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Self::open(path, false)
    }

    pub fn append(path: &Path) -> Result<Self> {
        Self::open(path, true)
    }

    fn open(path: &Path, append: bool) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(NdjsonWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn write(&mut self, row: &RecordRow) -> Result<()> {
        let line = row.to_line()?;
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads every non-blank line; the first bad line is an error.
pub fn read_ndjson(path: &Path) -> Result<Vec<RecordRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = RecordRow::parse(&line).map_err(|e| {
            Error::InvalidArgument(format!("{}:{}: {e}", path.display(), n + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// `run.ndjson` becomes `run.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}
