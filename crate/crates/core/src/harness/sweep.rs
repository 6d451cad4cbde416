//! Lifespan sweeps over `(s, ε)`.
//!
//! Cells run in parallel and independently: each has its own output file,
//! and a failing cell is reported without stopping the others.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::{FileSink, NullSink, RunStatus, Simulation};
use crate::envelope;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub s: f64,
    pub epsilon: f64,
    pub output: Option<PathBuf>,
    pub status: Option<RunStatus>,
    pub error: Option<String>,
    pub t_final: Option<f64>,
    pub t_grow: Option<f64>,
    pub predicted_lifespan: Option<f64>,
    pub uy_exponent: Option<f64>,
    pub ux_exponent: Option<f64>,
    pub max_bar_hs: Option<f64>,
}

/// Observed `d ln T_grow / d ln ε` for one `s`, next to `−δ_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanSlope {
    pub s: f64,
    pub observed: Option<f64>,
    pub predicted: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: Vec<SweepCell>,
    pub slopes: Vec<LifespanSlope>,
}

fn cell_path(template: &Path, s: f64, eps: f64) -> PathBuf {
    let stem = template
        .file_stem()
        .map(|x| x.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    template.with_file_name(format!("{stem}_s{s}_eps{eps}.ndjson"))
}

fn run_cell(template: &RunConfig, s: f64, eps: f64, write_files: bool) -> SweepCell {
    let mut cfg = template.clone();
    cfg.sim.s = s;
    cfg.sim.epsilon = eps;
    let path = cell_path(Path::new(&template.output.path), s, eps);
    cfg.output.path = path.to_string_lossy().into_owned();
    let mut cell = SweepCell {
        s,
        epsilon: eps,
        output: write_files.then(|| path.clone()),
        status: None,
        error: None,
        t_final: None,
        t_grow: None,
        predicted_lifespan: None,
        uy_exponent: None,
        ux_exponent: None,
        max_bar_hs: None,
    };
    let outcome = Simulation::new(&cfg).and_then(|mut sim| {
        if write_files {
            sim.run(&mut FileSink::create(&path)?)
        } else {
            sim.run(&mut NullSink)
        }
    });
    match outcome {
        Ok(sum) => {
            cell.status = Some(sum.status);
            cell.error = sum.reason;
            cell.t_final = Some(sum.t_final);
            cell.t_grow = sum.t_grow;
            cell.predicted_lifespan = sum.predicted_lifespan;
            cell.uy_exponent = sum.uy_fit.map(|f| f.exponent);
            cell.ux_exponent = sum.ux_fit.map(|f| f.exponent);
            cell.max_bar_hs = Some(sum.max_bar_hs);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs every `(s, ε)` pair from `template`. Cell files are named
/// `<stem>_s<s>_eps<ε>.ndjson` beside `output.path` when `write_files`.
pub fn sweep(template: &RunConfig, epsilons: &[f64], s_values: &[f64], write_files: bool) -> Result<SweepSummary> {
    if epsilons.is_empty() || s_values.is_empty() {
        return Err(Error::Config("sweep needs at least one epsilon and one s".into()));
    }
    let pairs: Vec<(f64, f64)> = s_values
        .iter()
        .flat_map(|&s| epsilons.iter().map(move |&e| (s, e)))
        .collect();
    let cells: Vec<SweepCell> = pairs
        .par_iter()
        .map(|&(s, e)| run_cell(template, s, e, write_files))
        .collect();

    let mut slopes = Vec::new();
    for &s in s_values {
        let points: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.s == s && c.epsilon > 0.0)
            .filter_map(|c| c.t_grow.map(|t| (c.epsilon.ln(), t.ln())))
            .collect();
        let predicted = match envelope::exponents(s, template.envelope.delta) {
            Ok((_, d)) => -d,
            Err(_) => f64::NAN,
        };
        slopes.push(LifespanSlope {
            s,
            observed: slope(&points),
            predicted,
            n_points: points.len(),
        });
    }
    Ok(SweepSummary { cells, slopes })
}

impl SweepSummary {
    /// Fixed-width text table, one line per cell, then one per slope.
    pub fn table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4e}"));
        let mut out = format!(
            "{:>6} {:>10} {:>12} {:>11} {:>11} {:>11} {:>11}  {}\n",
            "s", "epsilon", "status", "t_grow", "T_eps", "uy_exp", "ux_exp", "note"
        );
        for c in &self.cells {
            let status = match c.status {
                Some(RunStatus::Completed) => "completed",
                Some(RunStatus::GuardAbort) => "guard_abort",
                Some(RunStatus::NumericalFailure) => "numerical",
                None => "error",
            };
            out.push_str(&format!(
                "{:>6} {:>10} {:>12} {:>11} {:>11} {:>11} {:>11}  {}\n",
                c.s,
                c.epsilon,
                status,
                opt(c.t_grow),
                opt(c.predicted_lifespan),
                opt(c.uy_exponent),
                opt(c.ux_exponent),
                c.error.as_deref().unwrap_or("")
            ));
        }
        for sl in &self.slopes {
            out.push_str(&format!(
                "s = {}: d ln T_grow / d ln eps = {} (predicted {:.4}, {} points)\n",
                sl.s,
                sl.observed.map_or_else(|| "-".into(), |v| format!("{v:.4}")),
                sl.predicted,
                sl.n_points
            ));
        }
        out
    }
}
