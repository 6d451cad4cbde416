//! Norm measurements along a trajectory and power-law fits of their decay.

use serde::{Deserialize, Serialize};

use crate::dynamics::{solve_velocity, ShearFrameState};
use crate::error::{Error, Result};
use crate::spectral::{ModeProjection, NormKind, SpectralField, Transformer};

/// Fraction of the Y half-width treated as the boundary layer.
const BOUNDARY_LAYER: f64 = 0.1;

pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 1e-6;

/// One sample of every tracked quantity. Field names are the NDJSON schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `‖W‖_{L²}`
    pub l2: f64,
    /// `‖W‖_{H^s}`
    pub hs: f64,
    /// `‖Y W‖_{L²}`
    pub yw_l2: f64,
    /// `hs + yw_l2`
    pub bar_hs: f64,
    /// `‖P_{≠0} u^x‖_{L²}` in the lab frame.
    pub ux_neq0_l2: f64,
    /// `‖u^y‖_{L²}`
    pub uy_l2: f64,
    pub dt_used: f64,
    pub boundary_frac: f64,
    pub step_count: u64,
}

/// Lab-frame `P_{≠0} u^x = P_{≠0}(U^X + t U^Y)`. The shear map preserves
/// measure and X-means equal x-means, so norms carry over unchanged.
pub fn lab_ux_neq0(w_hat: &SpectralField, t: f64) -> Result<SpectralField> {
    let vel = solve_velocity(w_hat, t)?;
    let mut ux = vel.ux_hat;
    ux.coef_mut().scaled_add(t.into(), vel.uy_hat.coef());
    Ok(ux.project(ModeProjection::NonzeroX))
}

pub fn record(transformer: &Transformer, state: &ShearFrameState, s: f64) -> Result<DiagnosticsRecord> {
    let w = &state.w_hat;
    let t = state.t;
    let hs = w.sobolev_norm(s, NormKind::Inhomogeneous)?;
    let physical = transformer.inverse(w)?;
    let yw_l2 = physical.weighted_l2_norm(|y| y);

    let vel = solve_velocity(w, t)?;
    let uy_l2 = vel.uy_hat.l2_norm();
    let ux_neq0_l2 = lab_ux_neq0(w, t)?.l2_norm();

    let grid = transformer.grid();
    let edge = (1.0 - BOUNDARY_LAYER) * grid.ly;
    let mut outer = 0.0;
    let mut total = 0.0;
    for ((_, m), v) in physical.values().indexed_iter() {
        let v2 = v * v;
        total += v2;
        if grid.y(m).abs() > edge {
            outer += v2;
        }
    }
    let boundary_frac = if total > 0.0 { outer / total } else { 0.0 };

    Ok(DiagnosticsRecord {
        t,
        l2: w.l2_norm(),
        hs,
        yw_l2,
        bar_hs: hs + yw_l2,
        ux_neq0_l2,
        uy_l2,
        dt_used: 0.0,
        boundary_frac,
        step_count: state.step_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStatus {
    Ok,
    Violated,
}

/// Polices the periodic truncation of the unbounded Y-line.
pub fn boundary_guard(rec: &DiagnosticsRecord, threshold: f64) -> BoundaryStatus {
    if rec.boundary_frac > threshold {
        BoundaryStatus::Violated
    } else {
        BoundaryStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub log_prefactor: f64,
    pub window: (f64, f64),
    pub n_samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares line through `(ln t, ln v)` for samples with `t` in the
/// closed window.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t_min, t_max) = window;
    if !(t_min < t_max) || t_min <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "fit window must satisfy 0 < t_min < t_max, got ({t_min}, {t_max})"
        )));
    }
    let mut points = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= t_min && *t <= t_max) {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { t, value: v });
        }
        points.push((t.ln(), v.ln()));
    }
    let n = points.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: n,
        });
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all fit samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        exponent: slope,
        exponent_stderr: stderr,
        log_prefactor: intercept,
        window,
        n_samples: n,
    })
}

/// Pulls `(t, field)` pairs out of a record history by NDJSON field name.
pub fn series(history: &[DiagnosticsRecord], field: &str) -> Result<Vec<(f64, f64)>> {
    let get: fn(&DiagnosticsRecord) -> f64 = match field {
        "l2" => |r| r.l2,
        "hs" => |r| r.hs,
        "yw_l2" => |r| r.yw_l2,
        "bar_hs" => |r| r.bar_hs,
        "ux_neq0_l2" => |r| r.ux_neq0_l2,
        "uy_l2" => |r| r.uy_l2,
        "dt_used" => |r| r.dt_used,
        "boundary_frac" => |r| r.boundary_frac,
        other => {
            return Err(Error::InvalidArgument(format!("unknown record field '{other}'")));
        }
    };
    Ok(history.iter().map(|r| (r.t, get(r))).collect())
}
