//! A single configured trajectory: stepping, sampling, guards, summary.
//!
//! Samples land exactly on multiples of `every_steps · dt` and on
//! `10^{m/per_decade}` for `t ≥ 1`; the step before a sample is shortened
//! to hit it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::config::RunConfig;
use super::init::make_initial_data;
use super::output::{sibling, NdjsonWriter, RecordRow};
use crate::diagnostics::{self, boundary_guard, fit_decay, BoundaryStatus, DecayFit, DiagnosticsRecord};
use crate::dynamics::{BlowupGuard, GuardViolation, ShearFrameState, Stepper};
use crate::envelope::{self, EnvelopeParams};
use crate::error::{Error, Result};
use crate::spectral::NormKind;

/// `T_grow` is the first time `bar_hs` exceeds this multiple of its
/// initial value.
pub const GROWTH_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    GuardAbort,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::GuardAbort => 2,
            RunStatus::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub reason: Option<String>,
    pub violation: Option<GuardViolation>,
    pub s: f64,
    pub epsilon: f64,
    pub t_final: f64,
    pub steps: u64,
    pub records: usize,
    pub initial: DiagnosticsRecord,
    pub last: DiagnosticsRecord,
    pub max_hs: f64,
    pub max_bar_hs: f64,
    /// `max |‖W‖_{L²} − ‖W₀‖_{L²}| / ‖W₀‖_{L²}` over samples.
    pub l2_drift: f64,
    pub t_grow: Option<f64>,
    pub uy_fit: Option<DecayFit>,
    pub ux_fit: Option<DecayFit>,
    pub beta_s: f64,
    pub delta_s: f64,
    pub predicted_lifespan: Option<f64>,
    pub gronwall_c: Option<f64>,
    pub envelope_blowup_time: Option<f64>,
}

/// Where samples and checkpoints go.
pub trait RunSink {
    fn record(&mut self, row: &RecordRow) -> Result<()>;
    fn checkpoint(&mut self, ck: &Checkpoint, abort: bool) -> Result<()>;
    fn finish(&mut self, _summary: &RunSummary) -> Result<()> {
        Ok(())
    }
}

/// Keeps nothing; the in-memory history on [`Simulation`] is enough.
#[derive(Debug, Default)]
pub struct NullSink;

impl RunSink for NullSink {
    fn record(&mut self, _: &RecordRow) -> Result<()> {
        Ok(())
    }
    fn checkpoint(&mut self, _: &Checkpoint, _: bool) -> Result<()> {
        Ok(())
    }
}

/// NDJSON at `output.path`; `<stem>.ckpt`, `<stem>.abort.ckpt` and
/// `<stem>.summary.json` beside it.
pub struct FileSink {
    writer: NdjsonWriter,
    ndjson: PathBuf,
}

impl FileSink {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(FileSink {
            writer: NdjsonWriter::create(path)?,
            ndjson: path.to_path_buf(),
        })
    }

    pub fn append(path: &Path) -> Result<Self> {
        Ok(FileSink {
            writer: NdjsonWriter::append(path)?,
            ndjson: path.to_path_buf(),
        })
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        sibling(&self.ndjson, "ckpt")
    }

    pub fn abort_checkpoint_path(&self) -> PathBuf {
        sibling(&self.ndjson, "abort.ckpt")
    }

    pub fn summary_path(&self) -> PathBuf {
        sibling(&self.ndjson, "summary.json")
    }
}

impl RunSink for FileSink {
    fn record(&mut self, row: &RecordRow) -> Result<()> {
        self.writer.write(row)
    }

    fn checkpoint(&mut self, ck: &Checkpoint, abort: bool) -> Result<()> {
        self.writer.flush()?;
        let path = if abort {
            self.abort_checkpoint_path()
        } else {
            self.checkpoint_path()
        };
        ck.write(&path)
    }

    fn finish(&mut self, summary: &RunSummary) -> Result<()> {
        self.writer.flush()?;
        let path = self.summary_path();
        let text = serde_json::to_string_pretty(summary)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

pub struct Simulation {
    cfg: RunConfig,
    stepper: Stepper,
    guard: BlowupGuard,
    state: ShearFrameState,
    history: Vec<DiagnosticsRecord>,
    reference: Option<DiagnosticsRecord>,
    t_grow: Option<f64>,
    /// Whether the current state still needs its sample written.
    fresh: bool,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let state = make_initial_data(cfg)?;
        Self::with_state(cfg, state, None, true)
    }

    /// Continues from a checkpoint. `reference` is the original `t = 0`
    /// sample, if known; otherwise the resume point plays that role.
    pub fn resume(cfg: &RunConfig, ck: Checkpoint, reference: Option<DiagnosticsRecord>) -> Result<Self> {
        cfg.validate()?;
        let g = ck.state.grid();
        if (g.nx, g.ny, g.ly) != (cfg.grid.nx, cfg.grid.ny, cfg.grid.ly) {
            return Err(Error::GridMismatch {
                expected: format!("{}x{} ly={}", cfg.grid.nx, cfg.grid.ny, cfg.grid.ly),
                found: format!("{}x{} ly={}", g.nx, g.ny, g.ly),
            });
        }
        if ck.s != cfg.sim.s || ck.epsilon != cfg.sim.epsilon {
            return Err(Error::Config(format!(
                "checkpoint has s = {}, epsilon = {}; config has s = {}, epsilon = {}",
                ck.s, ck.epsilon, cfg.sim.s, cfg.sim.epsilon
            )));
        }
        let mut state = ck.state;
        let w_hat = crate::spectral::SpectralField::from_coef(cfg.grid, state.w_hat.into_coef())?;
        state.w_hat = w_hat;
        state.step_count = (state.t / cfg.sim.dt).round() as u64;
        Self::with_state(cfg, state, reference, false)
    }

    fn with_state(
        cfg: &RunConfig,
        state: ShearFrameState,
        reference: Option<DiagnosticsRecord>,
        fresh: bool,
    ) -> Result<Self> {
        let stepper = Stepper::new(cfg.grid, cfg.stepper_config())?;
        Ok(Simulation {
            cfg: cfg.clone(),
            guard: cfg.blowup_guard(),
            stepper,
            state,
            history: Vec::new(),
            reference,
            t_grow: None,
            fresh,
        })
    }

    pub fn state(&self) -> &ShearFrameState {
        &self.state
    }

    pub fn history(&self) -> &[DiagnosticsRecord] {
        &self.history
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    fn checkpoint_of(&self, state: &ShearFrameState) -> Checkpoint {
        Checkpoint {
            s: self.cfg.sim.s,
            epsilon: self.cfg.sim.epsilon,
            state: state.clone(),
        }
    }

    /// The first sample time strictly after `t` (by a relative margin).
    pub fn next_sample_time(&self, t: f64) -> f64 {
        let t_end = self.cfg.sim.t_end;
        let margin = 1e-9 * t.abs().max(1.0);
        let period = self.cfg.output.every_steps as f64 * self.cfg.sim.dt;
        let regular = (((t + margin) / period).floor() + 1.0) * period;
        let mut next = regular.min(t_end);
        let pd = self.cfg.output.per_decade;
        if pd > 0 {
            let geo = if t + margin < 1.0 {
                1.0
            } else {
                let pd = pd as f64;
                let mut m = ((t + margin).log10() * pd).floor() + 1.0;
                while 10f64.powf(m / pd) <= t + margin {
                    m += 1.0;
                }
                10f64.powf(m / pd)
            };
            next = next.min(geo);
        }
        next
    }

    fn sample(&mut self, dt_used: f64, sink: &mut dyn RunSink) -> Result<Option<GuardViolation>> {
        let mut rec = diagnostics::record(self.stepper.transformer(), &self.state, self.cfg.sim.s)?;
        rec.dt_used = dt_used;
        if self.reference.is_none() {
            self.reference = Some(rec);
        }
        self.history.push(rec);
        sink.record(&RecordRow::new(&rec, self.cfg.sim.s, self.cfg.sim.epsilon))?;
        if boundary_guard(&rec, self.cfg.guard.boundary_threshold) == BoundaryStatus::Violated {
            return Ok(Some(GuardViolation::Boundary {
                boundary_frac: rec.boundary_frac,
            }));
        }
        Ok(None)
    }

    fn bar_hs(&self) -> Result<f64> {
        let hs = self.state.w_hat.sobolev_norm(self.cfg.sim.s, NormKind::Inhomogeneous)?;
        let yw = self
            .stepper
            .transformer()
            .inverse(&self.state.w_hat)?
            .weighted_l2_norm(|y| y);
        Ok(hs + yw)
    }

    /// Integrates to `sim.t_end`, stopping early on a guard or a numerical
    /// failure. Either way a summary is returned.
    pub fn run(&mut self, sink: &mut dyn RunSink) -> Result<RunSummary> {
        let t_end = self.cfg.sim.t_end;
        let every = self.cfg.output.checkpoint_every;
        let mut status = RunStatus::Completed;
        let mut reason = None;
        let mut violation = None;

        if self.fresh {
            self.fresh = false;
            violation = self.sample(0.0, sink)?;
        }
        let mut last_bar = (self.state.t, self.bar_hs()?);
        let grow_at = self.reference.map(|r| GROWTH_FACTOR * r.bar_hs).unwrap_or(GROWTH_FACTOR * last_bar.1);

        while violation.is_none() && t_end - self.state.t > 1e-9 * t_end.max(1.0) {
            let target = self.next_sample_time(self.state.t);
            let mut dt = self.stepper.next_dt(&self.state)?;
            let landed = self.state.t + dt >= target - 1e-12 * target.max(1.0);
            if landed {
                dt = target - self.state.t;
            }
            match self.stepper.step_rk4(&self.state, dt) {
                Ok(mut next) => {
                    if landed {
                        next.t = target;
                    }
                    self.state = next;
                }
                Err(Error::Numerical {
                    t,
                    reason: why,
                    last_valid,
                }) => {
                    sink.checkpoint(&self.checkpoint_of(&last_valid), true)?;
                    status = RunStatus::NumericalFailure;
                    reason = Some(format!("t = {t}: {why}"));
                    break;
                }
                Err(e) => return Err(e),
            }

            let bar = self.bar_hs()?;
            if self.t_grow.is_none() && grow_at > 0.0 && bar > grow_at {
                let (t0, b0) = last_bar;
                let frac = if bar > b0 { (grow_at - b0) / (bar - b0) } else { 1.0 };
                self.t_grow = Some(t0 + frac.clamp(0.0, 1.0) * (self.state.t - t0));
            }
            last_bar = (self.state.t, bar);

            violation = self.stepper.check_guard(&self.state, &self.guard)?;
            if landed || violation.is_some() {
                let boundary = self.sample(dt, sink)?;
                violation = violation.or(boundary);
            }
            if violation.is_some() {
                break;
            }
            if every > 0 && self.state.step_count % every == 0 {
                sink.checkpoint(&self.checkpoint_of(&self.state), false)?;
            }
        }

        if let Some(v) = &violation {
            status = RunStatus::GuardAbort;
            reason = Some(v.to_string());
            sink.checkpoint(&self.checkpoint_of(&self.state), true)?;
        } else if status == RunStatus::Completed && every > 0 {
            sink.checkpoint(&self.checkpoint_of(&self.state), false)?;
        }

        let summary = self.summarize(status, reason, violation)?;
        sink.finish(&summary)?;
        Ok(summary)
    }

    fn summarize(
        &self,
        status: RunStatus,
        reason: Option<String>,
        violation: Option<GuardViolation>,
    ) -> Result<RunSummary> {
        let (s, eps) = (self.cfg.sim.s, self.cfg.sim.epsilon);
        let last = *self
            .history
            .last()
            .ok_or_else(|| Error::InvalidArgument("run produced no samples".into()))?;
        let initial = self.reference.unwrap_or(self.history[0]);
        let l2_drift = if initial.l2 > 0.0 {
            self.history
                .iter()
                .map(|r| (r.l2 - initial.l2).abs() / initial.l2)
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let window = (self.cfg.sim.t_end / 10.0, self.cfg.sim.t_end);
        let fit = |field: &str| {
            diagnostics::series(&self.history, field)
                .and_then(|ser| fit_decay(&ser, window))
                .ok()
        };
        let (beta_s, delta_s) = envelope::exponents(s, self.cfg.envelope.delta)?;
        let params = EnvelopeParams::new(s, self.cfg.envelope.delta, eps, self.cfg.envelope.c_s, 0.0).ok();
        let predicted_lifespan = params.as_ref().map(envelope::predicted_lifespan);
        let gronwall_c = params
            .as_ref()
            .and_then(|p| envelope::fit_gronwall_constant(&self.history, p).ok());
        let envelope_blowup_time = match (params, gronwall_c) {
            (Some(p), Some(c)) => envelope::envelope_blowup_time(&p.with_gronwall_c(c), self.history[0].bar_hs),
            _ => None,
        };

        Ok(RunSummary {
            status,
            reason,
            violation,
            s,
            epsilon: eps,
            t_final: self.state.t,
            steps: self.state.step_count,
            records: self.history.len(),
            initial,
            last,
            max_hs: self.history.iter().map(|r| r.hs).fold(0.0, f64::max),
            max_bar_hs: self.history.iter().map(|r| r.bar_hs).fold(0.0, f64::max),
            l2_drift,
            t_grow: self.t_grow,
            uy_fit: fit("uy_l2"),
            ux_fit: fit("ux_neq0_l2"),
            beta_s,
            delta_s,
            predicted_lifespan,
            gronwall_c,
            envelope_blowup_time,
        })
    }
}

/// Runs `cfg` from its initial data, writing files next to `output.path`.
pub fn run_to_files(cfg: &RunConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(cfg)?;
    let mut sink = FileSink::create(Path::new(&cfg.output.path))?;
    sim.run(&mut sink)
}

/// Resumes from the checkpoint beside `output.path`, appending samples.
pub fn resume_to_files(cfg: &RunConfig, checkpoint: &Path) -> Result<RunSummary> {
    let ck = Checkpoint::read(checkpoint)?;
    let ndjson = Path::new(&cfg.output.path);
    let reference = super::output::read_ndjson(ndjson)
        .ok()
        .and_then(|rows| rows.first().map(RecordRow::record));
    let mut sim = Simulation::resume(cfg, ck, reference)?;
    let mut sink = FileSink::append(ndjson)?;
    sim.run(&mut sink)
}
