//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 guard abort,
//! 3 numerical failure, 4 configuration or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use shearback::diagnostics::{fit_decay, series};
use shearback::envelope::{self, EnvelopeParams};
use shearback::harness::{self, read_ndjson, Checkpoint, RunConfig, RunStatus};
use shearback::oracle;
use shearback::spectral::NormKind;
use shearback::Error;

#[derive(Parser)]
#[command(name = "shearback", version, about = "2D Euler near Couette flow in shear-back coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Dotted-key config file; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set sim.epsilon=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory, writing NDJSON, checkpoints and a summary.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Continue from this checkpoint, appending to `output.path`.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run every (s, epsilon) pair and tabulate lifespans.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[arg(long = "s", value_delimiter = ',')]
        s_values: Vec<f64>,
        /// Keep results in memory only.
        #[arg(long)]
        no_files: bool,
    },
    /// Stepping-free checks of the linear multiplier bounds.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Power-law fit of one NDJSON field.
    Fit {
        ndjson: PathBuf,
        #[arg(long, default_value = "uy_l2")]
        field: String,
        /// `t_min,t_max`; defaults to the last decade of the samples.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
    },
    /// Lifespan prediction and fitted a priori envelope for a run.
    Envelope {
        ndjson: PathBuf,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = envelope::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c_s: f64,
    },
    /// Print a checkpoint header and norms.
    CheckpointInfo { path: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Frozen-data damping norms over a list of times.
    Damping {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Supremum of the elliptic symbol ratio over the grid lattice.
    Elliptic {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1.0)]
        s1: f64,
        #[arg(long, default_value_t = 1.0)]
        s2: f64,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Zero-mode velocity against the weighted vorticity for seeded profiles.
    Hardy {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

/// Failure carrying the process exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::InvalidArgument(_) | Error::GridMismatch { .. } | Error::InvalidGrid(_) => 4,
            Error::Numerical { .. } => 3,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Fail>;

fn load_config(args: &ConfigArgs) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Fail(1, format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&args.overrides)?;
    Ok(cfg)
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("json values always serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn geometric(lo: f64, hi: f64, per_octave: u32) -> Vec<f64> {
    let n = ((hi / lo).log2() * per_octave as f64).round() as i32;
    (0..=n).map(|i| lo * 2f64.powf(i as f64 / per_octave as f64)).collect()
}

fn cmd_run(args: &ConfigArgs, resume: Option<&Path>) -> CliResult<u8> {
    let cfg = load_config(args)?;
    let summary = match resume {
        Some(ck) => harness::run::resume_to_files(&cfg, ck)?,
        None => harness::run_to_files(&cfg)?,
    };
    print_json(&serde_json::to_value(&summary).map_err(Error::from)?);
    if let Some(reason) = &summary.reason {
        eprintln!("{reason}");
    }
    Ok(summary.status.exit_code() as u8)
}

fn cmd_sweep(args: &ConfigArgs, epsilons: &[f64], s_values: &[f64], no_files: bool) -> CliResult<u8> {
    let cfg = load_config(args)?;
    let s_values = if s_values.is_empty() { vec![cfg.sim.s] } else { s_values.to_vec() };
    let summary = harness::sweep(&cfg, epsilons, &s_values, !no_files)?;
    {
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), "{}", summary.table());
    }
    if !no_files {
        let path = harness::output::sibling(Path::new(&cfg.output.path), "sweep.json");
        let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
        std::fs::write(&path, text).map_err(|e| Fail(1, format!("{}: {e}", path.display())))?;
    }
    Ok(0)
}

fn cmd_oracle(which: &OracleCommand) -> CliResult<u8> {
    match which {
        OracleCommand::Damping { cfg, s, t } => {
            let cfg = load_config(cfg)?;
            let w = harness::make_initial_data(&cfg)?.w_hat;
            let times = if t.is_empty() { geometric(1.0, 1024.0, 8) } else { t.clone() };
            let mut rows = Vec::new();
            for &ti in &times {
                let norm = oracle::damping_norm(&w, ti, *s)?;
                let ratio = oracle::damping_bound_ratio(&w, ti, *s)?;
                rows.push(json!({"t": ti, "damping_norm": norm, "bound_ratio": ratio}));
            }
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r["t"].as_f64().unwrap(), r["damping_norm"].as_f64().unwrap()))
                .collect();
            let lo = times.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
            let hi = times.iter().cloned().fold(0.0, f64::max);
            let slope = fit_decay(&pts, (lo, hi)).ok().map(|f| f.exponent);
            print_json(&json!({"s": s, "rows": rows, "fitted_exponent": slope, "predicted_exponent": -s}));
        }
        OracleCommand::Elliptic { cfg, s1, s2, t } => {
            let cfg = load_config(cfg)?;
            let times = if t.is_empty() { oracle::default_t_values() } else { t.clone() };
            let report = oracle::elliptic_symbol_check(&cfg.grid, *s1, *s2, &times)?;
            let spread = report.spread();
            let mut v = serde_json::to_value(&report).map_err(Error::from)?;
            v["spread"] = json!(spread);
            print_json(&v);
        }
        OracleCommand::Hardy { cfg, count } => {
            let cfg = load_config(cfg)?;
            let pairs = harness::hardy_survey(&cfg, *count)?;
            let mut ratios: Vec<f64> = pairs.iter().map(|p| p.ratio()).collect();
            let rows: Vec<_> = pairs
                .iter()
                .enumerate()
                .map(|(i, p)| json!({"seed": cfg.init.seed + i as u64, "lhs": p.lhs, "rhs": p.rhs, "ratio": p.ratio()}))
                .collect();
            ratios.sort_by(f64::total_cmp);
            let median = ratios.get(ratios.len() / 2).copied();
            let max = ratios.last().copied();
            print_json(&json!({"rows": rows, "median_ratio": median, "max_ratio": max}));
        }
    }
    Ok(0)
}

fn cmd_fit(path: &Path, field: &str, window: Option<&[f64]>) -> CliResult<u8> {
    let rows = read_ndjson(path)?;
    let history: Vec<_> = rows.iter().map(|r| r.record()).collect();
    let ser = series(&history, field)?;
    let window = match window {
        Some(&[lo, hi]) => (lo, hi),
        Some(_) => return Err(Fail(4, "--window takes exactly two values, t_min,t_max".into())),
        None => {
            let t_max = ser.last().map(|p| p.0).unwrap_or(0.0);
            (t_max / 10.0, t_max)
        }
    };
    let fit = fit_decay(&ser, window)?;
    print_json(&json!({"field": field, "fit": fit}));
    Ok(0)
}

fn cmd_envelope(path: &Path, s: Option<f64>, epsilon: Option<f64>, delta: f64, c_s: f64) -> CliResult<u8> {
    let rows = read_ndjson(path)?;
    let first = rows
        .first()
        .ok_or_else(|| Fail(4, format!("{}: no samples", path.display())))?;
    let s = s.unwrap_or(first.s);
    let eps = epsilon.unwrap_or(first.epsilon);
    let history: Vec<_> = rows.iter().map(|r| r.record()).collect();
    let p = EnvelopeParams::new(s, delta, eps, c_s, 0.0)?;
    let c = envelope::fit_gronwall_constant(&history, &p)?;
    let p = p.with_gronwall_c(c);
    let n0 = first.bar_hs;
    let max_bar = history.iter().map(|r| r.bar_hs).fold(0.0, f64::max);
    print_json(&json!({
        "s": s,
        "epsilon": eps,
        "beta_s": p.beta_s,
        "delta_s": p.delta_s,
        "predicted_lifespan": envelope::predicted_lifespan(&p),
        "gronwall_c": c,
        "envelope_blowup_time": envelope::envelope_blowup_time(&p, n0),
        "initial_bar_hs": n0,
        "max_bar_hs": max_bar,
        "within_three_epsilon": max_bar <= 3.0 * eps,
    }));
    Ok(0)
}

fn cmd_checkpoint_info(path: &Path) -> CliResult<u8> {
    let ck = Checkpoint::read(path)?;
    let g = *ck.state.grid();
    print_json(&json!({
        "nx": g.nx,
        "ny": g.ny,
        "ly": g.ly,
        "t": ck.state.t,
        "s": ck.s,
        "epsilon": ck.epsilon,
        "l2": ck.state.w_hat.l2_norm(),
        "hs": ck.state.w_hat.sobolev_norm(ck.s, NormKind::Inhomogeneous)?,
    }));
    Ok(0)
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Run { cfg, resume } => cmd_run(&cfg, resume.as_deref()),
        Command::Sweep {
            cfg,
            epsilons,
            s_values,
            no_files,
        } => cmd_sweep(&cfg, &epsilons, &s_values, no_files),
        Command::Oracle { which } => cmd_oracle(&which),
        Command::Fit { ndjson, field, window } => cmd_fit(&ndjson, &field, window.as_deref()),
        Command::Envelope {
            ndjson,
            s,
            epsilon,
            delta,
            c_s,
        } => cmd_envelope(&ndjson, s, epsilon, delta, c_s),
        Command::CheckpointInfo { path } => cmd_checkpoint_info(&path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => {
            if code == RunStatus::Completed.exit_code() as u8 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(code)
            }
        }
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
