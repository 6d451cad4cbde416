//! Flat dotted-key run configuration.
//!
//! One `key = value` per line; `#` starts a comment. Real values accept a
//! plain number, `pi`, or a multiple written `4pi` / `4*pi`. Every key has a
//! default, so an empty file is a valid configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{BlowupGuard, StepperConfig};
use crate::error::{Error, Result};
use crate::spectral::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitFamily {
    /// `A sin(X) exp(−Y²)`.
    Single,
    /// Seeded random phases on a block of modes under a Gaussian envelope.
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub s: f64,
    pub epsilon: f64,
    pub t_end: f64,
    pub dt: f64,
    pub cfl: bool,
    pub cfl_number: f64,
    pub linear_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    pub family: InitFamily,
    pub seed: u64,
    pub kmax: u32,
    pub jmax: u32,
    pub spectral_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub path: String,
    pub every_steps: u64,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_every: u64,
    /// Extra log-spaced samples per decade of `t`, starting at `t = 1`.
    pub per_decade: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    pub delta: f64,
    pub c_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardConfig {
    pub boundary_threshold: f64,
    pub norm_factor: f64,
    pub shell_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub sim: SimConfig,
    pub init: InitConfig,
    pub output: OutputConfig,
    pub envelope: EnvelopeConfig,
    pub guard: GuardConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            sim: SimConfig {
                s: 3.0,
                epsilon: 0.05,
                t_end: 100.0,
                dt: 0.1,
                cfl: true,
                cfl_number: 0.4,
                linear_mode: false,
            },
            init: InitConfig {
                family: InitFamily::Single,
                seed: 0,
                kmax: 2,
                jmax: 8,
                spectral_slope: 2.0,
            },
            output: OutputConfig {
                path: "run.ndjson".into(),
                every_steps: 10,
                checkpoint_every: 1000,
                per_decade: 16,
            },
            envelope: EnvelopeConfig {
                delta: 0.1,
                c_s: 1.0,
            },
            guard: GuardConfig {
                boundary_threshold: 1e-6,
                norm_factor: 10.0,
                shell_fraction: 0.01,
            },
        }
    }
}

pub const KEYS: &[&str] = &[
    "grid.nx",
    "grid.ny",
    "grid.ly",
    "grid.dealias_fraction",
    "sim.s",
    "sim.epsilon",
    "sim.t_end",
    "sim.dt",
    "sim.cfl",
    "sim.cfl_number",
    "sim.linear_mode",
    "init.family",
    "init.seed",
    "init.kmax",
    "init.jmax",
    "init.spectral_slope",
    "output.path",
    "output.every_steps",
    "output.checkpoint_every",
    "output.per_decade",
    "envelope.delta",
    "envelope.c_s",
    "guard.boundary_threshold",
    "guard.norm_factor",
    "guard.shell_fraction",
];

fn config_err(line: Option<usize>, msg: impl std::fmt::Display) -> Error {
    match line {
        Some(n) => Error::Config(format!("line {n}: {msg}")),
        None => Error::Config(msg.to_string()),
    }
}

/// Parses a real number, `pi`, or `<number>pi` / `<number>*pi`.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let value = if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let factor = if head.is_empty() {
            1.0
        } else if head == "-" {
            -1.0
        } else {
            head.parse::<f64>()
                .map_err(|_| config_err(None, format!("invalid real '{text}'")))?
        };
        factor * PI
    } else {
        t.parse::<f64>()
            .map_err(|_| config_err(None, format!("invalid real '{text}'")))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(config_err(None, format!("non-finite real '{text}'")))
    }
}

fn parse_bool(text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(config_err(None, format!("invalid boolean '{other}'"))),
    }
}

fn parse_int<T: std::str::FromStr>(text: &str) -> Result<T> {
    text.trim()
        .parse::<T>()
        .map_err(|_| config_err(None, format!("invalid integer '{}'", text.trim())))
}

/// Splits `key=value` as given to `--set`.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| config_err(None, format!("override '{text}' is not key=value")))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(config_err(None, format!("override '{text}' has an empty key")));
    }
    Ok((key.to_string(), v.trim().to_string()))
}

impl RunConfig {
    /// Parses config text over the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(Some(n), "expected 'key = value'"))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(config_err(Some(n), format!("duplicate key '{key}'")));
            }
            cfg.set(key, value.trim())
                .map_err(|e| config_err(Some(n), strip_prefix(e)))?;
            seen.push(key.to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one dotted key. Does not validate cross-field invariants.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid.nx" => self.grid.nx = parse_int(value)?,
            "grid.ny" => self.grid.ny = parse_int(value)?,
            "grid.ly" => self.grid.ly = parse_real(value)?,
            "grid.dealias_fraction" => self.grid.dealias_fraction = parse_real(value)?,
            "sim.s" => self.sim.s = parse_real(value)?,
            "sim.epsilon" => self.sim.epsilon = parse_real(value)?,
            "sim.t_end" => self.sim.t_end = parse_real(value)?,
            "sim.dt" => self.sim.dt = parse_real(value)?,
            "sim.cfl" => self.sim.cfl = parse_bool(value)?,
            "sim.cfl_number" => self.sim.cfl_number = parse_real(value)?,
            "sim.linear_mode" => self.sim.linear_mode = parse_bool(value)?,
            "init.family" => {
                self.init.family = match value.trim() {
                    "single" => InitFamily::Single,
                    "multi" => InitFamily::Multi,
                    other => return Err(config_err(None, format!("unknown family '{other}'"))),
                }
            }
            "init.seed" => self.init.seed = parse_int(value)?,
            "init.kmax" => self.init.kmax = parse_int(value)?,
            "init.jmax" => self.init.jmax = parse_int(value)?,
            "init.spectral_slope" => self.init.spectral_slope = parse_real(value)?,
            "output.path" => {
                let v = value.trim().trim_matches('"');
                if v.is_empty() {
                    return Err(config_err(None, "output.path is empty"));
                }
                self.output.path = v.to_string();
            }
            "output.every_steps" => self.output.every_steps = parse_int(value)?,
            "output.checkpoint_every" => self.output.checkpoint_every = parse_int(value)?,
            "output.per_decade" => self.output.per_decade = parse_int(value)?,
            "envelope.delta" => self.envelope.delta = parse_real(value)?,
            "envelope.c_s" => self.envelope.c_s = parse_real(value)?,
            "guard.boundary_threshold" => self.guard.boundary_threshold = parse_real(value)?,
            "guard.norm_factor" => self.guard.norm_factor = parse_real(value)?,
            "guard.shell_fraction" => self.guard.shell_fraction = parse_real(value)?,
            other => return Err(config_err(None, format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order, then validates.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = parse_override(o.as_ref())?;
            self.set(&k, &v)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid
            .validate()
            .map_err(|e| config_err(None, strip_prefix(e)))?;
        let sim = &self.sim;
        if !(sim.s > 1.0) {
            return Err(config_err(None, format!("sim.s must exceed 1, got {}", sim.s)));
        }
        if !(sim.epsilon >= 0.0) {
            return Err(config_err(None, format!("sim.epsilon must be >= 0, got {}", sim.epsilon)));
        }
        if !(sim.t_end > 0.0) {
            return Err(config_err(None, format!("sim.t_end must be positive, got {}", sim.t_end)));
        }
        if !(sim.dt > 0.0) {
            return Err(config_err(None, format!("sim.dt must be positive, got {}", sim.dt)));
        }
        if !(sim.cfl_number > 0.0) {
            return Err(config_err(None, "sim.cfl_number must be positive"));
        }
        if self.output.every_steps == 0 {
            return Err(config_err(None, "output.every_steps must be at least 1"));
        }
        if !(self.envelope.delta > 0.0) || !(self.envelope.c_s > 0.0) {
            return Err(config_err(None, "envelope.delta and envelope.c_s must be positive"));
        }
        if !(self.guard.boundary_threshold >= 0.0)
            || !(self.guard.norm_factor > 0.0)
            || !(self.guard.shell_fraction > 0.0)
        {
            return Err(config_err(None, "guard thresholds must be positive"));
        }
        Ok(())
    }

    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig {
            cfl: self.sim.cfl,
            cfl_number: self.sim.cfl_number,
            dt_max: self.sim.dt,
            linear: self.sim.linear_mode,
        }
    }

    pub fn blowup_guard(&self) -> BlowupGuard {
        BlowupGuard {
            s: self.sim.s,
            epsilon: self.sim.epsilon,
            norm_factor: self.guard.norm_factor,
            shell_fraction: self.guard.shell_fraction,
        }
    }

    /// Renders the config back to dotted-key text that parses to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let family = match self.init.family {
            InitFamily::Single => "single",
            InitFamily::Multi => "multi",
        };
        let entries: Vec<(&str, String)> = vec![
            ("grid.nx", self.grid.nx.to_string()),
            ("grid.ny", self.grid.ny.to_string()),
            ("grid.ly", format!("{:?}", self.grid.ly)),
            ("grid.dealias_fraction", format!("{:?}", self.grid.dealias_fraction)),
            ("sim.s", format!("{:?}", self.sim.s)),
            ("sim.epsilon", format!("{:?}", self.sim.epsilon)),
            ("sim.t_end", format!("{:?}", self.sim.t_end)),
            ("sim.dt", format!("{:?}", self.sim.dt)),
            ("sim.cfl", self.sim.cfl.to_string()),
            ("sim.cfl_number", format!("{:?}", self.sim.cfl_number)),
            ("sim.linear_mode", self.sim.linear_mode.to_string()),
            ("init.family", family.to_string()),
            ("init.seed", self.init.seed.to_string()),
            ("init.kmax", self.init.kmax.to_string()),
            ("init.jmax", self.init.jmax.to_string()),
            ("init.spectral_slope", format!("{:?}", self.init.spectral_slope)),
            ("output.path", self.output.path.clone()),
            ("output.every_steps", self.output.every_steps.to_string()),
            ("output.checkpoint_every", self.output.checkpoint_every.to_string()),
            ("output.per_decade", self.output.per_decade.to_string()),
            ("envelope.delta", format!("{:?}", self.envelope.delta)),
            ("envelope.c_s", format!("{:?}", self.envelope.c_s)),
            ("guard.boundary_threshold", format!("{:?}", self.guard.boundary_threshold)),
            ("guard.norm_factor", format!("{:?}", self.guard.norm_factor)),
            ("guard.shell_fraction", format!("{:?}", self.guard.shell_fraction)),
        ];
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# only a comment\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_reference_config() {
        let text = "\
# reference run
grid.nx = 128
grid.ny = 256
grid.ly = 4*pi
sim.s = 3
sim.epsilon = 0.05   # binding H^s norm
sim.t_end = 100
init.family = single
output.path = out/ref.ndjson
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.grid.ly, 4.0 * PI);
        assert_eq!(cfg.sim.epsilon, 0.05);
        assert_eq!(cfg.output.path, "out/ref.ndjson");
    }

    #[test]
    fn real_forms() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("4pi").unwrap(), 4.0 * PI);
        assert_eq!(parse_real(" 0.5 * pi ").unwrap(), 0.5 * PI);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert!(parse_real("inf").is_err());
        assert!(parse_real("NaN").is_err());
        assert!(parse_real("x").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("grid.nz = 4"), Err(Error::Config(_))));
        assert!(RunConfig::parse("grid.nx 128").is_err());
        assert!(RunConfig::parse("grid.nx = 127").is_err());
        assert!(RunConfig::parse("sim.s = 1").is_err());
        assert!(RunConfig::parse("sim.t_end = 0").is_err());
        assert!(RunConfig::parse("sim.epsilon = -0.1").is_err());
        assert!(RunConfig::parse("sim.s = 2\nsim.s = 3").is_err());
        assert!(RunConfig::parse("init.family = triple").is_err());
        let err = RunConfig::parse("\n\nsim.dt = fast").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn overrides_apply_in_order() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["sim.dt=0.05", "sim.dt = 0.02", "init.family=multi"])
            .unwrap();
        assert_eq!(cfg.sim.dt, 0.02);
        assert_eq!(cfg.init.family, InitFamily::Multi);
        assert!(cfg.apply_overrides(&["sim.dt"]).is_err());
        assert!(cfg.apply_overrides(&["=3"]).is_err());
        assert!(RunConfig::default().apply_overrides(&["grid.nx=9"]).is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let cfg = RunConfig::default();
        let text = cfg.to_text();
        for key in KEYS {
            assert!(text.contains(&format!("{key} = ")), "{key}");
        }
    }

    proptest! {
        #[test]
        fn text_round_trip(
            nx in 4usize..64,
            ly in 0.5f64..50.0,
            eps in 0.0f64..1.0,
            seed in any::<u64>(),
            multi in any::<bool>(),
            linear in any::<bool>(),
        ) {
            let mut cfg = RunConfig::default();
            cfg.grid.nx = 2 * nx;
            cfg.grid.ly = ly;
            cfg.sim.epsilon = eps;
            cfg.init.seed = seed;
            cfg.init.family = if multi { InitFamily::Multi } else { InitFamily::Single };
            cfg.sim.linear_mode = linear;
            prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    }
}
