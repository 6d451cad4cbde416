//! The Euler system in shear-back coordinates.
//!
//! With `X = x − tY`, the vorticity `W(t, X, Y) = ω(t, X + tY, Y)` is
//! transported by the renormalized velocity `U = ∇⊥Ψ`, where `Ψ` solves
//! `Δ_t Ψ = W` for the time-dependent Laplacian
//! `Δ_t = (∂_Y − t∂_X)² + ∂_X²` with symbol `−(k² + (ξ − tk)²)`.
//! Nothing in this frame needs finer resolution as `t` grows.

use ndarray::Zip;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, NormKind, SpectralField, Transformer, HERMITIAN_TOLERANCE};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Time plus spectral vorticity: the whole dynamical state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearFrameState {
    pub t: f64,
    pub w_hat: SpectralField,
    pub step_count: u64,
}

impl ShearFrameState {
    /// Wraps initial vorticity at `t = 0`. The mean mode must vanish; it is
    /// then set to exactly zero.
    pub fn new(mut w_hat: SpectralField) -> Result<Self> {
        w_hat.require_mean_free()?;
        w_hat.set(0, 0, ZERO);
        Ok(ShearFrameState {
            t: 0.0,
            w_hat,
            step_count: 0,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ShearFrameState {
            t: 0.0,
            w_hat: SpectralField::zeros(grid),
            step_count: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.w_hat.grid()
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.w_hat.coef().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Spectral renormalized velocity `(Û^X, Û^Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityPair {
    pub ux_hat: SpectralField,
    pub uy_hat: SpectralField,
}

impl VelocityPair {
    /// Largest `|ik·Û^X + iξ·Û^Y|` relative to the largest velocity
    /// coefficient, weighted by `|(k, ξ)|`.
    pub fn divergence_defect(&self) -> f64 {
        let grid = *self.ux_hat.grid();
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        Zip::indexed(self.ux_hat.coef())
            .and(self.uy_hat.coef())
            .for_each(|(i, j), &ux, &uy| {
                let k = grid.wavenumber(i) as f64;
                let xi = grid.xi(j);
                let div = I * k * ux + I * xi * uy;
                worst = worst.max(div.norm());
                scale = scale.max((k.abs() + xi.abs()) * ux.norm().max(uy.norm()));
            });
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Streamfunction `Ψ̂ = −Ŵ / (k² + (ξ − tk)²)`, zero at the mean mode.
pub fn streamfunction(w_hat: &SpectralField, t: f64) -> Result<SpectralField> {
    w_hat.require_mean_free()?;
    let mut psi = w_hat.map_modes(|k, xi, c| {
        let kf = k as f64;
        let shifted = xi - t * kf;
        let symbol = kf * kf + shifted * shifted;
        if symbol == 0.0 {
            ZERO
        } else {
            -c / symbol
        }
    });
    psi.set(0, 0, ZERO);
    Ok(psi)
}

/// Recovers `U = ∇⊥Ψ` from `Ŵ` at time `t`. For `k = 0` the symbol reduces
/// to `ξ²`, so the X-mean part of `U^X` is `|∂_Y|⁻¹`-type.
pub fn solve_velocity(w_hat: &SpectralField, t: f64) -> Result<VelocityPair> {
    let psi = streamfunction(w_hat, t)?;
    let mut ux_hat = psi.map_modes(|_, xi, c| -I * xi * c);
    let mut uy_hat = psi.map_modes(|k, _, c| I * k as f64 * c);
    ux_hat.zero_nyquist();
    uy_hat.zero_nyquist();
    Ok(VelocityPair { ux_hat, uy_hat })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// Clamp steps by [`Stepper::cfl_dt`].
    pub cfl: bool,
    pub cfl_number: f64,
    pub dt_max: f64,
    /// Drop the nonlinear term, so `W` is frozen.
    pub linear: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            cfl: true,
            cfl_number: 0.4,
            dt_max: 0.1,
            linear: false,
        }
    }
}

/// Limits past which a trajectory has left the small-data regime or the
/// grid no longer resolves it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupGuard {
    pub s: f64,
    pub epsilon: f64,
    /// Abort once `‖W‖_{H^s}` exceeds this multiple of `epsilon`.
    pub norm_factor: f64,
    /// Abort once the outer third of the retained spectrum carries more
    /// than this fraction of the `H^s` mass.
    pub shell_fraction: f64,
}

impl BlowupGuard {
    pub fn new(s: f64, epsilon: f64) -> Self {
        BlowupGuard {
            s,
            epsilon,
            norm_factor: 10.0,
            shell_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GuardViolation {
    NormBlowup { hs: f64, limit: f64 },
    Underresolved { shell_fraction: f64 },
    Boundary { boundary_frac: f64 },
}

impl std::fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GuardViolation::NormBlowup { hs, limit } => {
                write!(f, "blow-up guard: H^s norm {hs:.4e} exceeds {limit:.4e}")
            }
            GuardViolation::Underresolved { shell_fraction } => write!(
                f,
                "underresolution guard: outer spectral shell holds {:.3}% of H^s mass",
                100.0 * shell_fraction
            ),
            GuardViolation::Boundary { boundary_frac } => write!(
                f,
                "boundary guard: {boundary_frac:.3e} of L2 mass near |Y| = L_y"
            ),
        }
    }
}

/// Fraction of `Σ (1+k²+ξ²)^s |Ŵ|²` carried by modes whose normalized
/// radius `max(|k|/k_cut, |j|/j_cut)` exceeds 2/3.
pub fn outer_shell_fraction(w_hat: &SpectralField, s: f64) -> f64 {
    let grid = *w_hat.grid();
    let (kc, jc) = (grid.k_cutoff(), grid.j_cutoff());
    let mut outer = 0.0;
    let mut total = 0.0;
    for ((i, j), c) in w_hat.coef().indexed_iter() {
        let k = grid.wavenumber(i);
        let xi = grid.xi(j);
        let mass = (1.0 + (k * k) as f64 + xi * xi).powf(s) * c.norm_sqr();
        total += mass;
        let radius =
            (k.unsigned_abs() as f64 / kc).max(grid.mode_number(j).unsigned_abs() as f64 / jc);
        if radius > 2.0 / 3.0 {
            outer += mass;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Explicit pseudo-spectral integrator for the shear-frame system.
#[derive(Debug, Clone)]
pub struct Stepper {
    transformer: Transformer,
    config: StepperConfig,
}

impl Stepper {
    pub fn new(grid: GridSpec, config: StepperConfig) -> Result<Self> {
        if !(config.dt_max > 0.0 && config.dt_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt_max must be positive, got {}",
                config.dt_max
            )));
        }
        if !(config.cfl_number > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl number must be positive, got {}",
                config.cfl_number
            )));
        }
        Ok(Stepper {
            transformer: Transformer::new(grid)?,
            config,
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// Switches between full dynamics and the linearization `∂_t W = 0`.
    pub fn set_linear(&mut self, on: bool) {
        self.config.linear = on;
    }

    pub fn is_linear(&self) -> bool {
        self.config.linear
    }

    /// Spectral coefficients of `−U·∇W`, dealiased before and after the
    /// physical-space products.
    pub fn nonlinear_term(&self, w_hat: &SpectralField, t: f64) -> Result<SpectralField> {
        let w = w_hat.dealias();
        let vel = solve_velocity(&w, t)?;
        let mut wx = w.map_modes(|k, _, c| I * k as f64 * c);
        let mut wy = w.map_modes(|_, xi, c| I * xi * c);
        wx.zero_nyquist();
        wy.zero_nyquist();

        let tr = &self.transformer;
        let defect = w.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE || !defect.is_finite() {
            return Err(Error::HermitianViolation { defect });
        }
        // For X-independent W both U^Y and ∂_X W vanish; packing them
        // together keeps that cancellation exact.
        let (ux, wy) = tr.inverse_pair_unchecked(&vel.ux_hat.dealias(), &wy);
        let (uy, wx) = tr.inverse_pair_unchecked(&vel.uy_hat.dealias(), &wx);

        let mut product = ux.clone();
        Zip::from(product.values_mut())
            .and(uy.values())
            .and(wx.values())
            .and(wy.values())
            .for_each(|p, &uy, &wx, &wy| *p = -(*p * wx + uy * wy));

        let mut out = tr.forward(&product)?;
        out.dealias_in_place();
        out.set(0, 0, ZERO);
        Ok(out)
    }

    /// One classical Runge-Kutta step. Each stage evaluates the velocity
    /// symbol at its own stage time.
    pub fn step_rk4(&self, state: &ShearFrameState, dt: f64) -> Result<ShearFrameState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let t = state.t;
        let mut next = ShearFrameState {
            t: t + dt,
            w_hat: state.w_hat.clone(),
            step_count: state.step_count + 1,
        };
        if self.config.linear {
            return Ok(next);
        }

        let w0 = &state.w_hat;
        let stage = |base: &SpectralField, incr: &SpectralField, h: f64| {
            let mut s = base.clone();
            s.coef_mut().scaled_add(Complex64::new(h, 0.0), incr.coef());
            s
        };
        let check = |f: SpectralField, label: &str| -> Result<SpectralField> {
            if f.coef().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                Ok(f)
            } else {
                Err(Error::Numerical {
                    t,
                    reason: format!("non-finite values in RK stage {label} (blow-up or underresolution)"),
                    last_valid: Box::new(state.clone()),
                })
            }
        };

        let k1 = check(self.nonlinear_term(w0, t)?, "1")?;
        let k2 = check(self.nonlinear_term(&stage(w0, &k1, 0.5 * dt), t + 0.5 * dt)?, "2")?;
        let k3 = check(self.nonlinear_term(&stage(w0, &k2, 0.5 * dt), t + 0.5 * dt)?, "3")?;
        let k4 = check(self.nonlinear_term(&stage(w0, &k3, dt), t + dt)?, "4")?;

        let coef = next.w_hat.coef_mut();
        let h = dt / 6.0;
        Zip::from(coef)
            .and(k1.coef())
            .and(k2.coef())
            .and(k3.coef())
            .and(k4.coef())
            .for_each(|w, &a, &b, &c, &d| *w += (a + (b + c) * 2.0 + d) * h);
        next.w_hat.set(0, 0, ZERO);

        if !next.is_finite() {
            return Err(Error::Numerical {
                t,
                reason: "non-finite state after step (blow-up or underresolution)".into(),
                last_valid: Box::new(state.clone()),
            });
        }
        Ok(next)
    }

    /// `c_cfl · min(ΔX / max|U^X|, ΔY / max|U^Y|)`, capped by `dt_max`.
    pub fn cfl_dt(&self, state: &ShearFrameState) -> Result<f64> {
        let vel = solve_velocity(&state.w_hat, state.t)?;
        let ux = self.transformer.inverse(&vel.ux_hat)?.max_abs();
        let uy = self.transformer.inverse(&vel.uy_hat)?.max_abs();
        let grid = self.transformer.grid();
        let mut dt = self.config.dt_max;
        if ux > 0.0 {
            dt = dt.min(self.config.cfl_number * grid.dx() / ux);
        }
        if uy > 0.0 {
            dt = dt.min(self.config.cfl_number * grid.dy() / uy);
        }
        Ok(dt)
    }

    /// Step size for the next step: `dt_max`, clamped by CFL when enabled.
    pub fn next_dt(&self, state: &ShearFrameState) -> Result<f64> {
        if self.config.cfl && !self.config.linear {
            self.cfl_dt(state)
        } else {
            Ok(self.config.dt_max)
        }
    }

    pub fn check_guard(&self, state: &ShearFrameState, guard: &BlowupGuard) -> Result<Option<GuardViolation>> {
        let hs = state.w_hat.sobolev_norm(guard.s, NormKind::Inhomogeneous)?;
        let limit = guard.norm_factor * guard.epsilon;
        if hs > limit {
            return Ok(Some(GuardViolation::NormBlowup { hs, limit }));
        }
        let shell = outer_shell_fraction(&state.w_hat, guard.s);
        if shell > guard.shell_fraction {
            return Ok(Some(GuardViolation::Underresolved {
                shell_fraction: shell,
            }));
        }
        Ok(None)
    }
}
