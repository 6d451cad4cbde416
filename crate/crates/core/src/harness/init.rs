//! Seeded initial vorticity.
//!
//! The multi-mode family draws one phase per mode from `ChaCha8Rng` seeded
//! with `init.seed`, visiting `k = 0..=kmax` in the outer loop and
//! `j = −jmax..=jmax` in the inner loop, skipping `k = 0, j ≤ 0`. A phase is
//! `2π · (next_u64 >> 11) · 2⁻⁵³`. The field is
//! `Σ (1 + k² + ξ²)^{−slope/2} cos(kX + ξY + φ)`, multiplied by `exp(−Y²)`;
//! the `k = 0` part is then corrected by a multiple of `exp(−Y²)` so its
//! Y-integral vanishes. Both families are scaled so that
//! `max(‖W‖_{H^s}, ‖YW‖_{L²}) = ε`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use super::config::{InitFamily, RunConfig};
use crate::dynamics::ShearFrameState;
use crate::error::{Error, Result};
use crate::oracle::{zero_mode_hardy_check, HardyPair};
use crate::spectral::{GridSpec, NormKind, PhysicalField, SpectralField, Transformer};

/// Uniform draw in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `sin(X) exp(−Y²)`, unnormalized.
pub fn single_profile(grid: GridSpec) -> PhysicalField {
    PhysicalField::from_fn(grid, |x, y| x.sin() * (-y * y).exp())
}

/// Unnormalized multi-mode profile; see the module docs for the recipe.
pub fn multi_profile(grid: GridSpec, seed: u64, kmax: u32, jmax: u32, slope: f64) -> Result<PhysicalField> {
    if kmax == 0 && jmax == 0 {
        return Err(Error::Config("init.kmax and init.jmax are both zero".into()));
    }
    if kmax as f64 > grid.k_cutoff() || jmax as f64 > grid.j_cutoff() {
        return Err(Error::Config(format!(
            "init modes (kmax {kmax}, jmax {jmax}) exceed the dealiasing cutoff ({:.1}, {:.1})",
            grid.k_cutoff(),
            grid.j_cutoff()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for k in 0..=kmax as i64 {
        for j in -(jmax as i64)..=jmax as i64 {
            if k == 0 && j <= 0 {
                continue;
            }
            let phase = 2.0 * std::f64::consts::PI * unit(&mut rng);
            let xi = j as f64 * grid.xi_spacing();
            let amp = (1.0 + (k * k) as f64 + xi * xi).powf(-0.5 * slope);
            modes.push((k as f64, xi, amp, phase));
        }
    }

    let mut field = PhysicalField::zeros(grid);
    let mut zero_part = vec![0.0; grid.ny];
    for ((i, m), v) in field.values_mut().indexed_iter_mut() {
        let (x, y) = (grid.x(i), grid.y(m));
        let gauss = (-y * y).exp();
        let mut sum = 0.0;
        for &(k, xi, amp, phase) in &modes {
            let term = amp * (k * x + xi * y + phase).cos();
            sum += term;
            if k == 0.0 && i == 0 {
                zero_part[m] += term * gauss;
            }
        }
        *v = sum * gauss;
    }

    let gauss_int: f64 = (0..grid.ny).map(|m| (-grid.y(m).powi(2)).exp()).sum();
    let zero_int: f64 = zero_part.iter().sum();
    let shift = zero_int / gauss_int;
    for ((_, m), v) in field.values_mut().indexed_iter_mut() {
        *v -= shift * (-grid.y(m).powi(2)).exp();
    }
    Ok(field)
}

/// Builds the configured initial state at `t = 0`.
pub fn make_initial_data(cfg: &RunConfig) -> Result<ShearFrameState> {
    let grid = cfg.grid;
    let tr = Transformer::new(grid)?;
    let profile = match cfg.init.family {
        InitFamily::Single => single_profile(grid),
        InitFamily::Multi => multi_profile(
            grid,
            cfg.init.seed,
            cfg.init.kmax,
            cfg.init.jmax,
            cfg.init.spectral_slope,
        )?,
    };
    let mut w = tr.forward(&profile)?;
    w.dealias_in_place();
    w.set(0, 0, Complex64::new(0.0, 0.0));
    normalize(&tr, w, cfg.sim.s, cfg.sim.epsilon)
}

/// Zero-mode Hardy pairs for `count` multi-mode profiles with seeds
/// `init.seed, init.seed + 1, …`.
pub fn hardy_survey(cfg: &RunConfig, count: usize) -> Result<Vec<HardyPair>> {
    let mut c = cfg.clone();
    c.init.family = InitFamily::Multi;
    (0..count as u64)
        .map(|i| {
            c.init.seed = cfg.init.seed.wrapping_add(i);
            zero_mode_hardy_check(&make_initial_data(&c)?.w_hat)
        })
        .collect()
}

fn normalize(tr: &Transformer, w: SpectralField, s: f64, epsilon: f64) -> Result<ShearFrameState> {
    let hs = w.sobolev_norm(s, NormKind::Inhomogeneous)?;
    let yw = tr.inverse(&w)?.weighted_l2_norm(|y| y);
    let size = hs.max(yw);
    if size == 0.0 {
        return Err(Error::Config("initial profile vanishes on this grid".into()));
    }
    let scale = epsilon / size;
    let scaled = w.map_modes(|_, _, c| c * scale);
    ShearFrameState::new(scaled)
}
