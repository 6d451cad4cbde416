//! Multiplier bounds evaluated exactly on the frequency lattice, with no
//! time stepping.
//!
//! The lab-frame vorticity `ω(x, y) = W(x − ty, y)` has coefficients
//! `ω̂(k, ξ) = Ŵ(k, ξ + tk)`, so any lab-frame multiplier norm of `ω` is a
//! lattice sum over `Ŵ` with the shifted symbol `k² + (ξ − tk)²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, NormKind, SpectralField, Transformer};

fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// `‖P_{≠0} ω‖_{Ḣ^{−s}}` at time `t`, computed as
/// `4πL_y Σ_{k≠0, j} (k² + (ξ_j − tk)²)^{−s} |Ŵ(k, j)|²`.
pub fn damping_norm(w_hat: &SpectralField, t: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping norm needs s >= 0, got {s}; use sobolev_norm for positive orders"
        )));
    }
    let grid = w_hat.grid();
    let mut sum = 0.0;
    for ((i, j), c) in w_hat.coef().indexed_iter() {
        let k = grid.wavenumber(i);
        if k == 0 {
            continue;
        }
        let kf = k as f64;
        let shifted = grid.xi(j) - t * kf;
        sum += (kf * kf + shifted * shifted).powf(-s) * c.norm_sqr();
    }
    Ok((grid.area() * sum).sqrt())
}

/// `damping_norm · ⟨t⟩^s / ‖W‖_{L²_X H^s_Y}`; bounded uniformly in `t`.
pub fn damping_bound_ratio(w_hat: &SpectralField, t: f64, s: f64) -> Result<f64> {
    let denom = w_hat.sobolev_norm(s, NormKind::L2xHsy)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "bound ratio undefined for the zero field".into(),
        ));
    }
    Ok(damping_norm(w_hat, t, s)? * bracket(t).powf(s) / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheckReport {
    pub s1: f64,
    pub s2: f64,
    pub t_values: Vec<f64>,
    pub sup_ratio: Vec<f64>,
    /// `sup_ratio / ⟨t⟩^{1+s1−s2}`
    pub normalized_sup: Vec<f64>,
    pub max_normalized: f64,
}

impl SymbolCheckReport {
    /// Largest over smallest normalized sup.
    pub fn spread(&self) -> f64 {
        let lo = self.normalized_sup.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.normalized_sup.iter().cloned().fold(0.0, f64::max);
        hi / lo
    }
}

/// Geometric grid `{1, 2, 4, …, 1024}`.
pub fn default_t_values() -> Vec<f64> {
    (0..=10).map(|p| f64::from(1u32 << p)).collect()
}

/// For each `t`, the sup over lattice points with `k ≠ 0` of
/// `(k²+ξ²)^{(s1+1)/2} / [(k² + (ξ−tk)²)(k²+ξ²)^{s2/2}]`, i.e. the operator
/// norm of `P_{≠0} ∇⊥Δ_t⁻¹ : Ḣ^{s2} → Ḣ^{s1}` restricted to the lattice.
pub fn elliptic_symbol_check(grid: &GridSpec, s1: f64, s2: f64, t_values: &[f64]) -> Result<SymbolCheckReport> {
    grid.validate()?;
    let gap = s1 - s2;
    if !(-1.0..=1.0).contains(&gap) {
        return Err(Error::InvalidArgument(format!(
            "elliptic bound needs -1 <= s1 - s2 <= 1, got {gap}"
        )));
    }
    let grid = *grid;
    let sup_ratio: Vec<f64> = t_values
        .par_iter()
        .map(|&t| {
            let mut sup = 0.0_f64;
            for i in 0..grid.nx {
                let k = grid.wavenumber(i) as f64;
                if k == 0.0 {
                    continue;
                }
                for j in 0..grid.ny {
                    let xi = grid.xi(j);
                    let r2 = k * k + xi * xi;
                    let shifted = xi - t * k;
                    let m = r2.powf(0.5 * (s1 + 1.0 - s2)) / (k * k + shifted * shifted);
                    sup = sup.max(m);
                }
            }
            sup
        })
        .collect();
    let normalized_sup: Vec<f64> = t_values
        .iter()
        .zip(&sup_ratio)
        .map(|(&t, &sup)| sup / bracket(t).powf(1.0 + gap))
        .collect();
    let max_normalized = normalized_sup.iter().cloned().fold(0.0, f64::max);
    Ok(SymbolCheckReport {
        s1,
        s2,
        t_values: t_values.to_vec(),
        sup_ratio,
        normalized_sup,
        max_normalized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyPair {
    /// `‖P_{=0} U‖_{L²} = ‖|∂_Y|⁻¹ P_{=0} W‖_{L²}`, spectrally.
    pub lhs: f64,
    /// `‖⟨Y⟩ W‖_{L²}`, by quadrature.
    pub rhs: f64,
}

impl HardyPair {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Zero-mode velocity against the weighted vorticity norm.
pub fn zero_mode_hardy_check(w_hat: &SpectralField) -> Result<HardyPair> {
    w_hat.require_mean_free()?;
    let grid = w_hat.grid();
    let mut sum = 0.0;
    for j in 1..grid.ny {
        let xi = grid.xi(j);
        sum += w_hat.coef()[[0, j]].norm_sqr() / (xi * xi);
    }
    let lhs = (grid.area() * sum).sqrt();
    let physical = Transformer::new(*grid)?.inverse(w_hat)?;
    let rhs = physical.weighted_l2_norm(|y| bracket(y));
    Ok(HardyPair { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::fit_decay;
    use crate::spectral::{ModeProjection, PhysicalField};
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian_single_mode(grid: GridSpec) -> SpectralField {
        let f = PhysicalField::from_fn(grid, |x, y| x.sin() * (-y * y).exp());
        Transformer::new(grid).unwrap().forward(&f).unwrap()
    }

    #[test]
    fn zero_field_and_negative_order() {
        let g = GridSpec::default();
        let z = SpectralField::zeros(g);
        assert_eq!(damping_norm(&z, 5.0, 1.0).unwrap(), 0.0);
        assert!(damping_norm(&z, 5.0, -0.5).is_err());
        assert!(damping_bound_ratio(&z, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_mode_closed_form() {
        let g = GridSpec::default();
        let mut w = SpectralField::zeros(g);
        w.set_real_mode(1, 0, c(1.0, 0.0));
        let ratio = damping_norm(&w, 3.0, 1.0).unwrap() / damping_norm(&w, 0.0, 1.0).unwrap();
        assert!((ratio - 10f64.sqrt().recip()).abs() < 1e-14);
        for &t in &[0.0, 0.5, 3.0, 100.0, 1000.0] {
            let r = damping_bound_ratio(&w, t, 1.0).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "t = {t}: {r}");
        }
    }

    #[test]
    fn at_rest_with_s0_is_nonzero_mode_l2() {
        let g = GridSpec::new(16, 64, 4.0).unwrap();
        let f = PhysicalField::from_fn(g, |x, y| ((2.0 * x).cos() + y + x.sin() * y) * (-y * y).exp());
        let w = Transformer::new(g).unwrap().forward(&f).unwrap();
        let want = w.project(ModeProjection::NonzeroX).l2_norm();
        assert_eq!(damping_norm(&w, 0.0, 0.0).unwrap(), want);
        assert!(damping_bound_ratio(&w, 0.0, 1.5).unwrap() <= 1.0);
    }

    #[test]
    fn gaussian_profile_decays_at_rate_s() {
        let g = GridSpec::default();
        let w = gaussian_single_mode(g);
        // Eight samples per octave over t in [8, 512].
        let ts: Vec<f64> = (0..=48).map(|n| 8.0 * 2f64.powf(n as f64 / 8.0)).collect();
        let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, damping_norm(&w, t, 2.0).unwrap())).collect();
        let fit = fit_decay(&samples, (8.0, 512.0)).unwrap();
        assert!((fit.exponent + 2.0).abs() <= 0.05, "{}", fit.exponent);
    }

    /// Synthesizes `ω(x, y) = W(x − ty, y)` point by point and measures it
    /// with an ordinary homogeneous norm.
    #[test]
    fn matches_lab_frame_reconstruction() {
        let g = GridSpec::new(16, 64, PI).unwrap();
        let mut w = SpectralField::zeros(g);
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for k in 0..=2i64 {
            for j in -4..=4i64 {
                if k == 0 && j <= 0 {
                    continue;
                }
                w.set_real_mode(k, j, c(next(), next()));
            }
        }
        let modes: Vec<(f64, f64, Complex64)> = w
            .coef()
            .indexed_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|((i, j), &c)| (g.wavenumber(i) as f64, g.xi(j), c))
            .collect();
        let tr = Transformer::new(g).unwrap();
        for &t in &[1.0, 3.0, 6.0] {
            let omega = PhysicalField::from_fn(g, |x, y| {
                let xs = x - t * y;
                modes
                    .iter()
                    .map(|&(k, xi, c)| (c * Complex64::from_polar(1.0, k * xs + xi * y)).re)
                    .sum()
            });
            let lab = tr.forward(&omega).unwrap().project(ModeProjection::NonzeroX);
            for &s in &[0.0, 1.0, 2.0] {
                let want = lab.sobolev_norm(-s, NormKind::Homogeneous).unwrap();
                let got = damping_norm(&w, t, s).unwrap();
                assert!((got - want).abs() <= 1e-10 * want, "t={t} s={s}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn heavy_tailed_profile_ratio_does_not_grow() {
        let g = GridSpec::default();
        for &s in &[1.0, 2.0] {
            let mut w = SpectralField::zeros(g);
            for j in 0..g.ny {
                if j == g.ny / 2 {
                    continue;
                }
                let amp = bracket(g.xi(j)).powf(-s - 0.6);
                w.set(1, g.mode_number(j), c(amp, 0.0));
                w.set(-1, -g.mode_number(j), c(amp, 0.0));
            }
            let ts: Vec<f64> = (0..=80).map(|n| 2f64.powf(n as f64 / 8.0)).collect();
            let ratios: Vec<(f64, f64)> =
                ts.iter().map(|&t| (t, damping_bound_ratio(&w, t, s).unwrap())).collect();
            let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
            assert!(max.is_finite());
            let tail = fit_decay(&ratios, (64.0, 1024.0)).unwrap();
            assert!(tail.exponent.abs() <= 0.05, "s={s}: slope {}", tail.exponent);
        }
    }

    #[test]
    fn elliptic_check_at_rest_is_one_derivative_gain() {
        let g = GridSpec::default();
        for &s in &[0.0, 1.0, 2.5] {
            let rep = elliptic_symbol_check(&g, s, s, &[0.0]).unwrap();
            assert!(rep.sup_ratio[0] <= 1.0 + 1e-15);
            assert!(rep.max_normalized <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn elliptic_check_rejects_large_gap() {
        let g = GridSpec::default();
        assert!(elliptic_symbol_check(&g, 2.5, 1.0, &[1.0]).is_err());
        assert!(elliptic_symbol_check(&g, 0.0, 1.5, &[1.0]).is_err());
        assert!(elliptic_symbol_check(&g, 2.0, 1.0, &[1.0]).is_ok());
    }

    #[test]
    fn elliptic_bound_uniform_when_lattice_resolves_the_shift() {
        // ξ reaches 2048 in unit steps, so ξ = tk is on the lattice for
        // every t in the geometric grid.
        let g = GridSpec::new(16, 4096, PI).unwrap();
        for &(s1, s2) in &[(1.0, 1.0), (2.0, 1.0), (0.0, 1.0), (3.0, 3.0)] {
            let rep = elliptic_symbol_check(&g, s1, s2, &default_t_values()).unwrap();
            assert!(rep.max_normalized <= 4.0, "({s1},{s2}): {:?}", rep.normalized_sup);
            assert!(rep.spread() < 4.0, "({s1},{s2}): {:?}", rep.normalized_sup);
        }
    }

    #[test]
    fn elliptic_sup_falls_off_once_shift_leaves_the_lattice() {
        // On the default grid |ξ| <= 32, so the resonance ξ = t is lost
        // beyond t = 32 and the normalized sup drops well below its bound.
        let g = GridSpec::default();
        let rep = elliptic_symbol_check(&g, 1.0, 1.0, &[32.0, 1024.0]).unwrap();
        assert!(rep.normalized_sup[0] > 0.5);
        assert!(rep.normalized_sup[1] < 1e-3);
    }

    fn periodic_antiderivative_l2(grid: GridSpec, g: impl Fn(f64) -> f64) -> f64 {
        // Midpoint quadrature of a zero-mean antiderivative over one period.
        let n = 200_000;
        let h = 2.0 * grid.ly / n as f64;
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(n);
        for m in 0..n {
            let y = -grid.ly + (m as f64 + 0.5) * h;
            acc += g(y) * h;
            values.push(acc - 0.5 * g(y) * h);
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sq: f64 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * h;
        (2.0 * PI * sq).sqrt()
    }

    #[test]
    fn hardy_pair_for_odd_profile() {
        let g = GridSpec::new(8, 512, 4.0 * PI).unwrap();
        let profile = |y: f64| y * (-y * y).exp();
        let w = Transformer::new(g)
            .unwrap()
            .forward(&PhysicalField::from_fn(g, |_, y| profile(y)))
            .unwrap();
        let pair = zero_mode_hardy_check(&w).unwrap();

        let lhs = periodic_antiderivative_l2(g, profile);
        // ∫ (1+Y²) Y² e^{−2Y²} dY over ℝ; the tail beyond 4π is negligible.
        let rhs = (2.0 * PI * (PI / 2.0).sqrt() * (0.25 + 3.0 / 16.0)).sqrt();
        assert!((pair.lhs - lhs).abs() < 1e-8 * lhs, "{} vs {lhs}", pair.lhs);
        assert!((pair.rhs - rhs).abs() < 1e-10 * rhs, "{} vs {rhs}", pair.rhs);
        assert!(pair.ratio().is_finite() && pair.ratio() > 0.0);
    }

    #[test]
    fn hardy_lhs_vanishes_without_x_mean() {
        let g = GridSpec::new(16, 64, 4.0).unwrap();
        let w = gaussian_single_mode(g);
        let pair = zero_mode_hardy_check(&w).unwrap();
        assert!(pair.rhs > 0.0);
        assert!(pair.lhs < 1e-14 * pair.rhs);
    }

    #[test]
    fn hardy_rejects_nonzero_integral() {
        let g = GridSpec::new(8, 128, 4.0 * PI).unwrap();
        let w = Transformer::new(g)
            .unwrap()
            .forward(&PhysicalField::from_fn(g, |_, y| (-y * y).exp()))
            .unwrap();
        assert!(matches!(zero_mode_hardy_check(&w), Err(Error::NonzeroMean { .. })));
    }
}
