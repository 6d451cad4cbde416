//! Lifespan exponents and the Gronwall envelope for `‖W‖_{H̄^s}`.
//!
//! The weighted norm obeys `d‖W‖/dt ≤ C ⟨t⟩^{β_s} ‖W‖²`, whose solution from
//! `N0` is `1 / (N0⁻¹ − C ∫₀ᵗ ⟨τ⟩^{β_s} dτ)`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.1;

/// `(β_s, δ_s)`: growth exponent of the a priori bound and lifespan exponent.
pub fn exponents(s: f64, delta: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("exponents need s > 1, got {s}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("exponents need delta > 0, got {delta}")));
    }
    Ok(if s < 2.0 {
        (3.0 - s, 1.0 / (4.0 - s))
    } else if s == 2.0 {
        (1.0 + delta, 1.0 / (2.0 + delta))
    } else {
        (1.0, 0.5)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub s: f64,
    /// Only used at `s = 2`.
    pub delta: f64,
    pub epsilon: f64,
    pub beta_s: f64,
    pub delta_s: f64,
    /// Lifespan constant in `T = c_s ε^{−δ_s}`.
    pub c_s: f64,
    /// Gronwall constant of the envelope.
    pub gronwall_c: f64,
}

impl EnvelopeParams {
    pub fn new(s: f64, delta: f64, epsilon: f64, c_s: f64, gronwall_c: f64) -> Result<Self> {
        let (beta_s, delta_s) = exponents(s, delta)?;
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(c_s > 0.0) {
            return Err(Error::InvalidArgument(format!("c_s must be positive, got {c_s}")));
        }
        if !(gronwall_c >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Gronwall constant must be nonnegative, got {gronwall_c}"
            )));
        }
        Ok(EnvelopeParams {
            s,
            delta,
            epsilon,
            beta_s,
            delta_s,
            c_s,
            gronwall_c,
        })
    }

    pub fn with_gronwall_c(mut self, c: f64) -> Self {
        self.gronwall_c = c;
        self
    }
}

/// `T_ε = c_s ε^{−δ_s}`.
pub fn predicted_lifespan(p: &EnvelopeParams) -> f64 {
    p.c_s * p.epsilon.powf(-p.delta_s)
}

/// `∫₀ᵗ ⟨τ⟩^β dτ`.
///
/// Uses `(1+β) I_β = t⟨t⟩^β + β I_{β−2}` to reduce `β` into `(−1, 1]`.
/// Integer bases are elementary; other bases are integrated after
/// `τ = sinh u` with composite Gauss-Legendre, which is exact to rounding
/// for the smooth integrand `cosh^{β+1} u`.
pub fn growth_integral(t: f64, beta: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let bracket = (1.0 + t * t).sqrt();
    if beta > 1.0 {
        let lower = growth_integral(t, beta - 2.0);
        return (t * bracket.powf(beta) + beta * lower) / (1.0 + beta);
    }
    if beta == 1.0 {
        0.5 * (t * bracket + t.asinh())
    } else if beta == 0.0 {
        t
    } else if beta == -1.0 {
        t.asinh()
    } else {
        gauss_legendre(|u| u.cosh().powf(beta + 1.0), 0.0, t.asinh())
    }
}

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = legendre_rule();
    let panels = ((b - a) / 0.25).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * acc;
    }
    total
}

/// Ten-point Gauss-Legendre nodes and weights on [−1, 1], by Newton's
/// method on the Legendre polynomial.
fn legendre_rule() -> ([f64; 10], [f64; 10]) {
    const N: usize = 10;
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    for i in 0..N {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for n in 2..=N {
                let nf = n as f64;
                let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
                p0 = p1;
                p1 = p2;
            }
            dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `1 / (N0⁻¹ − C I(t))`, or `+∞` once the denominator is nonpositive.
pub fn envelope_norm(t: f64, p: &EnvelopeParams, n0: f64) -> f64 {
    let denom = n0.recip() - p.gronwall_c * growth_integral(t, p.beta_s);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        denom.recip()
    }
}

/// Time at which the envelope denominator reaches zero.
pub fn envelope_blowup_time(p: &EnvelopeParams, n0: f64) -> Option<f64> {
    if p.gronwall_c <= 0.0 || !(n0 > 0.0) {
        return None;
    }
    let target = n0.recip() / p.gronwall_c;
    let mut hi = 1.0;
    while growth_integral(hi, p.beta_s) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if growth_integral(mid, p.beta_s) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Smallest `C >= 0` for which the envelope started from the first
/// sample's `bar_hs` dominates `bar_hs` at every later sample.
pub fn fit_gronwall_constant(history: &[DiagnosticsRecord], p: &EnvelopeParams) -> Result<f64> {
    if history.len() < 8 {
        return Err(Error::InsufficientSamples {
            needed: 8,
            found: history.len(),
        });
    }
    if let Some(index) = history.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::NonMonotoneTime { index: index + 1 });
    }
    let first = &history[0];
    let n0 = first.bar_hs;
    if !(n0 > 0.0) {
        return Ok(0.0);
    }
    let i0 = growth_integral(first.t, p.beta_s);
    let mut c = 0.0_f64;
    for r in &history[1..] {
        let gain = growth_integral(r.t, p.beta_s) - i0;
        let implied = (n0.recip() - r.bar_hs.recip()) / gain;
        if implied.is_finite() {
            c = c.max(implied);
        }
    }
    Ok(c)
}
