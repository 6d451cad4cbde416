//! Binary checkpoint blob.
//!
//! Layout, little-endian: magic `CDW1`, `u32` version, `u32 nx`, `u32 ny`,
//! `f64 ly`, `f64 t`, `f64 s`, `f64 epsilon`, then `nx·ny` pairs
//! `(re, im)` of `f64` in k-major FFT order.

use std::path::Path;

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use crate::dynamics::ShearFrameState;
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField, HERMITIAN_TOLERANCE};

pub const MAGIC: &[u8; 4] = b"CDW1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub s: f64,
    pub epsilon: f64,
    /// `step_count` is not stored and decodes as zero.
    pub state: ShearFrameState,
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let grid = self.state.grid();
        let coef = self.state.w_hat.coef();
        let mut out = Vec::with_capacity(HEADER_LEN + coef.len() * 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(grid.nx as u32).to_le_bytes());
        out.extend_from_slice(&(grid.ny as u32).to_le_bytes());
        for v in [grid.ly, self.state.t, self.s, self.epsilon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in coef.iter() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    /// Decodes and validates a blob. Never panics on malformed input.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| Error::Checkpoint(msg);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("blob of {} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let nx = u32_at(8) as usize;
        let ny = u32_at(12) as usize;
        let (ly, t, s, epsilon) = (f64_at(16), f64_at(24), f64_at(32), f64_at(40));

        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(16))
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or_else(|| bad(format!("grid {nx}x{ny} overflows")))?;
        if bytes.len() != expected {
            return Err(bad(format!(
                "expected {expected} bytes for a {nx}x{ny} grid, got {}",
                bytes.len()
            )));
        }
        let grid = GridSpec::new(nx, ny, ly).map_err(|e| bad(e.to_string()))?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(bad(format!("invalid time {t}")));
        }
        if !s.is_finite() || !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(bad(format!("invalid s {s} or epsilon {epsilon}")));
        }

        let mut data = Vec::with_capacity(nx * ny);
        for chunk in bytes[HEADER_LEN..].chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad("non-finite coefficient".into()));
            }
            data.push(Complex64::new(re, im));
        }
        let coef = Array2::from_shape_vec((nx, ny), data).map_err(|e| bad(e.to_string()))?;
        let w_hat = SpectralField::from_coef(grid, coef)?;
        let defect = w_hat.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::HermitianViolation { defect });
        }
        if !w_hat.is_mean_free() {
            return Err(Error::NonzeroMean {
                magnitude: w_hat.mean_mode().norm(),
            });
        }
        Ok(Checkpoint {
            s,
            epsilon,
            state: ShearFrameState {
                t,
                w_hat,
                step_count: 0,
            },
        })
    }

    /// Writes through a temporary sibling and renames, so a crash never
    /// leaves a truncated checkpoint behind.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("ckpt.tmp");
        std::fs::write(&tmp, self.encode()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}
