//! Periodic grids on `[0, 2π) × [−L_y, L_y)`, Fourier transforms between
//! collocation values and spectral coefficients, and the multiplier norms
//! everything else is measured with.
//!
//! Coefficients are normalized so that a field reads
//! `f(X, Y) = Σ coef(k, j) · exp(i(kX + ξ_j Y))` with `ξ_j = π j / L_y`.
//! Under this convention the domain-integral L² norm is
//! `‖f‖² = 4π L_y Σ |coef|²`.
//!
//! Arrays are stored in FFT order: row `i` holds wavenumber `k = i` for
//! `i < nx/2` and `k = i − nx` otherwise, and the same for columns.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Relative size below which the (0,0) coefficient counts as zero.
pub const MEAN_TOLERANCE: f64 = 1e-13;

/// Relative Hermitian defect above which an inverse transform refuses.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub ly: f64,
    pub dealias_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 128,
            ny: 256,
            ly: 4.0 * PI,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, ly: f64) -> Result<Self> {
        let grid = GridSpec {
            nx,
            ny,
            ly,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_dealias_fraction(mut self, fraction: f64) -> Result<Self> {
        self.dealias_fraction = fraction;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 || self.nx % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "nx must be an even integer >= 8, got {}",
                self.nx
            )));
        }
        if self.ny < 8 || self.ny % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "ny must be an even integer >= 8, got {}",
                self.ny
            )));
        }
        if !(self.ly.is_finite() && self.ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "ly must be positive and finite, got {}",
                self.ly
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    /// Signed X-wavenumber of row `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        signed_index(i, self.nx)
    }

    /// Signed Y-mode number of column `j`.
    #[inline]
    pub fn mode_number(&self, j: usize) -> i64 {
        signed_index(j, self.ny)
    }

    /// Y-frequency `ξ_j = π j / L_y` of column `j`.
    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        self.mode_number(j) as f64 * self.xi_spacing()
    }

    #[inline]
    pub fn xi_spacing(&self) -> f64 {
        PI / self.ly
    }

    pub fn row_of(&self, k: i64) -> usize {
        k.rem_euclid(self.nx as i64) as usize
    }

    pub fn col_of(&self, j: i64) -> usize {
        j.rem_euclid(self.ny as i64) as usize
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, m: usize) -> f64 {
        -self.ly + m as f64 * self.dy()
    }

    /// Area of the periodic domain, `2π · 2L_y`.
    pub fn area(&self) -> f64 {
        4.0 * PI * self.ly
    }

    /// Largest |k| kept by the dealiasing filter.
    pub fn k_cutoff(&self) -> f64 {
        self.dealias_fraction * self.nx as f64 / 2.0
    }

    /// Largest |j| kept by the dealiasing filter.
    pub fn j_cutoff(&self) -> f64 {
        self.dealias_fraction * self.ny as f64 / 2.0
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: format!("{self:?}"),
                found: format!("{other:?}"),
            })
        }
    }
}

#[inline]
fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Weight `(1 + k² + ξ²)^s`.
    Inhomogeneous,
    /// Weight `(k² + ξ²)^s`, mean mode omitted.
    Homogeneous,
    /// `L²_X H^s_Y`: weight `(1 + ξ²)^s`.
    L2xHsy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeProjection {
    /// Remove the X-mean (all `k = 0` modes).
    NonzeroX,
    /// Keep only the X-mean.
    ZeroX,
}

/// Fourier coefficients of a real scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coef: Array2<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coef: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn from_coef(grid: GridSpec, coef: Array2<Complex64>) -> Result<Self> {
        if coef.dim() != (grid.nx, grid.ny) {
            return Err(Error::InvalidArgument(format!(
                "coefficient array has shape {:?}, grid needs ({}, {})",
                coef.dim(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(SpectralField { grid, coef })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coef(&self) -> &Array2<Complex64> {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coef
    }

    pub fn into_coef(self) -> Array2<Complex64> {
        self.coef
    }

    /// Coefficient at signed mode numbers `(k, j)`.
    pub fn get(&self, k: i64, j: i64) -> Complex64 {
        self.coef[[self.grid.row_of(k), self.grid.col_of(j)]]
    }

    pub fn set(&mut self, k: i64, j: i64, value: Complex64) {
        let idx = [self.grid.row_of(k), self.grid.col_of(j)];
        self.coef[idx] = value;
    }

    /// Sets `(k, j)` and its conjugate partner `(−k, −j)`.
    pub fn set_real_mode(&mut self, k: i64, j: i64, value: Complex64) {
        self.set(k, j, value);
        self.set(-k, -j, value.conj());
    }

    pub fn max_abs(&self) -> f64 {
        self.coef.iter().fold(0.0_f64, |m, c| m.max(c.norm_sqr())).sqrt()
    }

    pub fn mean_mode(&self) -> Complex64 {
        self.coef[[0, 0]]
    }

    /// Whether the (0,0) coefficient is zero up to [`MEAN_TOLERANCE`]
    /// relative to the largest coefficient.
    pub fn is_mean_free(&self) -> bool {
        let c = self.mean_mode().norm();
        c == 0.0 || c <= MEAN_TOLERANCE * self.max_abs()
    }

    pub(crate) fn require_mean_free(&self) -> Result<()> {
        if self.is_mean_free() {
            Ok(())
        } else {
            Err(Error::NonzeroMean {
                magnitude: self.mean_mode().norm(),
            })
        }
    }

    /// Largest `|coef(−k,−j) − conj(coef(k,j))|` relative to the largest
    /// coefficient; zero for the zero field.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..nx {
            let row = self.coef.row(i);
            let partner = self.coef.row((nx - i) % nx);
            let (row, partner) = (row.as_slice().unwrap(), partner.as_slice().unwrap());
            worst = worst.max((partner[0] - row[0].conj()).norm_sqr());
            for j in 1..ny {
                worst = worst.max((partner[ny - j] - row[j].conj()).norm_sqr());
            }
        }
        worst.sqrt() / scale
    }


    /// Replaces the coefficients by their Hermitian part.
    pub fn symmetrize(&mut self) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let src = self.coef.clone();
        for i in 0..nx {
            let ip = (nx - i) % nx;
            for j in 0..ny {
                let jp = (ny - j) % ny;
                self.coef[[i, j]] = (src[[i, j]] + src[[ip, jp]].conj()) * 0.5;
            }
        }
    }

    /// Applies `f(k, ξ, coef)` to every coefficient.
    pub fn map_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(i64, f64, Complex64) -> Complex64,
    {
        let grid = self.grid;
        let ks: Vec<i64> = (0..grid.nx).map(|i| grid.wavenumber(i)).collect();
        let xis: Vec<f64> = (0..grid.ny).map(|j| grid.xi(j)).collect();
        let coef = Zip::indexed(&self.coef).map_collect(|(i, j), &c| f(ks[i], xis[j], c));
        SpectralField { grid, coef }
    }


    /// Zeroes the Nyquist row and column, where odd multipliers such as
    /// `ik` cannot keep a real field real.
    pub fn zero_nyquist(&mut self) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        self.coef.row_mut(nx / 2).fill(Complex64::new(0.0, 0.0));
        self.coef.column_mut(ny / 2).fill(Complex64::new(0.0, 0.0));
    }

    pub fn sobolev_norm(&self, s: f64, kind: NormKind) -> Result<f64> {
        if kind == NormKind::Homogeneous && s < 0.0 {
            self.require_mean_free()?;
        }
        let grid = self.grid;
        let mut sum = 0.0;
        for ((i, j), c) in self.coef.indexed_iter() {
            let k = grid.wavenumber(i) as f64;
            let xi = grid.xi(j);
            let weight = match kind {
                NormKind::Inhomogeneous => (1.0 + k * k + xi * xi).powf(s),
                NormKind::Homogeneous => {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    (k * k + xi * xi).powf(s)
                }
                NormKind::L2xHsy => (1.0 + xi * xi).powf(s),
            };
            sum += weight * c.norm_sqr();
        }
        Ok((grid.area() * sum).sqrt())
    }

    /// Domain-integral L² norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.coef.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn project(&self, which: ModeProjection) -> SpectralField {
        let mut out = self.clone();
        match which {
            ModeProjection::NonzeroX => out.coef.row_mut(0).fill(Complex64::new(0.0, 0.0)),
            ModeProjection::ZeroX => {
                for i in 1..self.grid.nx {
                    out.coef.row_mut(i).fill(Complex64::new(0.0, 0.0));
                }
            }
        }
        out
    }

    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        let (kc, jc) = (grid.k_cutoff(), grid.j_cutoff());
        let zero = Complex64::new(0.0, 0.0);
        let dropped: Vec<usize> = (0..grid.ny)
            .filter(|&j| grid.mode_number(j).unsigned_abs() as f64 > jc)
            .collect();
        for (i, mut row) in self.coef.rows_mut().into_iter().enumerate() {
            if grid.wavenumber(i).unsigned_abs() as f64 > kc {
                row.fill(zero);
            } else {
                for &j in &dropped {
                    row[j] = zero;
                }
            }
        }
    }

}

/// Real collocation values on the `nx × ny` lattice, indexed `[ix, iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Array2<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: GridSpec) -> Self {
        PhysicalField {
            grid,
            values: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn from_values(grid: GridSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx, grid.ny) {
            return Err(Error::InvalidArgument(format!(
                "value array has shape {:?}, grid needs ({}, {})",
                values.dim(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(PhysicalField { grid, values })
    }

    /// Samples `f(X, Y)` at the collocation points.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Self {
        let values = Array2::from_shape_fn((grid.nx, grid.ny), |(i, m)| f(grid.x(i), grid.y(m)));
        PhysicalField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal (periodic) quadrature of `∫ |f|²` to a norm.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.dx() * self.grid.dy();
        (cell * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `‖w(Y) f‖_{L²}` by quadrature for a Y-dependent weight.
    pub fn weighted_l2_norm<F: Fn(f64) -> f64>(&self, weight: F) -> f64 {
        let grid = self.grid;
        let cell = grid.dx() * grid.dy();
        let sum: f64 = self
            .values
            .indexed_iter()
            .map(|((_, m), v)| {
                let wv = weight(grid.y(m)) * v;
                wv * wv
            })
            .sum();
        (cell * sum).sqrt()
    }
}

/// Planned forward and inverse 2D transforms for one grid.
#[derive(Clone)]
pub struct Transformer {
    grid: GridSpec,
    x_forward: Arc<dyn Fft<f64>>,
    x_inverse: Arc<dyn Fft<f64>>,
    y_forward: Arc<dyn Fft<f64>>,
    y_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transformer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transformer").field("grid", &self.grid).finish()
    }
}

impl Transformer {
    pub fn new(grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Transformer {
            grid,
            x_forward: planner.plan_fft_forward(grid.nx),
            x_inverse: planner.plan_fft_inverse(grid.nx),
            y_forward: planner.plan_fft_forward(grid.ny),
            y_inverse: planner.plan_fft_inverse(grid.ny),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward(&self, f: &PhysicalField) -> Result<SpectralField> {
        self.grid.check_same(f.grid())?;
        if let Some(((ix, iy), _)) = f.values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { ix, iy });
        }
        let mut buf = f.values.mapv(|v| Complex64::new(v, 0.0));
        self.fft2(&mut buf, false);
        let scale = 1.0 / (self.grid.nx * self.grid.ny) as f64;
        // Y starts at −L_y, which puts a (−1)^j phase on every column.
        for mut row in buf.rows_mut() {
            for (j, c) in row.iter_mut().enumerate() {
                *c *= if j % 2 == 0 { scale } else { -scale };
            }
        }
        Ok(SpectralField {
            grid: self.grid,
            coef: buf,
        })
    }

    pub fn inverse(&self, f: &SpectralField) -> Result<PhysicalField> {
        self.grid.check_same(f.grid())?;
        let defect = f.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE || !defect.is_finite() {
            return Err(Error::HermitianViolation { defect });
        }
        let mut buf = f.coef.clone();
        for ((_, j), c) in buf.indexed_iter_mut() {
            if j % 2 == 1 {
                *c = -*c;
            }
        }
        self.fft2(&mut buf, true);
        Ok(PhysicalField {
            grid: self.grid,
            values: buf.mapv(|c| c.re),
        })
    }

    /// Inverse transforms of two real fields packed into one complex
    /// transform as `a + i b`. Hermitian symmetry is not checked.
    pub(crate) fn inverse_pair_unchecked(&self, a: &SpectralField, b: &SpectralField) -> (PhysicalField, PhysicalField) {
        let mut buf = Array2::from_shape_fn((self.grid.nx, self.grid.ny), |(i, j)| {
            let c = a.coef[[i, j]] + Complex64::new(0.0, 1.0) * b.coef[[i, j]];
            if j % 2 == 1 {
                -c
            } else {
                c
            }
        });
        self.fft2(&mut buf, true);
        (
            PhysicalField {
                grid: self.grid,
                values: buf.mapv(|c| c.re),
            },
            PhysicalField {
                grid: self.grid,
                values: buf.mapv(|c| c.im),
            },
        )
    }

    fn fft2(&self, buf: &mut Array2<Complex64>, inverse: bool) {
        let (fx, fy) = if inverse {
            (&self.x_inverse, &self.y_inverse)
        } else {
            (&self.x_forward, &self.y_forward)
        };
        fy.process(buf.as_slice_mut().expect("standard layout"));
        let mut cols = buf.t().as_standard_layout().into_owned();
        fx.process(cols.as_slice_mut().expect("standard layout"));
        buf.assign(&cols.t());
    }
}

pub fn forward_transform(f: &PhysicalField) -> Result<SpectralField> {
    Transformer::new(*f.grid())?.forward(f)
}

pub fn inverse_transform(f: &SpectralField) -> Result<PhysicalField> {
    Transformer::new(*f.grid())?.inverse(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_grid() -> GridSpec {
        GridSpec::new(16, 32, 2.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(6, 32, 1.0).is_err());
        assert!(GridSpec::new(15, 32, 1.0).is_err());
        assert!(GridSpec::new(16, 32, 0.0).is_err());
        assert!(GridSpec::new(16, 32, 1.0).unwrap().with_dealias_fraction(1.5).is_err());
    }

    #[test]
    fn frequency_lattice() {
        let g = GridSpec::new(8, 8, PI).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.xi(1), 1.0);
        assert_eq!(g.row_of(-1), 7);
        assert_eq!(g.y(0), -PI);
    }

    #[test]
    fn constant_field_is_dc_mode() {
        let g = small_grid();
        let f = PhysicalField::from_fn(g, |_, _| 1.0);
        let s = forward_transform(&f).unwrap();
        assert!((s.get(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        let rest: f64 = s.coef().iter().skip(1).map(|c| c.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn cosine_is_two_half_modes() {
        let g = small_grid();
        let f = PhysicalField::from_fn(g, |x, _| x.cos());
        let s = forward_transform(&f).unwrap();
        assert!((s.get(1, 0) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((s.get(-1, 0) - c(0.5, 0.0)).norm() < 1e-14);
        let total: f64 = s.coef().iter().map(|c| c.norm()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn y_phase_convention() {
        let g = small_grid();
        let xi = g.xi(3);
        let f = PhysicalField::from_fn(g, |_, y| (xi * y).sin());
        let s = forward_transform(&f).unwrap();
        assert!((s.get(0, 3) - c(0.0, -0.5)).norm() < 1e-14);
        assert!((s.get(0, -3) - c(0.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn inverse_of_single_modes() {
        let g = small_grid();
        let t = Transformer::new(g).unwrap();
        let mut s = SpectralField::zeros(g);
        s.set(0, 0, c(1.0, 0.0));
        let f = t.inverse(&s).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0).abs() < 1e-14));

        let mut s = SpectralField::zeros(g);
        s.set_real_mode(1, 0, c(0.5, 0.0));
        let f = t.inverse(&s).unwrap();
        let want = PhysicalField::from_fn(g, |x, _| x.cos());
        let err = (f.values() - want.values()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-14);
    }

    #[test]
    fn inverse_rejects_broken_symmetry() {
        let g = small_grid();
        let mut s = SpectralField::zeros(g);
        s.set(1, 2, c(1.0, 0.0));
        assert!(matches!(
            inverse_transform(&s),
            Err(Error::HermitianViolation { .. })
        ));
    }

    #[test]
    fn forward_rejects_non_finite() {
        let g = small_grid();
        let mut f = PhysicalField::zeros(g);
        f.values_mut()[[3, 4]] = f64::NAN;
        assert!(matches!(
            forward_transform(&f),
            Err(Error::NonFinite { ix: 3, iy: 4 })
        ));
    }

    #[test]
    fn single_mode_sobolev_norm() {
        let g = small_grid();
        let mut s = SpectralField::zeros(g);
        s.set(1, 0, c(1.0, 0.0));
        let n = s.sobolev_norm(2.0, NormKind::Inhomogeneous).unwrap();
        assert!((n - 2.0 * g.area().sqrt()).abs() < 1e-12);
        assert_eq!(
            SpectralField::zeros(g).sobolev_norm(1.5, NormKind::Homogeneous).unwrap(),
            0.0
        );
    }

    #[test]
    fn homogeneous_negative_order_needs_zero_mean() {
        let g = small_grid();
        let mut s = SpectralField::zeros(g);
        s.set(0, 0, c(1.0, 0.0));
        s.set(1, 0, c(1.0, 0.0));
        assert!(matches!(
            s.sobolev_norm(-1.0, NormKind::Homogeneous),
            Err(Error::NonzeroMean { .. })
        ));
        assert!(s.sobolev_norm(1.0, NormKind::Homogeneous).is_ok());
    }

    #[test]
    fn l2x_hsy_weight_ignores_x() {
        let g = GridSpec::new(16, 16, PI).unwrap();
        let mut s = SpectralField::zeros(g);
        s.set(5, 1, c(1.0, 0.0));
        let n = s.sobolev_norm(1.0, NormKind::L2xHsy).unwrap();
        assert!((n - (2.0 * g.area()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projections_split_fields() {
        let g = small_grid();
        let xi = g.xi(1);
        let f = PhysicalField::from_fn(g, |x, y| x.cos() + (xi * y).cos());
        let s = forward_transform(&f).unwrap();
        let nz = s.project(ModeProjection::NonzeroX);
        let z = s.project(ModeProjection::ZeroX);
        let cosx = forward_transform(&PhysicalField::from_fn(g, |x, _| x.cos())).unwrap();
        let gy = forward_transform(&PhysicalField::from_fn(g, |_, y| (xi * y).cos())).unwrap();
        assert!((nz.coef() - cosx.coef()).iter().all(|d| d.norm() < 1e-14));
        assert!((z.coef() - gy.coef()).iter().all(|d| d.norm() < 1e-14));

        let only_y = gy.project(ModeProjection::NonzeroX);
        assert_eq!(only_y.max_abs(), 0.0);
    }

    #[test]
    fn dealias_examples() {
        let g = GridSpec::new(64, 64, PI).unwrap();
        let mut s = SpectralField::zeros(g);
        s.set(1, 1, c(1.0, 0.0));
        assert_eq!(s.dealias(), s);

        let mut s = SpectralField::zeros(g);
        s.set(31, 0, c(1.0, 0.0));
        assert_eq!(s.dealias().max_abs(), 0.0);
        s.set(21, 21, c(1.0, 0.0));
        assert_eq!(s.dealias().get(21, 21), c(1.0, 0.0));
        assert_eq!(s.dealias().get(31, 0), c(0.0, 0.0));
    }

    fn random_field(g: GridSpec, values: &[f64]) -> PhysicalField {
        let arr = Array2::from_shape_vec((g.nx, g.ny), values.to_vec()).unwrap();
        PhysicalField::from_values(g, arr).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_identity(values in prop::collection::vec(-1.0f64..1.0, 16 * 32)) {
            let g = small_grid();
            let f = random_field(g, &values);
            let t = Transformer::new(g).unwrap();
            let back = t.inverse(&t.forward(&f).unwrap()).unwrap();
            let err = (back.values() - f.values()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            prop_assert!(err <= 1e-12 * f.max_abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn parseval_matches_quadrature(values in prop::collection::vec(-1.0f64..1.0, 16 * 32)) {
            let g = small_grid();
            let f = random_field(g, &values);
            let s = forward_transform(&f).unwrap();
            let spectral = s.sobolev_norm(0.0, NormKind::Inhomogeneous).unwrap();
            let quad = f.l2_norm();
            prop_assert!((spectral - quad).abs() <= 1e-10 * quad);
            prop_assert!((s.l2_norm() - quad).abs() <= 1e-10 * quad);
        }

        #[test]
        fn projection_is_exact_partition(values in prop::collection::vec(-1.0f64..1.0, 16 * 32)) {
            let g = small_grid();
            let s = forward_transform(&random_field(g, &values)).unwrap();
            let nz = s.project(ModeProjection::NonzeroX);
            let z = s.project(ModeProjection::ZeroX);
            prop_assert_eq!(&(nz.coef() + z.coef()), s.coef());
            prop_assert_eq!(nz.project(ModeProjection::NonzeroX), nz.clone());
            prop_assert_eq!(z.project(ModeProjection::ZeroX), z.clone());
            prop_assert_eq!(s.dealias().dealias(), s.dealias());
        }

        #[test]
        fn inhomogeneous_norm_monotone_in_order(
            values in prop::collection::vec(-1.0f64..1.0, 16 * 32),
            s0 in -2.0f64..3.0,
            ds in 0.0f64..2.0,
        ) {
            let g = small_grid();
            let s = forward_transform(&random_field(g, &values)).unwrap();
            let lo = s.sobolev_norm(s0, NormKind::Inhomogeneous).unwrap();
            let hi = s.sobolev_norm(s0 + ds, NormKind::Inhomogeneous).unwrap();
            prop_assert!(hi >= lo * (1.0 - 1e-14));
        }
    }
}
