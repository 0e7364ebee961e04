//! Uniform periodic sampling of the flat torus `C^n / (Z^n + i Z^n)`.
//!
//! Real coordinates are ordered `(x^1, ..., x^n, y^1, ..., y^n)` with
//! `z^j = x^j + i y^j`. Samples are stored row-major with axis 0 slowest,
//! so the flat index of `(m_0, ..., m_{2n-1})` is `sum_a m_a N^(2n-1-a)`.

pub mod forms;
pub mod spectral;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use forms::{ComplexForm, FormField};
pub use spectral::{Deriv, Spectral};

/// Largest supported real dimension (n <= 3).
pub const MAX_REAL_DIM: usize = 6;

/// Default point budget: 2^22 samples (64 MiB per complex field).
pub const DEFAULT_MAX_POINTS: usize = 1 << 22;

/// Default relative tolerance for the imaginary part of a real-valued field.
pub const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    samples: usize,
    len: usize,
}

impl TorusGrid {
    /// `make_grid`: complex dimension `n` in 1..=3, even `samples >= 8`.
    pub fn new(dim: usize, samples: usize) -> Result<Self> {
        Self::with_budget(dim, samples, DEFAULT_MAX_POINTS)
    }

    pub fn with_budget(dim: usize, samples: usize, max_points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "complex dimension {dim} outside 1..=3"
            )));
        }
        if samples % 2 != 0 {
            return Err(Error::InvalidGrid(format!("samples per axis must be even, got {samples}")));
        }
        if samples < 8 {
            return Err(Error::InvalidGrid(format!("samples per axis must be >= 8, got {samples}")));
        }
        let len = (0..2 * dim).try_fold(1usize, |acc, _| acc.checked_mul(samples));
        match len {
            Some(len) if len <= max_points => Ok(Self { dim, samples, len }),
            Some(len) => Err(Error::MemoryBudget { points: len, budget: max_points }),
            None => Err(Error::MemoryBudget { points: usize::MAX, budget: max_points }),
        }
    }

    /// Complex dimension n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn real_dim(&self) -> usize {
        2 * self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.samples as f64
    }

    /// Real axis carrying `x^j` (0-based j).
    pub fn x_axis(&self, j: usize) -> usize {
        j
    }

    /// Real axis carrying `y^j` (0-based j).
    pub fn y_axis(&self, j: usize) -> usize {
        self.dim + j
    }

    pub fn check_axis(&self, j: usize) -> Result<()> {
        if j < self.dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange { axis: j, dim: self.dim })
        }
    }

    /// Per-axis sample indices of a flat index.
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_REAL_DIM] {
        let mut out = [0; MAX_REAL_DIM];
        for a in (0..self.real_dim()).rev() {
            out[a] = idx % self.samples;
            idx /= self.samples;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .take(self.real_dim())
            .fold(0, |acc, &m| acc * self.samples + (m % self.samples))
    }

    /// Coordinates of a sample point; only the first `2n` entries are meaningful.
    pub fn point(&self, idx: usize) -> [f64; MAX_REAL_DIM] {
        let h = self.spacing();
        let multi = self.multi_index(idx);
        let mut x = [0.0; MAX_REAL_DIM];
        for a in 0..self.real_dim() {
            x[a] = multi[a] as f64 * h;
        }
        x
    }

    /// Signed integer wavenumber of DFT index `m`; the Nyquist index maps to `N/2`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.samples as i64;
        let m = m as i64;
        if m <= n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Calls `f(idx, coords)` for every sample in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let d = self.real_dim();
        let h = self.spacing();
        let mut multi = [0usize; MAX_REAL_DIM];
        let mut x = [0.0; MAX_REAL_DIM];
        for idx in 0..self.len {
            for a in 0..d {
                x[a] = multi[a] as f64 * h;
            }
            f(idx, &x[..d]);
            for a in (0..d).rev() {
                multi[a] += 1;
                if multi[a] < self.samples {
                    break;
                }
                multi[a] = 0;
            }
        }
    }
}

/// Complex samples of a function on the torus, optionally tagged real.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<Complex64>,
    real: bool,
}

impl ScalarField {
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        grid.for_each_point(|_, x| values.push(f(x)));
        Self { grid, values, real: false }
    }

    pub fn from_real_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        grid.for_each_point(|_, x| values.push(Complex64::new(f(x), 0.0)));
        Self { grid, values, real: true }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![Complex64::new(c, 0.0); grid.len()], real: true }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, real: false })
    }

    pub fn from_real_values(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            real: true,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn re(&self, idx: usize) -> f64 {
        self.values[idx].re
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Checks the imaginary parts against `tol` (relative to the field scale,
    /// floored at 1) and returns the field with them dropped.
    pub fn into_real(self, tol: f64) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        let (point, imag) = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.im.abs()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if imag > tol * scale {
            return Err(Error::NotReal { point, imag });
        }
        Ok(self.real_part())
    }

    /// Drops imaginary parts unconditionally.
    pub fn real_part(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
            real: true,
        }
    }

    pub fn require_real(&self) -> Result<()> {
        if self.real {
            Ok(())
        } else {
            self.clone().into_real(REAL_TOL).map(|_| ())
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            real: false,
        }
    }

    /// Applies a real function to the real parts; result is tagged real.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(f(v.re), 0.0)).collect(),
            real: true,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            real: false,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.map(|v| v * c);
        out.real = self.real;
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.map(|v| v.conj());
        out.real = self.real;
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_max_re(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.re), hi.max(v.re))
        })
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Plain integral over `[0,1)^{2n}`: the sample mean.
    pub fn integrate(&self) -> Complex64 {
        mean(&self.values)
    }
}

/// Sequential left-to-right mean; the fixed order keeps reductions reproducible.
pub(crate) fn mean(values: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for v in values {
        acc += v;
    }
    acc / values.len() as f64
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                let mut out = self.zip_map(rhs, |a, b| a $op b);
                out.real = self.real && rhs.real;
                out
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
