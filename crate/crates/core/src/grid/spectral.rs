//! Fourier spectral calculus on the periodic grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ScalarField, TorusGrid, MAX_REAL_DIM};
use crate::error::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A first-order derivative: along a real axis, or Wirtinger `d/dz^j`, `d/dzbar^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Real(usize),
    Z(usize),
    ZBar(usize),
}

/// FFT plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // derivative wavenumber per DFT index; the unpaired Nyquist mode is zeroed
    kd: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.samples();
        let kd = (0..n)
            .map(|m| if 2 * m == n { 0.0 } else { grid.wavenumber(m) as f64 })
            .collect();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kd,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    fn transform_in_place(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.samples();
        let d = self.grid.real_dim();
        let len = data.len();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut buf = Vec::new();
        for a in 0..d {
            let stride = n.pow((d - 1 - a) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            buf.resize(block, Complex64::new(0.0, 0.0));
            for start in (0..len).step_by(block) {
                let chunk = &mut data[start..start + block];
                for m in 0..n {
                    let row = &chunk[m * stride..(m + 1) * stride];
                    for (o, v) in row.iter().enumerate() {
                        buf[o * n + m] = *v;
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for m in 0..n {
                    let row = &mut chunk[m * stride..(m + 1) * stride];
                    for (o, v) in row.iter_mut().enumerate() {
                        *v = buf[o * n + m];
                    }
                }
            }
        }
    }

    /// Normalized forward transform: `hat[0]` is the mean of the samples.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform_in_place(&mut data, &self.forward);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
        data
    }

    pub fn inverse_in_place(&self, hat: &mut [Complex64]) {
        self.transform_in_place(hat, &self.inverse);
    }

    pub fn inverse(&self, mut hat: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse_in_place(&mut hat);
        hat
    }

    /// Calls `f(flat_index, k)` for every Fourier mode with derivative wavenumbers `k`.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[f64])) {
        let d = self.grid.real_dim();
        let n = self.grid.samples();
        let mut multi = [0usize; MAX_REAL_DIM];
        let mut k = [0.0; MAX_REAL_DIM];
        for idx in 0..self.grid.len() {
            for a in 0..d {
                k[a] = self.kd[multi[a]];
            }
            f(idx, &k[..d]);
            for a in (0..d).rev() {
                multi[a] += 1;
                if multi[a] < n {
                    break;
                }
                multi[a] = 0;
            }
        }
    }

    /// Fourier multiplier of a product of first-order derivatives at wavenumber `k`.
    pub fn symbol(&self, derivs: &[Deriv], k: &[f64]) -> Complex64 {
        let n = self.grid.dim();
        derivs.iter().fold(Complex64::new(1.0, 0.0), |acc, d| {
            acc * match *d {
                Deriv::Real(a) => I * (2.0 * PI * k[a]),
                Deriv::Z(j) => Complex64::new(PI * k[n + j], PI * k[j]),
                Deriv::ZBar(j) => Complex64::new(-PI * k[n + j], PI * k[j]),
            }
        })
    }

    /// `acc += coeff * D hat` in Fourier space.
    pub fn accumulate(&self, acc: &mut [Complex64], hat: &[Complex64], coeff: Complex64, derivs: &[Deriv]) {
        self.for_each_mode(|idx, k| {
            acc[idx] += coeff * self.symbol(derivs, k) * hat[idx];
        });
    }

    pub fn derivative_from_hat(&self, hat: &[Complex64], derivs: &[Deriv]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); hat.len()];
        self.accumulate(&mut out, hat, Complex64::new(1.0, 0.0), derivs);
        self.inverse(out)
    }

    pub fn derivative(&self, values: &[Complex64], derivs: &[Deriv]) -> Vec<Complex64> {
        self.derivative_from_hat(&self.forward(values), derivs)
    }

    /// Derivative of a scalar field; `derivs` are applied as a product of symbols.
    pub fn derive(&self, field: &ScalarField, derivs: &[Deriv]) -> ScalarField {
        let values = self.derivative(field.values(), derivs);
        ScalarField::from_values(self.grid, values).expect("grid-sized buffer")
    }
}

/// `d field / dz^i` (0-based axis index).
pub fn wirtinger_d(field: &ScalarField, i: usize) -> Result<ScalarField> {
    field.grid().check_axis(i)?;
    Ok(Spectral::new(field.grid()).derive(field, &[Deriv::Z(i)]))
}

/// `d field / dzbar^i` (0-based axis index).
pub fn wirtinger_dbar(field: &ScalarField, i: usize) -> Result<ScalarField> {
    field.grid().check_axis(i)?;
    Ok(Spectral::new(field.grid()).derive(field, &[Deriv::ZBar(i)]))
}
