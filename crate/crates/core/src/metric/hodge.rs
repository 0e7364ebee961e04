//! Hodge star of the compatible Riemannian metric and the `∂∂̄(f ω^{n-1})` map.

use num_complex::Complex64;

use super::{omega_power, volume_constant, MetricField};
use crate::error::{Error, Result};
use crate::grid::forms::{basis, mask_indices, wedge_sign};
use crate::grid::{ComplexForm, FormField, ScalarField, Spectral};

fn real_det(mut m: Vec<f64>, d: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..d {
        let pivot = (c..d).max_by(|&a, &b| m[a * d + c].abs().total_cmp(&m[b * d + c].abs())).unwrap_or(c);
        if m[pivot * d + c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            for k in 0..d {
                m.swap(pivot * d + k, c * d + k);
            }
            det = -det;
        }
        det *= m[c * d + c];
        for r in c + 1..d {
            let f = m[r * d + c] / m[c * d + c];
            for k in c..d {
                m[r * d + k] -= f * m[c * d + k];
            }
        }
    }
    det
}

/// Sign relating `dx^1∧..∧dx^n∧dy^1∧..∧dy^n` to the complex orientation
/// `dx^1∧dy^1∧..∧dx^n∧dy^n`.
pub(crate) fn orientation_sign(n: usize) -> f64 {
    if (n * (n.saturating_sub(1)) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `√det G = 2^n det g` per sample.
fn sqrt_det_real(metric: &MetricField) -> Vec<f64> {
    let n = metric.dim();
    let c = volume_constant(n) / (1..=n).product::<usize>() as f64;
    metric.det().iter().map(|d| c * d).collect()
}

/// Hodge star for the Riemannian metric compatible with `ω` and the complex
/// orientation; `α ∧ *β = <α, β> ω^n / n!`.
pub fn hodge_star(form: &FormField, metric: &MetricField) -> Result<FormField> {
    let grid = metric.grid();
    if form.grid() != grid {
        return Err(Error::DimensionMismatch("form and metric on different grids".into()));
    }
    let m = grid.real_dim();
    let d = form.degree();
    let src = basis(m, d);
    let dst = basis(m, m - d);
    let full: u8 = ((1u16 << m) - 1) as u8;
    let orient = orientation_sign(grid.dim());
    let targets: Vec<(usize, f64)> = src
        .iter()
        .map(|&mask| {
            let comp = full & !mask;
            let pos = dst.iter().position(|&t| t == comp).expect("complement in basis");
            (pos, orient * wedge_sign(mask, comp))
        })
        .collect();
    let idx: Vec<Vec<usize>> = src.iter().map(|&mask| mask_indices(mask).collect()).collect();
    let sqrt_g = sqrt_det_real(metric);
    let comps = form.components();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; dst.len()];
    let mut minor = vec![0.0; d * d];
    for p in 0..grid.len() {
        let ginv = metric.real_inverse_at(p);
        for (ri, rows) in idx.iter().enumerate() {
            let mut raised = Complex64::new(0.0, 0.0);
            for (ci, cols) in idx.iter().enumerate() {
                for (r, &a) in rows.iter().enumerate() {
                    for (c, &b) in cols.iter().enumerate() {
                        minor[r * d + c] = ginv[a * m + b];
                    }
                }
                let det = if d == 0 { 1.0 } else { real_det(minor.clone(), d) };
                raised += det * comps[ci][p];
            }
            let (pos, sign) = targets[ri];
            out[pos][p] = sign * sqrt_g[p] * raised;
        }
    }
    FormField::from_components(grid, m - d, out, form.is_real())
}

/// Precomputed `f ↦ *∂∂̄(f ω^{n-1})` for one metric.
pub struct DdbarOperator {
    spectral: Spectral,
    power: ComplexForm,
    star: Vec<f64>,
}

impl DdbarOperator {
    pub fn new(metric: &MetricField) -> Result<Self> {
        let grid = metric.grid();
        let n = grid.dim();
        let power = omega_power(metric, n - 1)?.to_complex();
        let orient = orientation_sign(n);
        let star = sqrt_det_real(metric).iter().map(|s| orient / s).collect();
        Ok(Self { spectral: Spectral::new(grid), power, star })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `φ` with `∂∂̄(f ω^{n-1}) = φ ω^n / n!`, for real samples `f`.
    pub fn apply(&self, f: &[f64]) -> Vec<Complex64> {
        let mut form = self.power.clone();
        for comp in form.components_mut() {
            comp.iter_mut().zip(f).for_each(|(c, v)| *c *= v);
        }
        let top = form.ddbar(&self.spectral).expect("degree 2n-2 input").to_real(false);
        top.top()
            .expect("top degree")
            .iter()
            .zip(&self.star)
            .map(|(t, s)| t * s)
            .collect()
    }
}

/// `ddbar_scalar`: `φ` with `∂∂̄(f ω^{n-1}) = φ ω^n / n!`.
pub fn ddbar_scalar(f: &ScalarField, metric: &MetricField) -> Result<ScalarField> {
    f.require_real()?;
    if f.grid() != metric.grid() {
        return Err(Error::DimensionMismatch("field and metric on different grids".into()));
    }
    let op = DdbarOperator::new(metric)?;
    ScalarField::from_values(metric.grid(), op.apply(&f.real_values()))
}
