//! Torsion (Lee) 1-form `θ`, defined by `dω^{n-1} = ω^{n-1} ∧ θ`, and the
//! Riemannian codifferential used to test `d*θ = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{omega_power, volume_constant, MetricField};
use crate::error::{Error, Result};
use crate::grid::forms::{basis, wedge_sign};
use crate::grid::{Deriv, FormField, ScalarField, Spectral};

/// Condition number above which the pointwise wedge map counts as singular.
const WEDGE_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct TorsionOneForm {
    form: FormField,
    residual: f64,
}

impl TorsionOneForm {
    /// The real 1-form `θ` on `(dx^1.., dy^1..)`.
    pub fn real_form(&self) -> &FormField {
        &self.form
    }

    /// `(1,0)` component `θ_i = (θ_{x^i} - i θ_{y^i}) / 2`, so that `θ = θ_i dz^i + conj`.
    pub fn component(&self, i: usize) -> Result<ScalarField> {
        let grid = self.form.grid();
        grid.check_axis(i)?;
        let c = self.form.components();
        let values = c[grid.x_axis(i)]
            .iter()
            .zip(&c[grid.y_axis(i)])
            .map(|(x, y)| Complex64::new(0.5 * x.re, -0.5 * y.re))
            .collect();
        ScalarField::from_values(grid, values)
    }

    /// Relative max-norm residual of `dω^{n-1} - ω^{n-1} ∧ θ`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn max_abs(&self) -> f64 {
        self.form.max_abs()
    }
}

/// Pointwise inversion of `α ↦ ω^{n-1} ∧ α` applied to `dω^{n-1}`.
pub fn torsion(metric: &MetricField) -> Result<TorsionOneForm> {
    let grid = metric.grid();
    let n = grid.dim();
    let m = grid.real_dim();
    if n == 1 {
        return Ok(TorsionOneForm { form: FormField::zeros(grid, 1)?, residual: 0.0 });
    }
    let pow = omega_power(metric, n - 1)?;
    let dpow = pow.exterior_d()?;

    let src = basis(m, m - 2);
    let dst = basis(m, m - 1);
    // (source component, target row, column a, sign)
    let mut table = Vec::new();
    for (si, &mask) in src.iter().enumerate() {
        for a in 0..m {
            if mask & (1 << a) != 0 {
                continue;
            }
            let target = dst.iter().position(|&t| t == mask | (1 << a)).expect("basis element");
            table.push((si, target, a, wedge_sign(mask, 1 << a)));
        }
    }

    let scale = dpow.max_abs();
    let mut theta = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; m];
    let mut worst = 0.0f64;
    let pc = pow.components();
    let dc = dpow.components();
    for p in 0..grid.len() {
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for &(si, row, col, sign) in &table {
            mat[(row, col)] += sign * pc[si][p].re;
        }
        let rhs = DVector::from_iterator(m, dc.iter().map(|c| c[p].re));
        let inv = mat
            .clone()
            .try_inverse()
            .ok_or(Error::SingularWedgeMap { point: p, condition: f64::INFINITY })?;
        let condition = mat.abs().row_sum().max() * inv.abs().row_sum().max();
        if condition > WEDGE_CONDITION_LIMIT {
            return Err(Error::SingularWedgeMap { point: p, condition });
        }
        let sol = &inv * &rhs;
        let defect = (&mat * &sol - &rhs).amax();
        worst = worst.max(defect);
        for a in 0..m {
            theta[a][p] = Complex64::new(sol[a], 0.0);
        }
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(TorsionOneForm { form: FormField::from_components(grid, 1, theta, true)?, residual })
}

/// Riemannian codifferential of a real 1-form:
/// `d*α = -(1/√G) ∂_a (√G G^{ab} α_b)`.
pub fn codifferential(alpha: &FormField, metric: &MetricField) -> Result<ScalarField> {
    if alpha.degree() != 1 {
        return Err(Error::Degree { degree: alpha.degree(), reason: "codifferential of a 1-form" });
    }
    let grid = metric.grid();
    let m = grid.real_dim();
    let spectral = Spectral::new(grid);
    let c = volume_constant(grid.dim()) / (1..=grid.dim()).product::<usize>() as f64;
    let sqrt_g: Vec<f64> = metric.det().iter().map(|d| c * d).collect();
    let comps = alpha.components();
    let mut flux = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; m];
    for p in 0..grid.len() {
        let ginv = metric.real_inverse_at(p);
        for a in 0..m {
            let s: f64 = (0..m).map(|b| ginv[a * m + b] * comps[b][p].re).sum();
            flux[a][p] = Complex64::new(sqrt_g[p] * s, 0.0);
        }
    }
    let mut div = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, f) in flux.iter().enumerate() {
        let hat = spectral.forward(f);
        spectral.accumulate(&mut div, &hat, Complex64::new(1.0, 0.0), &[Deriv::Real(a)]);
    }
    let div = spectral.inverse(div);
    let values: Vec<f64> = div.iter().zip(&sqrt_g).map(|(d, s)| -d.re / s).collect();
    ScalarField::from_real_values(grid, &values)
}

/// `coclosed_residual`: max-norm of `d*θ`.
pub fn coclosed_residual(theta: &TorsionOneForm, metric: &MetricField) -> Result<f64> {
    Ok(codifferential(theta.real_form(), metric)?.max_abs())
}
