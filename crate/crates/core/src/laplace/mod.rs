//! Complex and Riemannian Laplacians, the adjoint `Δ*_c`, Gauduchon factors
//! and metrics, the Poisson solver on Gauduchon metrics and the constant-sign
//! scalar curvature normalization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Deriv, FormField, ScalarField, Spectral};
use crate::metric::{codifferential, volume_integral, DdbarOperator, MetricField};

mod gauduchon;
mod identities;
pub mod krylov;

pub use gauduchon::{
    constant_sign_scalar_metric, gauduchon_factor, gauduchon_factor_from, gauduchon_metric, gauduchon_metric_with,
    gauduchon_sign, gauduchon_sign_of, kernel_diagnostics, solve_poisson_c, ConstantSignScalar, GauduchonFactor,
    GauduchonOptions, GauduchonSign, KernelDiagnostics, Sign, SolveReport, GAUDUCHON_PRECONDITION,
};
pub use identities::{identity_suite, identity_suite_with, laplacian_integral_residual, IdentityReport};

/// `u ↦ -g^{i j̄} ∂_i ∂_j̄ u` on real samples.
pub struct ComplexLaplacian<'a> {
    metric: &'a MetricField,
    spectral: Spectral,
}

impl<'a> ComplexLaplacian<'a> {
    pub fn new(metric: &'a MetricField) -> Self {
        Self { metric, spectral: Spectral::new(metric.grid()) }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.metric.dim();
        let values: Vec<Complex64> = u.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let hat = self.spectral.forward(&values);
        let mut out = vec![0.0; u.len()];
        // for real u the (j, i) term is the conjugate of the (i, j) term
        for i in 0..n {
            for j in i..n {
                let d = self.spectral.derivative_from_hat(&hat, &[Deriv::Z(i), Deriv::ZBar(j)]);
                let w = if i == j { 1.0 } else { 2.0 };
                let g = self.metric.inverse_entry(i, j);
                for ((o, dv), gv) in out.iter_mut().zip(&d).zip(g) {
                    *o -= w * (gv * dv).re;
                }
            }
        }
        out
    }
}

/// `f ↦ Δ*_c f = -(i/(n-1)!) ∗∂∂̄(f ω^{n-1})` on real samples.
pub struct AdjointLaplacian {
    op: DdbarOperator,
    factor: f64,
}

impl AdjointLaplacian {
    pub fn new(metric: &MetricField) -> Result<Self> {
        let n = metric.dim();
        if n < 2 {
            return Err(Error::DimensionTooLow(n));
        }
        let factor = 1.0 / (1..n).product::<usize>() as f64;
        Ok(Self { op: DdbarOperator::new(metric)?, factor })
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        // -i φ has real part Im φ
        self.op.apply(f).iter().map(|p| p.im * self.factor).collect()
    }
}

/// Inverse of the constant-coefficient `Δ_c` symbol of the mean inverse metric;
/// modes with vanishing symbol are sent to zero.
pub struct MeanSymbolInverse {
    spectral: Spectral,
    inverse: Vec<f64>,
}

impl MeanSymbolInverse {
    pub fn new(metric: &MetricField) -> Self {
        let grid = metric.grid();
        let n = grid.dim();
        let spectral = Spectral::new(grid);
        let mean: Vec<Complex64> = (0..n * n).map(|c| crate::grid::mean(metric.inverse_entry(c / n, c % n))).collect();
        let mut symbol = vec![0.0; grid.len()];
        spectral.for_each_mode(|idx, k| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s -= mean[i * n + j] * spectral.symbol(&[Deriv::Z(i), Deriv::ZBar(j)], k);
                }
            }
            symbol[idx] = s.re;
        });
        let top = symbol.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let inverse = symbol.iter().map(|s| if s.abs() > 1e-12 * top { 1.0 / s } else { 0.0 }).collect();
        Self { spectral, inverse }
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let values: Vec<Complex64> = r.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let mut hat = self.spectral.forward(&values);
        hat.iter_mut().zip(&self.inverse).for_each(|(h, s)| *h *= s);
        self.spectral.inverse(hat).iter().map(|v| v.re).collect()
    }
}

fn check_field(metric: &MetricField, u: &ScalarField) -> Result<()> {
    u.require_real()?;
    if u.grid() != metric.grid() {
        return Err(Error::DimensionMismatch("field and metric on different grids".into()));
    }
    Ok(())
}

/// `Δ_c u = -g^{i j̄} ∂_i ∂_j̄ u`.
pub fn laplacian_c(metric: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    check_field(metric, u)?;
    ScalarField::from_real_values(metric.grid(), &ComplexLaplacian::new(metric).apply(&u.real_values()))
}

/// Real differential `du` as a 1-form on `(dx, dy)`.
pub fn differential(u: &ScalarField) -> Result<FormField> {
    u.require_real()?;
    let grid = u.grid();
    let spectral = Spectral::new(grid);
    let hat = spectral.forward(u.values());
    let comps = (0..grid.real_dim())
        .map(|a| spectral.derivative_from_hat(&hat, &[Deriv::Real(a)]).iter().map(|v| v.re).collect())
        .collect();
    FormField::one_form(grid, comps)
}

/// Riemannian Laplacian `Δ u = d*du` in divergence form.
pub fn laplacian_riemann(metric: &MetricField, u: &ScalarField) -> Result<ScalarField> {
    check_field(metric, u)?;
    codifferential(&differential(u)?, metric)
}

/// `Δ*_c f` through the Hodge star.
pub fn adjoint_c(metric: &MetricField, f: &ScalarField) -> Result<ScalarField> {
    check_field(metric, f)?;
    ScalarField::from_real_values(metric.grid(), &AdjointLaplacian::new(metric)?.apply(&f.real_values()))
}

/// Max-norm of `2Δ_c u - Δu - <du, θ>` over the max-norm of `2Δ_c u`, for the
/// real 1-form `θ` (e.g. [`TorsionOneForm::real_form`](crate::metric::TorsionOneForm::real_form)).
pub fn comparison_residual(metric: &MetricField, u: &ScalarField, theta: &FormField) -> Result<f64> {
    let lc = laplacian_c(metric, u)?;
    let lr = laplacian_riemann(metric, u)?;
    let inner = metric.inner_one_forms(&differential(u)?, theta)?;
    let mut worst = 0.0f64;
    for p in 0..u.len() {
        worst = worst.max((2.0 * lc.re(p) - lr.re(p) - inner.re(p)).abs());
    }
    let scale = 2.0 * lc.max_abs();
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// `|<Δ_c u, f> - <u, Δ*_c f>|` over the Cauchy-Schwarz bound
/// `‖Δ_c u‖‖f‖ + ‖u‖‖Δ*_c f‖`, all against `ω^n`.
pub fn adjointness_residual(metric: &MetricField, u: &ScalarField, f: &ScalarField) -> Result<f64> {
    let lu = laplacian_c(metric, u)?;
    let af = adjoint_c(metric, f)?;
    let inner = |a: &ScalarField, b: &ScalarField| volume_integral(&(a * b).real_part(), metric);
    let left = inner(&lu, f)?;
    let right = inner(u, &af)?;
    let bound = (inner(&lu, &lu)? * inner(f, f)?).sqrt() + (inner(u, u)? * inner(&af, &af)?).sqrt();
    Ok(if bound > 0.0 { (left - right).abs() / bound } else { 0.0 })
}
