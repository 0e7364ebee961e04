use serde::Serialize;

use super::gauduchon::{gauduchon_factor, gauduchon_metric_with, kernel_diagnostics, GauduchonFactor, GauduchonOptions, KernelDiagnostics};
use super::{comparison_residual, laplacian_c};
use crate::curvature::{chern_curvature, scalar_s, scalar_s_hat};
use crate::error::{Error, Result};
use crate::fixtures::{generic_field, random_trig_field};
use crate::grid::ScalarField;
use crate::metric::{structure_residuals, torsion, volume_integral, MetricField};

/// Normalized residuals of the integral identities for one metric.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// Gauduchon residual of the input metric.
    pub gauduchon_residual: f64,
    /// Largest `|∫Δ_c u ω^n| / ∫|Δ_c u| ω^n` over random `u`.
    pub laplacian_integral: f64,
    /// `2Δ_c u = Δu + <du, θ>` for a random `u`.
    pub comparison: f64,
    /// `∫S_{ω0} ω0^n = ∫f0 S_ω ω^n`.
    pub total_scalar: f64,
    /// `∫Ŝ_{ω0} ω0^n = ∫f0 Ŝ_ω ω^n`.
    pub total_scalar_hat: f64,
    /// `∫(S_{ω0} - Ŝ_{ω0}) ω0^n` and `½∫|θ0|² ω0^n`.
    pub torsion_norm_sides: [f64; 2],
    pub torsion_norm: f64,
    /// `∫S_{ω0}ω0^n = ½∫f0(S+Ŝ)ω^n + ¼∫|θ0|²ω0^n`.
    pub decomposition: f64,
    pub kernel: KernelDiagnostics,
}

/// `|a - b|` over `scale`, absolute when the scale is below `1e-12`.
fn relative(a: f64, b: f64, scale: f64) -> f64 {
    if scale > 1e-12 {
        (a - b).abs() / scale
    } else {
        (a - b).abs()
    }
}

fn abs_integral(f: &ScalarField, metric: &MetricField) -> Result<f64> {
    volume_integral(&f.map_real(f64::abs), metric)
}

/// Largest `|∫Δ_c u ω^n| / ∫|Δ_c u| ω^n` over `count` seeded generic `u`.
pub fn laplacian_integral_residual(metric: &MetricField, seed: u64, count: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in 0..count {
        let u = generic_field(metric.grid(), seed.wrapping_add(s), 2, 0.3);
        let lu = laplacian_c(metric, &u)?;
        worst = worst.max(relative(volume_integral(&lu, metric)?, 0.0, abs_integral(&lu, metric)?));
    }
    Ok(worst)
}

pub fn identity_suite(metric: &MetricField, opts: &GauduchonOptions, seed: u64) -> Result<IdentityReport> {
    identity_suite_with(metric, &gauduchon_factor(metric, opts)?, opts, seed)
}

/// [`identity_suite`] with a precomputed Gauduchon factor.
pub fn identity_suite_with(metric: &MetricField, factor: &GauduchonFactor, opts: &GauduchonOptions, seed: u64) -> Result<IdentityReport> {
    let n = metric.dim();
    if n < 2 {
        return Err(Error::DimensionTooLow(n));
    }
    let grid = metric.grid();
    let gauduchon_residual = structure_residuals(metric)?.gauduchon;
    let laplacian_integral = laplacian_integral_residual(metric, seed, 10)?;
    let comparison = comparison_residual(metric, &random_trig_field(grid, seed ^ 0xc0de, 3, 0.5), torsion(metric)?.real_form())?;

    let kernel = kernel_diagnostics(metric, factor, opts)?;
    let omega0 = gauduchon_metric_with(metric, factor)?;

    let r = chern_curvature(metric);
    let s = scalar_s(metric, &r)?;
    let sh = scalar_s_hat(metric, &r)?;
    drop(r);
    let r0 = chern_curvature(&omega0);
    let s0 = scalar_s(&omega0, &r0)?;
    let sh0 = scalar_s_hat(&omega0, &r0)?;
    drop(r0);

    let f0s = &factor.f0 * &s;
    let f0sh = &factor.f0 * &sh;
    let int_s0 = volume_integral(&s0, &omega0)?;
    let int_sh0 = volume_integral(&sh0, &omega0)?;
    let int_f0s = volume_integral(&f0s, metric)?;
    let int_f0sh = volume_integral(&f0sh, metric)?;
    let total_scalar = relative(
        int_s0,
        int_f0s,
        abs_integral(&s0, &omega0)?.max(abs_integral(&f0s, metric)?),
    );
    let total_scalar_hat = relative(
        int_sh0,
        int_f0sh,
        abs_integral(&sh0, &omega0)?.max(abs_integral(&f0sh, metric)?),
    );

    let theta0 = torsion(&omega0)?;
    let norm_sq = omega0.inner_one_forms(theta0.real_form(), theta0.real_form())?;
    let lhs = int_s0 - int_sh0;
    let rhs = 0.5 * volume_integral(&norm_sq, &omega0)?;
    let torsion_norm = relative(lhs, rhs, lhs.abs().max(rhs.abs()));

    let half_sum = 0.5 * (int_f0s + int_f0sh);
    let quarter = 0.5 * rhs;
    let decomposition = relative(int_s0, half_sum + quarter, int_s0.abs() + half_sum.abs() + quarter.abs());

    Ok(IdentityReport {
        gauduchon_residual,
        laplacian_integral,
        comparison,
        total_scalar,
        total_scalar_hat,
        torsion_norm_sides: [lhs, rhs],
        torsion_norm,
        decomposition,
        kernel,
    })
}
