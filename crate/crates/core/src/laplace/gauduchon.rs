use std::time::Instant;

use serde::Serialize;

use super::krylov::{gmres, GmresOptions};
use super::{AdjointLaplacian, ComplexLaplacian, MeanSymbolInverse};
use crate::curvature::{chern_curvature, scalar_s};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::metric::{structure_residuals, volume_integral, MetricField};

/// Largest Gauduchon residual accepted by the Poisson solver.
pub const GAUDUCHON_PRECONDITION: f64 = 1e-6;
const COMPATIBILITY_TOL: f64 = 1e-8;
const KERNEL_RATIO_FLAG: f64 = 1e3;
const ZERO_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GauduchonOptions {
    /// Target for `‖Δ*_c f‖_∞ / ‖f‖_∞`.
    pub tol: f64,
    /// Relative tolerance of each inner Krylov solve.
    pub inner_tol: f64,
    pub max_outer: usize,
    pub gmres: GmresOptions,
    /// Relative max-norm target of Poisson solves.
    pub poisson_tol: f64,
}

impl Default for GauduchonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, inner_tol: 1e-2, max_outer: 200, gmres: GmresOptions::default(), poisson_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub outer_iterations: usize,
    pub residual: f64,
    pub normalization: f64,
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct GauduchonFactor {
    pub f0: ScalarField,
    /// `‖Δ*_c f0‖_∞`.
    pub residual: f64,
    /// `|∫ f0 ω^n - ∫ ω^n| / ∫ ω^n`.
    pub normalization_error: f64,
    pub report: SolveReport,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Positive normalized element of `ker Δ*_c`, starting from `f = 1`.
pub fn gauduchon_factor(metric: &MetricField, opts: &GauduchonOptions) -> Result<GauduchonFactor> {
    gauduchon_factor_from(metric, &ScalarField::constant(metric.grid(), 1.0), opts)
}

/// Inverse iteration at shift zero in correction form: each step solves
/// `Δ*_c δ = Δ*_c x` with `δ` in the range of the mean-zero preconditioner
/// and sets `x ← x - δ`.
pub fn gauduchon_factor_from(metric: &MetricField, initial: &ScalarField, opts: &GauduchonOptions) -> Result<GauduchonFactor> {
    let start = Instant::now();
    initial.require_real()?;
    let adjoint = AdjointLaplacian::new(metric)?;
    let pre = MeanSymbolInverse::new(metric);
    let inner = GmresOptions { tol: opts.inner_tol, ..opts.gmres };
    let mut x = initial.real_values();
    let mut iterations = 0;
    let mut outer = 0;
    let mut residual = sup(&adjoint.apply(&x)) / sup(&x);
    while residual > opts.tol {
        if outer >= opts.max_outer {
            return Err(Error::NonConvergence {
                solver: "gauduchon inverse iteration",
                iterations: outer,
                residual,
                target: opts.tol,
            });
        }
        let r = adjoint.apply(&x);
        let step = gmres(|v| adjoint.apply(v), |v| pre.apply(v), &r, &inner)?;
        iterations += step.iterations;
        x.iter_mut().zip(&step.x).for_each(|(a, d)| *a -= d);
        outer += 1;
        residual = sup(&adjoint.apply(&x)) / sup(&x);
    }
    let f = ScalarField::from_real_values(metric.grid(), &x)?;
    let total = metric.total_volume();
    let c = total / volume_integral(&f, metric)?;
    let f0 = f.scale(c);
    let (min, max) = f0.min_max_re();
    if min <= 0.0 {
        return Err(Error::SignIndefinite { min, max });
    }
    let normalization_error = (volume_integral(&f0, metric)? - total).abs() / total;
    let residual = sup(&adjoint.apply(&f0.real_values()));
    Ok(GauduchonFactor {
        f0,
        residual,
        normalization_error,
        report: SolveReport { iterations, outer_iterations: outer, residual, normalization: c, wall_time: start.elapsed().as_secs_f64() },
    })
}

/// `f0^{1/(n-1)} g` for a computed factor.
pub fn gauduchon_metric_with(metric: &MetricField, factor: &GauduchonFactor) -> Result<MetricField> {
    let n = metric.dim();
    if n < 2 {
        return Err(Error::DimensionTooLow(n));
    }
    metric.conformal(&factor.f0.map_real(|v| v.ln() / (n - 1) as f64))
}

/// The Gauduchon representative `f0^{1/(n-1)} ω` of the conformal class.
pub fn gauduchon_metric(metric: &MetricField, opts: &GauduchonOptions) -> Result<MetricField> {
    gauduchon_metric_with(metric, &gauduchon_factor(metric, opts)?)
}

/// Estimates of the two smallest singular values of `Δ*_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    pub sigma1: f64,
    pub sigma2: f64,
    pub ratio: f64,
    /// Set when `sigma2 / sigma1 < 1e3`.
    pub flagged: bool,
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt()
}

/// `sigma1 = ‖Δ*_c f0‖ / ‖f0‖`; `sigma2` from three inverse-iteration steps on the complement.
pub fn kernel_diagnostics(metric: &MetricField, factor: &GauduchonFactor, opts: &GauduchonOptions) -> Result<KernelDiagnostics> {
    let adjoint = AdjointLaplacian::new(metric)?;
    let pre = MeanSymbolInverse::new(metric);
    let f0 = factor.f0.real_values();
    let sigma1 = rms(&adjoint.apply(&f0)) / rms(&f0);
    let density = metric.det();
    let mass: f64 = density.iter().sum();
    let project = |z: &[f64]| -> Vec<f64> {
        let c = z.iter().zip(density).map(|(a, d)| a * d).sum::<f64>() / mass;
        z.iter().map(|a| a - c).collect()
    };
    let mut z = project(&crate::fixtures::random_trig_field(metric.grid(), 0x5eed, 2, 1.0).real_values());
    let mut sigma2 = f64::INFINITY;
    let inner = GmresOptions { tol: 1e-8, ..opts.gmres };
    for _ in 0..3 {
        let w = gmres(|v| adjoint.apply(v), |v| pre.apply(v), &z, &inner)?.x;
        let norm = rms(&w);
        sigma2 = rms(&z) / norm;
        z = project(&w.iter().map(|a| a / norm).collect::<Vec<_>>());
    }
    let ratio = if sigma1 > 0.0 { sigma2 / sigma1 } else { f64::INFINITY };
    Ok(KernelDiagnostics { sigma1, sigma2, ratio, flagged: ratio < KERNEL_RATIO_FLAG })
}

/// Projection that removes Fourier modes at the Nyquist index of any axis.
struct NyquistFilter {
    spectral: crate::grid::Spectral,
    keep: Vec<bool>,
}

impl NyquistFilter {
    fn new(grid: crate::grid::TorusGrid) -> Self {
        let half = grid.samples() / 2;
        let keep = (0..grid.len()).map(|idx| !grid.multi_index(idx)[..grid.real_dim()].contains(&half)).collect();
        Self { spectral: crate::grid::Spectral::new(grid), keep }
    }

    fn apply(&self, values: &[f64]) -> Vec<f64> {
        let complex: Vec<num_complex::Complex64> = values.iter().map(|v| num_complex::Complex64::new(*v, 0.0)).collect();
        let mut hat = self.spectral.forward(&complex);
        for (c, keep) in hat.iter_mut().zip(&self.keep) {
            if !keep {
                *c = num_complex::Complex64::new(0.0, 0.0);
            }
        }
        self.spectral.inverse(hat).iter().map(|v| v.re).collect()
    }
}

/// Mean-zero `u` with `Δ_c u = f` on a Gauduchon metric.
///
/// Spectral first derivatives vanish on Nyquist modes, so the discrete
/// Laplacian annihilates them. The equation is solved in Galerkin form
/// `P Δ_c u = P f` over `u` without Nyquist content, where `P` removes the
/// Nyquist modes; the residual target is `tol · ‖P f‖_∞` in max norm.
pub fn solve_poisson_c(gmetric: &MetricField, f: &ScalarField, tol: f64, opts: &GauduchonOptions) -> Result<(ScalarField, SolveReport)> {
    let start = Instant::now();
    f.require_real()?;
    if f.grid() != gmetric.grid() {
        return Err(Error::DimensionMismatch("field and metric on different grids".into()));
    }
    let gres = structure_residuals(gmetric)?.gauduchon;
    if gres > GAUDUCHON_PRECONDITION {
        return Err(Error::NotGauduchon { residual: gres, tol: GAUDUCHON_PRECONDITION });
    }
    let filter = NyquistFilter::new(gmetric.grid());
    let rhs = filter.apply(&f.real_values());
    let fmax = sup(&rhs);
    let report = |iterations, residual| SolveReport {
        iterations,
        outer_iterations: 1,
        residual,
        normalization: 0.0,
        wall_time: start.elapsed().as_secs_f64(),
    };
    if fmax == 0.0 {
        return Ok((ScalarField::zeros(gmetric.grid()).real_part(), report(0, 0.0)));
    }
    let integral = volume_integral(f, gmetric)?;
    let l1 = volume_integral(&f.map_real(f64::abs), gmetric)?;
    if integral.abs() > COMPATIBILITY_TOL * l1 {
        return Err(Error::IncompatibleRhs { integral, tol: COMPATIBILITY_TOL * l1 });
    }
    let lap = ComplexLaplacian::new(gmetric);
    let pre = MeanSymbolInverse::new(gmetric);
    let mut krylov_tol = 0.1 * tol;
    let mut iterations = 0;
    loop {
        let projected = |v: &[f64]| filter.apply(&lap.apply(&filter.apply(v)));
        let out = gmres(projected, |v| pre.apply(v), &rhs, &GmresOptions { tol: krylov_tol, ..opts.gmres })?;
        iterations += out.iterations;
        let x = filter.apply(&out.x);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let u: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let res = projected(&u).iter().zip(&rhs).fold(0.0f64, |a, (l, r)| a.max((l - r).abs())) / fmax;
        if res <= tol {
            return Ok((ScalarField::from_real_values(gmetric.grid(), &u)?, report(iterations, res)));
        }
        if krylov_tol < 1e-3 * tol {
            return Err(Error::NonConvergence { solver: "poisson", iterations, residual: res, target: tol });
        }
        krylov_tol *= 0.1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn classify(value: f64, band: f64) -> Self {
        if value.abs() <= band {
            Sign::Zero
        } else if value > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GauduchonSign {
    /// `∫ S_{ω0} ω0^n`.
    pub value: f64,
    pub sign: Sign,
    pub zero_band: f64,
}

/// Sign of the total Chern scalar curvature of a Gauduchon metric.
pub fn gauduchon_sign_of(gmetric: &MetricField) -> Result<GauduchonSign> {
    let n = gmetric.dim();
    if n < 2 {
        return Err(Error::DimensionTooLow(n));
    }
    let s = scalar_s(gmetric, &chern_curvature(gmetric))?;
    let value = volume_integral(&s, gmetric)?;
    let zero_band = ZERO_BAND * gmetric.total_volume();
    Ok(GauduchonSign { value, sign: Sign::classify(value, zero_band), zero_band })
}

/// Gauduchon sign of the conformal class of `metric`.
pub fn gauduchon_sign(metric: &MetricField, opts: &GauduchonOptions) -> Result<GauduchonSign> {
    gauduchon_sign_of(&gauduchon_metric(metric, opts)?)
}

/// Output of the constant-sign normalization.
#[derive(Debug, Clone)]
pub struct ConstantSignScalar {
    /// `ω̃ = e^u ω0`.
    pub tilde: MetricField,
    pub gauduchon: MetricField,
    /// `C = ∫S_{ω0} ω0^n / ∫ω0^n`.
    pub c: f64,
    pub u: ScalarField,
    /// `S_{ω̃}` recomputed from the curvature of `ω̃`.
    pub s_tilde: ScalarField,
    pub sign: GauduchonSign,
    pub report: SolveReport,
}

impl ConstantSignScalar {
    /// `max - min` of `S_{ω̃} e^u`.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self.s_tilde.zip_map(&self.u, |s, u| s * u.re.exp()).real_part().min_max_re();
        hi - lo
    }
}

/// Solves `Δ_{c,ω0} u = -S_{ω0}/n + ∫S_{ω0}ω0^n/(n∫ω0^n)` so that `S_{e^u ω0} e^u = C`.
pub fn constant_sign_scalar_metric(metric: &MetricField, opts: &GauduchonOptions) -> Result<ConstantSignScalar> {
    let n = metric.dim();
    if n < 2 {
        return Err(Error::DimensionTooLow(n));
    }
    let gauduchon = gauduchon_metric(metric, opts)?;
    let s0 = scalar_s(&gauduchon, &chern_curvature(&gauduchon))?;
    let value = volume_integral(&s0, &gauduchon)?;
    let total = gauduchon.total_volume();
    let c = value / total;
    let zero_band = ZERO_BAND * total;
    let sign = GauduchonSign { value, sign: Sign::classify(value, zero_band), zero_band };
    let f = s0.map_real(|s| -s / n as f64 + c / n as f64);
    let (u, report) = solve_poisson_c(&gauduchon, &f, opts.poisson_tol, opts)?;
    let tilde = gauduchon.conformal(&u)?;
    let s_tilde = scalar_s(&tilde, &chern_curvature(&tilde))?;
    Ok(ConstantSignScalar { tilde, gauduchon, c, u, s_tilde, sign, report })
}
