use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BundleConfig, Command, RunConfig};
use super::report::{Report, Timings};
use crate::bundle::{
    build_bundle, bundle_curvature, canonical_bundle, conformal_bundle_check, gamma_field, mean_curvature,
    smoothness_diagnostic, vanishing_certificate, weitzenbock_residual, BundleMetricField, CanonicalSection,
    CertificateStatus,
};
use crate::curvature::{
    berger_average, berger_rhs, chern_curvature, hsc_range_estimate, ricci_form, scalar_curvature_change_residual,
    scalar_s, scalar_s_hat, trace_omega, BergerMode, HscSampler,
};
use crate::error::{Error, Result};
use crate::fixtures::random_trig_field;
use crate::grid::ScalarField;
use crate::laplace::{
    adjointness_residual, constant_sign_scalar_metric, gauduchon_factor, gauduchon_metric_with, gauduchon_sign_of,
    identity_suite_with, laplacian_integral_residual, GauduchonOptions, Sign,
};
use crate::metric::{build_metric, structure_residuals, torsion, volume_integral, MetricField};

/// Result of one command: the report, its timings and the fields worth emitting.
pub struct Outcome {
    pub report: Report,
    pub timings: Timings,
    pub fields: Vec<(String, ScalarField)>,
}

/// `|a - b| / max(|a|, |b|)`, absolute below `1e-12`.
fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale > 1e-12 {
        (a - b).abs() / scale
    } else {
        (a - b).abs()
    }
}

fn max_rel_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    let d = a.max_diff(b);
    if scale > 1e-12 {
        d / scale
    } else {
        d
    }
}

fn metric_drift(a: &MetricField, b: &MetricField) -> f64 {
    let n = a.dim();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            for (x, y) in a.entry(i, j).iter().zip(b.entry(i, j)) {
                worst = worst.max((x - y).norm());
                scale = scale.max(x.norm());
            }
        }
    }
    worst / scale
}

pub fn gauduchon_options(config: &RunConfig) -> GauduchonOptions {
    GauduchonOptions { tol: config.tolerances.solver, poisson_tol: config.tolerances.poisson, ..GauduchonOptions::default() }
}

fn new_report(config: &RunConfig, command: Command) -> Report {
    Report::new(command.name(), config.digest(), [config.metric.dim, config.grid.samples], config.seed)
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let command = config.command.ok_or_else(|| Error::Config("no command given (config `command` or --command)".into()))?;
    let mut timings = Timings::default();
    let metric = timings.time("build_metric", || build_metric(&config.metric, config.grid()?))?;
    let mut report = new_report(config, command);
    let fields = match command {
        Command::Curvature => cmd_curvature(config, &metric, &mut report, &mut timings)?,
        Command::Gauduchon => cmd_gauduchon(config, &metric, &mut report, &mut timings)?,
        Command::Normalize => cmd_normalize(config, &metric, &mut report, &mut timings)?,
        Command::BundleCert => cmd_bundle_cert(config, &metric, &mut report, &mut timings)?,
        Command::Identities => cmd_identities(config, &metric, &mut report, &mut timings)?,
    };
    Ok(Outcome { report, timings, fields })
}

/// Chern curvature, both scalar curvatures, Ricci trace, Berger averages and HSC range.
pub fn cmd_curvature(config: &RunConfig, metric: &MetricField, report: &mut Report, timings: &mut Timings) -> Result<Vec<(String, ScalarField)>> {
    let tol = &config.tolerances;
    let n = metric.dim();
    let r = timings.time("chern_curvature", || chern_curvature(metric));
    report.value("curvature_max_abs", r.max_abs());
    report.check("curvature_hermitian", "conj(R_{i j̄ k l̄}) = R_{j ī l k̄}", r.hermitian_defect(), tol.hermitian);
    let s = scalar_s(metric, &r)?;
    let sh = scalar_s_hat(metric, &r)?;
    report.value("s_range", s.min_max_re());
    report.value("s_hat_range", sh.min_max_re());
    report.value("total_s", volume_integral(&s, metric)?);
    report.value("total_s_hat", volume_integral(&sh, metric)?);
    report.value("s_minus_s_hat_max_abs", s.max_diff(&sh));

    let tr = timings.time("ricci_trace", || trace_omega(&ricci_form(metric), metric))?;
    report.check("ricci_trace", "tr_ω Ric(ω) = S_ω", max_rel_diff(&tr, &s), tol.trace);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<usize> = (0..config.sampling.berger_points).map(|_| rng.gen_range(0..metric.grid().len())).collect();
    let (mut quad, mut mc) = (0.0f64, 0.0f64);
    timings.time("berger", || -> Result<()> {
        for &p in &points {
            let rhs = berger_rhs(s.re(p), sh.re(p), n);
            let q = berger_average(&r, metric, p, BergerMode::Quadrature)?;
            quad = quad.max(relative(q.value, rhs));
            if config.sampling.monte_carlo > 0 {
                let e = berger_average(&r, metric, p, BergerMode::MonteCarlo { seed: config.seed, samples: config.sampling.monte_carlo })?;
                let z = if e.standard_error > 0.0 { (e.value - rhs).abs() / e.standard_error } else { (e.value - rhs).abs() / 1e-300 };
                mc = mc.max(if (e.value - rhs).abs() < 1e-13 { 0.0 } else { z });
            }
        }
        Ok(())
    })?;
    report.check("berger_quadrature", "∫H_p dθ = (S+Ŝ)/(n(n+1))·Vol(S^{2n-1})", quad, tol.berger);
    if config.sampling.monte_carlo > 0 {
        report.value("berger_monte_carlo_samples", config.sampling.monte_carlo);
        report.check("berger_monte_carlo_sigmas", "Monte-Carlo sphere average within k standard errors", mc, tol.berger_sigmas);
    }
    let sampler = HscSampler {
        seed: config.seed,
        points: config.sampling.hsc_points,
        directions: config.sampling.hsc_directions,
        ..HscSampler::default()
    };
    if sampler.points > 0 && sampler.directions > 0 {
        let range = timings.time("hsc_range", || hsc_range_estimate(&r, metric, &sampler))?;
        report.value("hsc_range_heuristic", range);
    }
    drop(r);
    report.value("structure_residuals", structure_residuals(metric)?);
    report.value("torsion_max_abs", torsion(metric)?.max_abs());
    Ok(vec![("scalar_s".into(), s), ("scalar_s_hat".into(), sh)])
}

/// Gauduchon factor, metric, residuals, scaling invariance and sign.
pub fn cmd_gauduchon(config: &RunConfig, metric: &MetricField, report: &mut Report, timings: &mut Timings) -> Result<Vec<(String, ScalarField)>> {
    let tol = &config.tolerances;
    let opts = gauduchon_options(config);
    report.value("input_structure_residuals", structure_residuals(metric)?);
    let factor = timings.time("gauduchon_factor", || gauduchon_factor(metric, &opts))?;
    report.value("factor_solve", &factor.report);
    report.value("f0_range", factor.f0.min_max_re());
    let sup = factor.f0.max_abs();
    report.check("factor_residual", "‖Δ*_c f0‖_∞ / ‖f0‖_∞", factor.residual / sup, tol.solver);
    report.check("factor_normalization", "∫f0 ω^n = ∫ω^n (relative)", factor.normalization_error, tol.normalization);
    let min = factor.f0.min_max_re().0;
    report.push("factor_positive", "f0 > 0 at every sample", min, 0.0, min > 0.0);
    let kernel = timings.time("kernel_diagnostics", || crate::laplace::kernel_diagnostics(metric, &factor, &opts))?;
    report.value("kernel", kernel);

    let scaled = metric.scaled(2.5)?;
    let f_scaled = timings.time("scaled_factor", || gauduchon_factor(&scaled, &opts))?;
    report.check("factor_scaling", "f0(λg) = f0(g)", f_scaled.f0.max_diff(&factor.f0), tol.invariance);

    let gm = gauduchon_metric_with(metric, &factor)?;
    let res = structure_residuals(&gm)?;
    report.value("gauduchon_structure_residuals", res);
    report.check("gauduchon_residual", "∂∂̄ω0^{n-1} = 0 (normalized)", res.gauduchon, tol.gauduchon);
    let again = timings.time("idempotence", || gauduchon_factor(&gm, &opts))?;
    let gm2 = gauduchon_metric_with(&gm, &again)?;
    report.check("idempotence", "Gauduchon metric is a fixed point", metric_drift(&gm, &gm2), tol.idempotence);
    let sign = timings.time("gauduchon_sign", || gauduchon_sign_of(&gm))?;
    report.value("gauduchon_sign", sign);
    Ok(vec![("f0".into(), factor.f0)])
}

/// Conformal normalization to constant-sign scalar curvature.
pub fn cmd_normalize(config: &RunConfig, metric: &MetricField, report: &mut Report, timings: &mut Timings) -> Result<Vec<(String, ScalarField)>> {
    let tol = &config.tolerances;
    let opts = gauduchon_options(config);
    let out = timings.time("constant_sign_scalar_metric", || constant_sign_scalar_metric(metric, &opts))?;
    report.value("c", out.c);
    report.value("gauduchon_sign", out.sign);
    report.value("poisson_solve", &out.report);
    report.check("poisson_residual", "‖Δ_c u - f‖_∞ / ‖f‖_∞", out.report.residual, tol.poisson);
    let flat = out.s_tilde.zip_map(&out.u, |s, u| s * u.re.exp());
    report.value("s_tilde_e_u_range", flat.min_max_re());
    let spread = out.spread();
    if out.sign.sign == Sign::Zero {
        report.check("s_tilde_e_u_spread_abs", "S_ω̃ e^u = C (max - min, C in zero band)", spread, tol.spread_abs);
    } else {
        report.check("s_tilde_e_u_spread", "S_ω̃ e^u = C ((max - min)/|C|)", spread / out.c.abs(), tol.spread);
    }
    let c_sign = Sign::classify(out.c * out.gauduchon.total_volume(), out.sign.zero_band);
    report.push("sign_c", "sign(C) = Gauduchon sign", 0.0, 0.0, c_sign == out.sign.sign);
    let change = timings.time("scalar_change", || scalar_curvature_change_residual(&out.gauduchon, &out.u))?;
    report.check("scalar_change", "S_ω̃ = e^{-u}(nΔ_c u + S_ω0)", change, tol.scalar_change);
    Ok(vec![("u".into(), out.u), ("s_tilde_e_u".into(), flat), ("s_tilde".into(), out.s_tilde)])
}

fn build_bundle_metric(config: &RunConfig, gmetric: &MetricField) -> Result<(BundleMetricField, Option<u32>)> {
    match &config.bundle {
        Some(BundleConfig::Canonical { canonical }) => Ok((canonical_bundle(gmetric, *canonical)?, Some(*canonical))),
        Some(BundleConfig::Spec(spec)) => Ok((build_bundle(spec, gmetric.grid())?, None)),
        None => Err(Error::Config("bundle-cert needs a [bundle] section".into())),
    }
}

/// Vanishing certificate for the configured bundle over the Gauduchon metric.
pub fn cmd_bundle_cert(config: &RunConfig, metric: &MetricField, report: &mut Report, timings: &mut Timings) -> Result<Vec<(String, ScalarField)>> {
    let tol = &config.tolerances;
    let opts = gauduchon_options(config);
    let factor = timings.time("gauduchon_factor", || gauduchon_factor(metric, &opts))?;
    let gm = gauduchon_metric_with(metric, &factor)?;
    let (h, canonical) = build_bundle_metric(config, &gm)?;
    let rb = timings.time("bundle_curvature", || bundle_curvature(&h));
    report.check("bundle_curvature_hermitian", "h_{βμ̄}R^β_{ij̄α} Hermitian", rb.hermitian_defect(&h), tol.hermitian);
    let k = mean_curvature(&gm, &h, &rb)?;
    drop(rb);
    report.check("mean_curvature_hermitian", "K Hermitian", k.hermitian_defect(), tol.hermitian);
    let gamma = gamma_field(&k, &h)?;
    report.value("gamma_range", gamma.min_max_re());
    report.value("gamma_smoothness", smoothness_diagnostic(&gamma));
    let u = random_trig_field(gm.grid(), config.seed ^ 0xb0d1e, 1, 0.1);
    let law = timings.time("conformal_bundle_check", || conformal_bundle_check(&gm, &h, &u))?;
    report.check("mean_curvature_conformal_law", "K̃ = e^u (K + Δ_c u · h)", law, tol.conformal_bundle);
    if let Some(m) = canonical {
        let s = scalar_s(&gm, &chern_curvature(&gm))?;
        report.check("canonical_gamma", "γ(mK_M) = -m S_ω", gamma.max_diff(&s.scale(-(m as f64))), tol.curvature_identity);
        let sec = CanonicalSection::new(m, Complex64::new(1.0, 0.0))?;
        report.check("weitzenbock", "-Δ_c|σ|² = |∇σ|² + mS|σ|²", weitzenbock_residual(&gm, &sec)?, tol.curvature_identity);
    }
    let cert = timings.time("vanishing_certificate", || vanishing_certificate(&gm, &h, &opts))?;
    report.value("certificate", &cert);
    let mut fields = vec![("gamma".into(), gamma)];
    match cert.status {
        CertificateStatus::HypothesisFailed => report.hypothesis_failed(),
        CertificateStatus::Certified => {
            let gap = cert.min_gap.unwrap_or(f64::NAN);
            report.push("min_gap", "every eigenvalue of K̃ below -margin", gap, cert.margin.unwrap_or(0.0), gap > 0.0);
            report.check(
                "certificate_integral",
                "∫Δ_c u0 ω0^n = 0 (relative)",
                cert.integral_residual.unwrap_or(f64::NAN),
                tol.certificate_integral,
            );
            if let Some(u0) = cert.u0 {
                fields.push(("u0".into(), u0));
            }
        }
    }
    Ok(fields)
}

/// Integral identities, comparison, adjointness, Weitzenböck and the scalar-curvature change law.
pub fn cmd_identities(config: &RunConfig, metric: &MetricField, report: &mut Report, timings: &mut Timings) -> Result<Vec<(String, ScalarField)>> {
    let tol = &config.tolerances;
    let opts = gauduchon_options(config);
    let grid = metric.grid();
    let count = config.sampling.random_fields as u64;
    let factor = timings.time("gauduchon_factor", || gauduchon_factor(metric, &opts))?;
    let rep = timings.time("identity_suite", || identity_suite_with(metric, &factor, &opts, config.seed))?;
    report.value("identity_suite", &rep);
    let gm = gauduchon_metric_with(metric, &factor)?;
    let on_gauduchon = laplacian_integral_residual(&gm, config.seed, count)?;
    report.check("laplacian_integral_gauduchon", "∫Δ_c u ω0^n = 0 for random u", on_gauduchon, tol.integral);
    if rep.gauduchon_residual > crate::laplace::GAUDUCHON_PRECONDITION {
        let on_input = laplacian_integral_residual(metric, config.seed, count)?;
        report.push("laplacian_integral_control", "∫Δ_c u ω^n ≠ 0 when ω is not Gauduchon", on_input, 1e-3, on_input > 1e-3);
    }
    report.check("comparison", "2Δ_c u = Δu + <du, θ>", rep.comparison, tol.comparison);
    report.check("total_scalar", "∫S_ω0 ω0^n = ∫f0 S_ω ω^n", rep.total_scalar, tol.identity);
    report.check("total_scalar_hat", "∫Ŝ_ω0 ω0^n = ∫f0 Ŝ_ω ω^n", rep.total_scalar_hat, tol.identity);
    report.check("torsion_norm", "∫(S - Ŝ)ω0^n = ½∫|θ0|² ω0^n", rep.torsion_norm, tol.identity);
    report.check("decomposition", "∫S ω0^n = ½∫f0(S+Ŝ)ω^n + ¼∫|θ0|²ω0^n", rep.decomposition, tol.identity);

    let mut adjoint = 0.0f64;
    timings.time("adjointness", || -> Result<()> {
        for s in 0..count {
            let u = random_trig_field(grid, config.seed.wrapping_add(100 + s), 3, 0.3);
            let f = &random_trig_field(grid, config.seed.wrapping_add(200 + s), 3, 0.3) + &u;
            adjoint = adjoint.max(adjointness_residual(metric, &u, &f)?);
        }
        Ok(())
    })?;
    report.check("adjointness", "<Δ_c u, f> = <u, Δ*_c f>", adjoint, tol.adjoint);
    let u = random_trig_field(grid, config.seed ^ 0x5ca1, 1, 0.1);
    let change = timings.time("scalar_change", || scalar_curvature_change_residual(metric, &u))?;
    report.check("scalar_change", "S_{e^u ω} = e^{-u}(nΔ_c u + S_ω)", change, tol.scalar_change);
    for m in [1u32, 2] {
        let sec = CanonicalSection::new(m, Complex64::new(1.0, 0.0))?;
        let w = timings.time("weitzenbock", || weitzenbock_residual(metric, &sec))?;
        report.check(&format!("weitzenbock_m{m}"), "-Δ_c|σ|² = |∇σ|² + mS|σ|²", w, tol.curvature_identity);
    }
    Ok(vec![("f0".into(), factor.f0)])
}
