use serde::Serialize;

use super::{bundle_curvature, gamma_field, generalized_eigenvalues, mean_curvature, smoothness_diagnostic, BundleMetricField, SmoothnessDiagnostic};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::laplace::{laplacian_c, solve_poisson_c, GauduchonOptions, SolveReport, GAUDUCHON_PRECONDITION};
use crate::metric::{structure_residuals, volume_integral, MetricField};

const MARGIN: f64 = 1e-8;

/// Max-norm of `K̃ - e^u (K + Δ_c u h)` over the max-norm of the right side,
/// where `K̃` is computed directly from `e^u h`.
pub fn conformal_bundle_check(metric: &MetricField, h: &BundleMetricField, u: &ScalarField) -> Result<f64> {
    let direct = {
        let ht = h.conformal(u)?;
        mean_curvature(metric, &ht, &bundle_curvature(&ht))?
    };
    let k = mean_curvature(metric, h, &bundle_curvature(h))?;
    let lu = laplacian_c(metric, u)?;
    let r = h.rank();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for p in 0..metric.grid().len() {
        let e = u.re(p).exp();
        let (km, hm, dm) = (k.matrix_at(p), h.matrix_at(p), direct.matrix_at(p));
        for c in 0..r * r {
            let rhs = (km[c] + hm[c] * lu.re(p)) * e;
            worst = worst.max((dm[c] - rhs).norm());
            scale = scale.max(rhs.norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateStatus {
    Certified,
    HypothesisFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingCertificate {
    pub status: CertificateStatus,
    /// `∫γ ω0^n`.
    pub gamma_integral: f64,
    /// Mean of `γ` against `ω0^n`.
    pub gamma_mean: f64,
    pub smoothness: SmoothnessDiagnostic,
    #[serde(skip)]
    pub u0: Option<ScalarField>,
    /// `-max_x λ_max(K̃)`, positive when certified.
    pub min_gap: Option<f64>,
    /// Required distance of every eigenvalue below zero.
    pub margin: Option<f64>,
    /// Sample holding the largest eigenvalue of `K̃`.
    pub worst_point: Option<usize>,
    /// `|∫Δ_c u0 ω0^n| / ∫|Δ_c u0| ω0^n`.
    pub integral_residual: Option<f64>,
    pub solve: Option<SolveReport>,
}

/// Conformal change `e^{u0} h` with `Δ_c u0 = -(γ - mean γ)` on a Gauduchon
/// metric, followed by a check that every eigenvalue of the new mean
/// curvature lies below `-margin`.
pub fn vanishing_certificate(gmetric: &MetricField, h: &BundleMetricField, opts: &GauduchonOptions) -> Result<VanishingCertificate> {
    if h.grid() != gmetric.grid() {
        return Err(Error::DimensionMismatch("bundle metric and metric on different grids".into()));
    }
    let gres = structure_residuals(gmetric)?.gauduchon;
    if gres > GAUDUCHON_PRECONDITION {
        return Err(Error::NotGauduchon { residual: gres, tol: GAUDUCHON_PRECONDITION });
    }
    let k = mean_curvature(gmetric, h, &bundle_curvature(h))?;
    let gamma = gamma_field(&k, h)?;
    let smoothness = smoothness_diagnostic(&gamma);
    let gamma_integral = volume_integral(&gamma, gmetric)?;
    let gamma_mean = gamma_integral / gmetric.total_volume();
    let mut cert = VanishingCertificate {
        status: CertificateStatus::HypothesisFailed,
        gamma_integral,
        gamma_mean,
        smoothness,
        u0: None,
        min_gap: None,
        margin: None,
        worst_point: None,
        integral_residual: None,
        solve: None,
    };
    if gamma_integral >= 0.0 {
        return Ok(cert);
    }
    let rhs = gamma.map_real(|g| gamma_mean - g);
    let (u0, solve) = solve_poisson_c(gmetric, &rhs, opts.poisson_tol, opts)?;
    let lu = laplacian_c(gmetric, &u0)?;
    let l1 = volume_integral(&lu.map_real(f64::abs), gmetric)?;
    let integral = volume_integral(&lu, gmetric)?;
    let integral_residual = if l1 > 0.0 { integral.abs() / l1 } else { integral.abs() };

    let ht = h.conformal(&u0)?;
    let kt = mean_curvature(gmetric, &ht, &bundle_curvature(&ht))?;
    let margin = MARGIN * kt.max_abs();
    let (mut worst, mut worst_point) = (f64::NEG_INFINITY, 0);
    for p in 0..gmetric.grid().len() {
        let values = generalized_eigenvalues(&kt, &ht, p)?;
        let top = *values.last().expect("rank >= 1");
        if top > worst {
            worst = top;
            worst_point = p;
        }
    }
    if worst > -margin {
        return Err(Error::CertificateFailed { point: worst_point, eigenvalue: worst, margin });
    }
    cert.status = CertificateStatus::Certified;
    cert.u0 = Some(u0);
    cert.min_gap = Some(-worst);
    cert.margin = Some(margin);
    cert.worst_point = Some(worst_point);
    cert.integral_residual = Some(integral_residual);
    cert.solve = Some(solve);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_bundle, BundleSpec};
    use crate::fixtures;
    use crate::grid::TorusGrid;
    use crate::metric::{build_metric, FourierTerm};

    fn flat() -> MetricField {
        build_metric(&fixtures::flat(2), TorusGrid::new(2, 16).unwrap()).unwrap()
    }

    #[test]
    fn oscillating_gamma_is_certified() {
        let m = flat();
        let spec = BundleSpec::line(vec![FourierTerm::new(vec![1, 0, 0, 0], 0.1, 0.0)], -0.25, 2);
        let h = build_bundle(&spec, m.grid()).unwrap();
        let cert = vanishing_certificate(&m, &h, &GauduchonOptions::default()).unwrap();
        assert_eq!(cert.status, CertificateStatus::Certified);
        assert!((cert.gamma_mean + 0.5).abs() < 1e-12);
        // K̃/h̃ = γ + Δ_c u0 is the mean of γ
        assert!((cert.min_gap.unwrap() - 0.5).abs() < 1e-9);
        assert!(cert.integral_residual.unwrap() < 1e-8);
    }

    #[test]
    fn negative_constant_gamma() {
        let m = flat();
        let h = build_bundle(&BundleSpec::line(Vec::new(), -0.5, 2), m.grid()).unwrap();
        let cert = vanishing_certificate(&m, &h, &GauduchonOptions::default()).unwrap();
        assert_eq!(cert.status, CertificateStatus::Certified);
        assert!(cert.u0.unwrap().max_abs() < 1e-14);
        assert!((cert.min_gap.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_gamma_fails_hypothesis() {
        let m = flat();
        let h = build_bundle(&BundleSpec::trivial(2), m.grid()).unwrap();
        let cert = vanishing_certificate(&m, &h, &GauduchonOptions::default()).unwrap();
        assert_eq!(cert.status, CertificateStatus::HypothesisFailed);
        assert!(cert.u0.is_none());
        let bad = build_metric(&fixtures::f1(2), m.grid()).unwrap();
        assert!(matches!(vanishing_certificate(&bad, &h, &GauduchonOptions::default()), Err(Error::NotGauduchon { .. })));
    }

    #[test]
    fn conformal_law() {
        let g = TorusGrid::new(2, 16).unwrap();
        let m = build_metric(&fixtures::f2(fixtures::F2_EPSILON), g).unwrap();
        let spec = BundleSpec {
            rank: 2,
            base: Some(vec![vec![[2.0, 0.0], [0.3, 0.1]], vec![[0.3, -0.1], [1.5, 0.0]]]),
            terms: vec![crate::metric::EntryTerm::new([1, 2], vec![0, 1, 1, 0], 0.1, 0.05)],
            weight: Vec::new(),
            twist: None,
        };
        let h = build_bundle(&spec, g).unwrap();
        assert!(conformal_bundle_check(&m, &h, &ScalarField::constant(g, 0.0)).unwrap() < 1e-14);
        assert!(conformal_bundle_check(&m, &h, &ScalarField::constant(g, 0.4)).unwrap() < 1e-13);
        let u = fixtures::random_trig_field(g, 3, 1, 0.1);
        assert!(conformal_bundle_check(&m, &h, &u).unwrap() < 1e-7);
    }
}
