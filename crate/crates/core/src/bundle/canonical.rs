use num_complex::Complex64;
use serde::Serialize;

use super::BundleMetricField;
use crate::curvature::{chern_curvature, log_det, scalar_s};
use crate::error::{Error, Result};
use crate::grid::{Deriv, ScalarField, Spectral};
use crate::laplace::laplacian_c;
use crate::metric::MetricField;

/// The section `c (dz^1 ∧ … ∧ dz^n)^{⊗m}` of `mK_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalSection {
    pub m: u32,
    pub c: Complex64,
}

impl CanonicalSection {
    pub fn new(m: u32, c: Complex64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("canonical power must be positive".into()));
        }
        if c.norm() == 0.0 {
            return Err(Error::Config("canonical section coefficient must be nonzero".into()));
        }
        Ok(Self { m, c })
    }

    /// `|σ|² = |c|² det(g)^{-m}`.
    pub fn norm_sq(&self, metric: &MetricField) -> ScalarField {
        let c2 = self.c.norm_sqr();
        let m = self.m as i32;
        let values: Vec<f64> = metric.det().iter().map(|d| c2 * d.powi(-m)).collect();
        ScalarField::from_real_values(metric.grid(), &values).expect("grid-sized buffer")
    }
}

/// Induced metric `det(g)^{-m}` on `mK_M` as a rank-one bundle metric.
pub fn canonical_bundle(metric: &MetricField, m: u32) -> Result<BundleMetricField> {
    let m = m as i32;
    let entries = vec![metric.det().iter().map(|d| Complex64::new(d.powi(-m), 0.0)).collect()];
    BundleMetricField::from_entries(metric.grid(), 1, entries, Vec::new())
}

/// The three sampled terms of `-Δ_c|σ|² = |∇σ|² + mS|σ|²`.
#[derive(Debug, Clone)]
pub struct WeitzenbockTerms {
    pub lhs: ScalarField,
    pub gradient: ScalarField,
    pub scalar: ScalarField,
}

impl WeitzenbockTerms {
    pub fn compute(metric: &MetricField, sec: &CanonicalSection) -> Result<Self> {
        let grid = metric.grid();
        let n = grid.dim();
        let norm = sec.norm_sq(metric);
        let lhs = laplacian_c(metric, &norm)?.scale(-1.0);
        let spectral = Spectral::new(grid);
        let phi = log_det(metric).scale(sec.m as f64);
        let hat = spectral.forward(phi.values());
        let d: Vec<Vec<Complex64>> = (0..n).map(|i| spectral.derivative_from_hat(&hat, &[Deriv::Z(i)])).collect();
        let mut grad = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                let g = metric.inverse_entry(i, j);
                for p in 0..grid.len() {
                    grad[p] += (g[p] * d[i][p] * d[j][p].conj()).re * norm.re(p);
                }
            }
        }
        let gradient = ScalarField::from_real_values(grid, &grad)?;
        let s = scalar_s(metric, &chern_curvature(metric))?;
        let scalar = (&s * &norm).scale(sec.m as f64).real_part();
        Ok(Self { lhs, gradient, scalar })
    }

    /// Max-norm residual over `‖mS|σ|²‖ + ‖|∇σ|²‖`.
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.lhs.len() {
            worst = worst.max((self.lhs.re(p) - self.gradient.re(p) - self.scalar.re(p)).abs());
        }
        let scale = self.gradient.max_abs() + self.scalar.max_abs();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

pub fn weitzenbock_residual(metric: &MetricField, sec: &CanonicalSection) -> Result<f64> {
    Ok(WeitzenbockTerms::compute(metric, sec)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{bundle_curvature, gamma_field, mean_curvature};
    use crate::fixtures;
    use crate::grid::TorusGrid;
    use crate::metric::build_metric;

    #[test]
    fn flat_terms_vanish() {
        let g = TorusGrid::new(2, 8).unwrap();
        let m = build_metric(&fixtures::flat(2), g).unwrap();
        let t = WeitzenbockTerms::compute(&m, &CanonicalSection::new(3, Complex64::new(0.5, 1.0)).unwrap()).unwrap();
        assert!(t.lhs.max_abs() < 1e-13 && t.gradient.max_abs() < 1e-13 && t.scalar.max_abs() < 1e-13);
    }

    #[test]
    fn weitzenbock_and_example() {
        let g = TorusGrid::new(2, 32).unwrap();
        for (spec, m) in [(fixtures::f1(2), 1), (fixtures::f2(fixtures::F2_EPSILON), 2)] {
            let metric = build_metric(&spec, g).unwrap();
            let sec = CanonicalSection::new(m, Complex64::new(1.0, 0.0)).unwrap();
            assert!(weitzenbock_residual(&metric, &sec).unwrap() < 1e-7);
            let h = canonical_bundle(&metric, m).unwrap();
            let k = mean_curvature(&metric, &h, &bundle_curvature(&h)).unwrap();
            let gamma = gamma_field(&k, &h).unwrap();
            let s = scalar_s(&metric, &chern_curvature(&metric)).unwrap();
            assert!(gamma.max_diff(&s.scale(-(m as f64))) < 1e-7);
        }
        assert!(CanonicalSection::new(1, Complex64::new(0.0, 0.0)).is_err());
    }
}
