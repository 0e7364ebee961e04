//! Chern curvature of `(T^{1,0}M, ω)`, holomorphic sectional curvature, the two
//! scalar curvatures and the Ricci form.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexForm, Deriv, FormField, ScalarField, Spectral, TorusGrid};
use crate::metric::MetricField;

mod berger;

pub use berger::{
    berger_average, berger_rhs, hsc_range_estimate, sample_unit_sphere, sphere_volume, unitary_frame, BergerEstimate,
    BergerMode, HscRange, HscSampler,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `Im H_p(v)` relative to the tensor scale.
pub const HSC_IMAG_TOL: f64 = 1e-10;

/// Pointwise `R_{i j̄ k l̄}`, component `((i*n + j)*n + k)*n + l`.
#[derive(Debug, Clone)]
pub struct ChernCurvatureField {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
}

impl ChernCurvatureField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.dim();
        ((i * n + j) * n + k) * n + l
    }

    /// Sampled `R_{i j̄ k l̄}` (0-based).
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> &[Complex64] {
        &self.comps[self.index(i, j, k, l)]
    }

    /// All `n^4` components at one sample, in storage order.
    pub fn at(&self, p: usize) -> Vec<Complex64> {
        self.comps.iter().map(|c| c[p]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter().map(|v| v.norm())).fold(0.0, f64::max)
    }

    /// `max |conj(R_{i j̄ k l̄}) - R_{j ī l k̄}|` relative to the tensor scale.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let a = self.component(i, j, k, l);
                        let b = self.component(j, i, l, k);
                        for (x, y) in a.iter().zip(b) {
                            worst = worst.max((x.conj() - y).norm());
                        }
                    }
                }
            }
        }
        let scale = self.max_abs();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

/// `R_{i j̄ k l̄} = -∂_i ∂_j̄ g_{k l̄} + g^{p q̄} ∂_i g_{k q̄} ∂_j̄ g_{p l̄}`.
pub fn chern_curvature(metric: &MetricField) -> ChernCurvatureField {
    let grid = metric.grid();
    let n = grid.dim();
    let spectral = Spectral::new(grid);
    let hats: Vec<Vec<Complex64>> = (0..n * n).map(|c| spectral.forward(metric.entry(c / n, c % n))).collect();
    // dz[i*n*n + k*n + q] = ∂_i g_{k q̄}
    let mut dz = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for hat in &hats {
            dz.push(spectral.derivative_from_hat(hat, &[Deriv::Z(i)]));
        }
    }
    let ginv: Vec<&[Complex64]> = (0..n * n).map(|c| metric.inverse_entry(c / n, c % n)).collect();
    let mut comps = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = spectral.derivative_from_hat(&hats[k * n + l], &[Deriv::Z(i), Deriv::ZBar(j)]);
                    for (x, v) in r.iter_mut().enumerate() {
                        let mut quad = ZERO;
                        for p in 0..n {
                            for q in 0..n {
                                // ∂_j̄ g_{p l̄} = conj(∂_j g_{l p̄})
                                quad += ginv[p * n + q][x] * dz[(i * n + k) * n + q][x] * dz[(j * n + l) * n + p][x].conj();
                            }
                        }
                        *v = quad - *v;
                    }
                    comps.push(r);
                }
            }
        }
    }
    ChernCurvatureField { grid, comps }
}

/// A tangent vector `v = v^i ∂/∂z^i` at one grid sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    pub point: usize,
    pub v: Vec<Complex64>,
}

impl Direction {
    pub fn new(point: usize, v: Vec<Complex64>) -> Self {
        Self { point, v }
    }

    /// Rescales `v` to unit length for `g` at the sample.
    pub fn unit(metric: &MetricField, point: usize, v: Vec<Complex64>) -> Result<Self> {
        let d = Self { point, v };
        let norm = d.norm_sq(metric)?.sqrt();
        if !(norm > 0.0) {
            return Err(Error::DimensionMismatch("zero direction".into()));
        }
        Ok(Self { point, v: d.v.iter().map(|c| c / norm).collect() })
    }

    /// `g_{i j̄} v^i conj(v^j)`.
    pub fn norm_sq(&self, metric: &MetricField) -> Result<f64> {
        let n = metric.dim();
        if self.v.len() != n || self.point >= metric.grid().len() {
            return Err(Error::DimensionMismatch(format!("direction of length {} at sample {}", self.v.len(), self.point)));
        }
        let g = metric.matrix_at(self.point);
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                s += g[i * n + j] * self.v[i] * self.v[j].conj();
            }
        }
        Ok(s.re)
    }
}

/// `R(v, v̄, v, v̄)` for a tensor sampled at a single point.
pub(crate) fn contract_hsc(r: &[Complex64], v: &[Complex64]) -> Complex64 {
    let n = v.len();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            let a = v[i] * v[j].conj();
            for k in 0..n {
                for l in 0..n {
                    s += r[((i * n + j) * n + k) * n + l] * a * v[k] * v[l].conj();
                }
            }
        }
    }
    s
}

/// `hsc_at`: `H_p(v) = R_{i j̄ k l̄} v^i v̄^j v^k v̄^l`.
pub fn hsc_at(r: &ChernCurvatureField, d: &Direction) -> Result<f64> {
    let n = r.dim();
    if d.v.len() != n || d.point >= r.grid().len() {
        return Err(Error::DimensionMismatch(format!("direction of length {} at sample {}", d.v.len(), d.point)));
    }
    let h = contract_hsc(&r.at(d.point), &d.v);
    let scale = r.max_abs() * d.v.iter().map(|c| c.norm_sqr()).sum::<f64>().powi(2);
    if h.im.abs() > HSC_IMAG_TOL * scale.max(1.0) {
        return Err(Error::NotReal { point: d.point, imag: h.im });
    }
    Ok(h.re)
}

fn check_grids(metric: &MetricField, r: &ChernCurvatureField) -> Result<()> {
    if metric.grid() != r.grid() {
        return Err(Error::DimensionMismatch("curvature and metric on different grids".into()));
    }
    Ok(())
}

fn scalar(metric: &MetricField, r: &ChernCurvatureField, hat: bool) -> Result<ScalarField> {
    check_grids(metric, r)?;
    let n = metric.dim();
    let values = (0..metric.grid().len())
        .map(|x| {
            let g = metric.inverse_at(x);
            let mut s = ZERO;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let w = if hat { g[i * n + l] * g[k * n + j] } else { g[i * n + j] * g[k * n + l] };
                            s += w * r.component(i, j, k, l)[x];
                        }
                    }
                }
            }
            s
        })
        .collect();
    ScalarField::from_values(metric.grid(), values)?.into_real(crate::grid::REAL_TOL)
}

/// Chern scalar curvature `S = g^{i j̄} g^{k l̄} R_{i j̄ k l̄}`.
pub fn scalar_s(metric: &MetricField, r: &ChernCurvatureField) -> Result<ScalarField> {
    scalar(metric, r, false)
}

/// Second scalar curvature `Ŝ = g^{i l̄} g^{k j̄} R_{i j̄ k l̄}`.
pub fn scalar_s_hat(metric: &MetricField, r: &ChernCurvatureField) -> Result<ScalarField> {
    scalar(metric, r, true)
}

/// `log det g` as a real field.
pub fn log_det(metric: &MetricField) -> ScalarField {
    let values: Vec<f64> = metric.det().iter().map(|d| d.ln()).collect();
    ScalarField::from_real_values(metric.grid(), &values).expect("grid-sized buffer")
}

/// `Ric(ω) = -i ∂∂̄ log det g` as a real 2-form.
pub fn ricci_form(metric: &MetricField) -> FormField {
    let grid = metric.grid();
    let n = grid.dim();
    let spectral = Spectral::new(grid);
    let hat = spectral.forward(log_det(metric).values());
    let mut form = ComplexForm::zeros(grid, 2).expect("n >= 1");
    for i in 0..n {
        for j in 0..n {
            let pos = form.position(&[i, n + j]).expect("mixed basis element");
            let dd = spectral.derivative_from_hat(&hat, &[Deriv::Z(i), Deriv::ZBar(j)]);
            form.components_mut()[pos] = dd.into_iter().map(|v| Complex64::new(0.0, -1.0) * v).collect();
        }
    }
    form.to_real(true)
}

/// `tr_ω α` for a real 2-form: with `α^{1,1} = i a_{i j̄} dz^i ∧ dz̄^j`, returns `g^{i j̄} a_{i j̄}`.
pub fn trace_omega(form: &FormField, metric: &MetricField) -> Result<ScalarField> {
    if form.degree() != 2 {
        return Err(Error::Degree { degree: form.degree(), reason: "trace of a 2-form" });
    }
    let grid = metric.grid();
    let n = grid.dim();
    let cf = form.to_complex();
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let pos = cf.position(&[i, n + j]).expect("mixed basis element");
            a.push(cf.components()[pos].iter().map(|c| Complex64::new(0.0, -1.0) * c).collect::<Vec<_>>());
        }
    }
    ScalarField::from_values(grid, metric.trace(&a))?.into_real(crate::grid::REAL_TOL)
}

/// Max-norm of `S_{e^u ω} - e^{-u}(n Δ_c u + S_ω)`.
pub fn scalar_curvature_change_residual(metric: &MetricField, u: &ScalarField) -> Result<f64> {
    let n = metric.dim() as f64;
    let s = scalar_s(metric, &chern_curvature(metric))?;
    let tilde = metric.conformal(u)?;
    let s_tilde = scalar_s(&tilde, &chern_curvature(&tilde))?;
    let lap = crate::laplace::laplacian_c(metric, u)?;
    let mut worst = 0.0f64;
    for x in 0..u.len() {
        let rhs = (-u.re(x)).exp() * (n * lap.re(x) + s.re(x));
        worst = worst.max((s_tilde.re(x) - rhs).abs());
    }
    Ok(worst)
}
