//! Hermitian metrics `ω = i g_{i j̄} dz^i ∧ dz̄^j` sampled on the torus.
//!
//! Conventions used throughout the crate:
//!
//! * `g^{i j̄}` is the tensor inverse, `g^{i j̄} g_{k j̄} = δ^i_k`; as a matrix it
//!   is the transpose of `(g_{i j̄})^{-1}`.
//! * Integrals `∫ f ω^n` are taken literally against `ω^n = 2^n n! det(g) dV`,
//!   where `dV` is Lebesgue measure on `[0,1)^{2n}`.
//! * The compatible Riemannian metric is `G(X, Y) = 2 Re g_{i j̄} X^i conj(Y^j)`
//!   with `X^i = dz^i(X)`; its volume form is `ω^n / n!`. The pointwise inner
//!   product of real 1-forms is `G^{ab} α_a β_b`, which equals
//!   `2 Re g^{i j̄} α_i conj(β_j)` on `(1,0)` components.

mod hodge;
mod torsion;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexForm, FormField, ScalarField, Spectral, TorusGrid};

pub use hodge::{ddbar_scalar, hodge_star, DdbarOperator};
pub use torsion::{coclosed_residual, codifferential, torsion, TorsionOneForm};

/// Default floor for the smallest pointwise eigenvalue.
pub const POSITIVITY_FLOOR: f64 = 1e-6;
/// Relative tolerance of the pointwise Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn default_scale() -> f64 {
    1.0
}

/// One Fourier mode `c e^{2πi k·x}`; `k` runs over `(x^1.., y^1..)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl FourierTerm {
    pub fn new(k: Vec<i64>, re: f64, im: f64) -> Self {
        Self { k, re, im }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `c e^{2πi k·x}`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let phase: f64 = self.k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum();
        self.coefficient() * Complex64::from_polar(1.0, 2.0 * PI * phase)
    }
}

/// Real series `Σ (c e^{2πi k·x} + conj)`.
pub fn real_series(terms: &[FourierTerm], x: &[f64]) -> f64 {
    terms.iter().map(|t| 2.0 * t.eval(x).re).sum()
}

/// Samples a real Fourier series on the grid.
pub fn series_field(grid: TorusGrid, terms: &[FourierTerm]) -> ScalarField {
    ScalarField::from_real_fn(grid, |x| real_series(terms, x))
}

/// A Fourier mode added to matrix entry `(i, j)` (1-based) together with its
/// conjugate-transpose partner at `(j, i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryTerm {
    pub entry: [usize; 2],
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl EntryTerm {
    pub fn new(entry: [usize; 2], k: Vec<i64>, re: f64, im: f64) -> Self {
        Self { entry, k, re, im }
    }

    fn mode(&self) -> FourierTerm {
        FourierTerm::new(self.k.clone(), self.re, self.im)
    }
}

/// Input description of a metric: `g = scale · e^u · (base + Σ terms)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub dim: usize,
    /// Row-major `[re, im]` entries; identity when absent.
    #[serde(default)]
    pub base: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub terms: Vec<EntryTerm>,
    /// Real series for the conformal exponent `u`.
    #[serde(default)]
    pub conformal: Vec<FourierTerm>,
}

impl MetricSpec {
    pub fn identity(dim: usize) -> Self {
        Self { dim, base: None, scale: 1.0, terms: Vec::new(), conformal: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("metric dimension {n} outside 1..=3")));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("metric scale must be positive, got {}", self.scale)));
        }
        if let Some(base) = &self.base {
            if base.len() != n || base.iter().any(|r| r.len() != n) {
                return Err(Error::Config(format!("metric base must be {n}x{n}")));
            }
            for i in 0..n {
                for j in 0..n {
                    let a = base[i][j];
                    let b = base[j][i];
                    if (a[0] - b[0]).abs() > 1e-14 || (a[1] + b[1]).abs() > 1e-14 {
                        return Err(Error::Config("metric base is not Hermitian".into()));
                    }
                }
            }
        }
        for t in &self.terms {
            if t.entry.iter().any(|&e| e == 0 || e > n) {
                return Err(Error::Config(format!("metric term entry {:?} outside 1..={n}", t.entry)));
            }
            if t.k.len() != 2 * n {
                return Err(Error::Config(format!("wave vector {:?} must have {} components", t.k, 2 * n)));
            }
        }
        for t in &self.conformal {
            if t.k.len() != 2 * n {
                return Err(Error::Config(format!("wave vector {:?} must have {} components", t.k, 2 * n)));
            }
        }
        Ok(())
    }

    /// Row-major `g_{i j̄}` at an arbitrary point.
    pub fn matrix_at(&self, x: &[f64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut m = vec![ZERO; n * n];
        match &self.base {
            Some(base) => {
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = Complex64::new(base[i][j][0], base[i][j][1]);
                    }
                }
            }
            None => (0..n).for_each(|i| m[i * n + i] = Complex64::new(1.0, 0.0)),
        }
        for t in &self.terms {
            let (i, j) = (t.entry[0] - 1, t.entry[1] - 1);
            let v = t.mode().eval(x);
            m[i * n + j] += v;
            m[j * n + i] += v.conj();
        }
        let factor = self.scale * real_series(&self.conformal, x).exp();
        m.iter_mut().for_each(|v| *v *= factor);
        m
    }
}

/// Closed-form Hermitian analysis of a small matrix: `(det, min eigenvalue, inverse)`.
/// The inverse is returned in tensor layout, `out[i*n+j] = g^{i j̄}`.
pub(crate) fn analyze(m: &[Complex64], n: usize) -> (f64, f64, Vec<Complex64>) {
    match n {
        1 => {
            let a = m[0].re;
            (a, a, vec![Complex64::new(1.0 / a, 0.0)])
        }
        2 => {
            let (a, b, d) = (m[0].re, m[1], m[3].re);
            let det = a * d - b.norm_sqr();
            let half = 0.5 * (a - d);
            let min = 0.5 * (a + d) - (half * half + b.norm_sqr()).sqrt();
            // (g^{-1}) = [[d, -b], [-conj b, a]] / det, transposed for tensor layout
            let inv = vec![
                Complex64::new(d / det, 0.0),
                -b.conj() / det,
                -b / det,
                Complex64::new(a / det, 0.0),
            ];
            (det, min, inv)
        }
        _ => {
            let mat = DMatrix::from_row_slice(n, n, m);
            let det = mat.determinant().re;
            let min = nalgebra::SymmetricEigen::new(mat.clone())
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let inv = mat.try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n));
            let mut out = vec![ZERO; n * n];
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = inv[(j, i)];
                }
            }
            (det, min, out)
        }
    }
}

/// Pointwise Hermitian positive-definite `g_{i j̄}` with cached inverse and determinant.
#[derive(Debug, Clone)]
pub struct MetricField {
    grid: TorusGrid,
    entries: Vec<Vec<Complex64>>,
    inverse: Vec<Vec<Complex64>>,
    det: Vec<f64>,
}

impl MetricField {
    /// Validates Hermitian symmetry and positivity of sampled entries
    /// (`entries[i*n+j]` holds `g_{i j̄}`).
    pub fn from_entries(grid: TorusGrid, entries: Vec<Vec<Complex64>>, floor: f64) -> Result<Self> {
        let n = grid.dim();
        if entries.len() != n * n || entries.iter().any(|e| e.len() != grid.len()) {
            return Err(Error::DimensionMismatch(format!("metric needs {} entries of {} samples", n * n, grid.len())));
        }
        let mut entries = entries;
        let scale = entries.iter().flat_map(|e| e.iter().map(|v| v.norm())).fold(0.0, f64::max).max(1e-300);
        for i in 0..n {
            for j in i..n {
                for p in 0..grid.len() {
                    let a = entries[i * n + j][p];
                    let b = entries[j * n + i][p];
                    let defect = (a - b.conj()).norm();
                    if defect > HERMITIAN_TOL * scale {
                        return Err(Error::NotHermitian { point: p, defect });
                    }
                    let sym = 0.5 * (a + b.conj());
                    entries[i * n + j][p] = sym;
                    entries[j * n + i][p] = sym.conj();
                }
            }
        }
        let mut inverse = vec![vec![ZERO; grid.len()]; n * n];
        let mut det = vec![0.0; grid.len()];
        let mut worst = (0usize, f64::INFINITY);
        let mut m = vec![ZERO; n * n];
        for p in 0..grid.len() {
            for (c, e) in entries.iter().enumerate() {
                m[c] = e[p];
            }
            let (d, min, inv) = analyze(&m, n);
            if min < worst.1 {
                worst = (p, min);
            }
            det[p] = d;
            for (c, v) in inv.into_iter().enumerate() {
                inverse[c][p] = v;
            }
        }
        if !(worst.1 > floor) {
            let coords = grid.point(worst.0)[..grid.real_dim()].to_vec();
            return Err(Error::PositivityViolation { point: worst.0, coords, eigenvalue: worst.1 });
        }
        Ok(Self { grid, entries, inverse, det })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Sampled `g_{i j̄}` (0-based).
    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        &self.entries[i * self.dim() + j]
    }

    /// Sampled `g^{i j̄}` (0-based).
    pub fn inverse_entry(&self, i: usize, j: usize) -> &[Complex64] {
        &self.inverse[i * self.dim() + j]
    }

    pub fn det(&self) -> &[f64] {
        &self.det
    }

    /// Row-major `g_{i j̄}` at a sample.
    pub fn matrix_at(&self, p: usize) -> Vec<Complex64> {
        self.entries.iter().map(|e| e[p]).collect()
    }

    /// Row-major `g^{i j̄}` at a sample.
    pub fn inverse_at(&self, p: usize) -> Vec<Complex64> {
        self.inverse.iter().map(|e| e[p]).collect()
    }

    /// Density of `ω^n` against Lebesgue measure: `2^n n! det g`.
    pub fn volume_density(&self) -> Vec<f64> {
        let c = volume_constant(self.dim());
        self.det.iter().map(|d| c * d).collect()
    }

    /// `∫ ω^n`.
    pub fn total_volume(&self) -> f64 {
        volume_constant(self.dim()) * self.det.iter().sum::<f64>() / self.det.len() as f64
    }

    /// `λ · g` for a positive constant.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        self.conformal(&ScalarField::constant(self.grid, lambda.ln()))
    }

    /// `conformal`: `e^u g`, re-checked for positivity.
    pub fn conformal(&self, u: &ScalarField) -> Result<Self> {
        u.require_real()?;
        if u.grid() != self.grid {
            return Err(Error::DimensionMismatch("conformal factor on another grid".into()));
        }
        let factor: Vec<f64> = u.values().iter().map(|v| v.re.exp()).collect();
        let entries = self
            .entries
            .iter()
            .map(|e| e.iter().zip(&factor).map(|(g, f)| g * f).collect())
            .collect();
        Self::from_entries(self.grid, entries, 0.0)
    }

    /// Pointwise real Riemannian inverse metric `G^{ab}` (row-major `2n x 2n`).
    pub fn real_inverse_at(&self, p: usize) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let v = self.inverse[i * n + j][p];
                out[i * m + j] = 0.5 * v.re;
                out[i * m + n + j] = -0.5 * v.im;
                out[(n + i) * m + j] = 0.5 * v.im;
                out[(n + i) * m + n + j] = 0.5 * v.re;
            }
        }
        out
    }

    /// Pointwise real Riemannian metric `G_{ab}` (row-major `2n x 2n`).
    pub fn real_metric_at(&self, p: usize) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let v = self.entries[i * n + j][p];
                out[i * m + j] = 2.0 * v.re;
                out[i * m + n + j] = 2.0 * v.im;
                out[(n + i) * m + j] = -2.0 * v.im;
                out[(n + i) * m + n + j] = 2.0 * v.re;
            }
        }
        out
    }

    /// Pointwise inner product `G^{ab} α_a β_b` of real 1-forms.
    pub fn inner_one_forms(&self, alpha: &FormField, beta: &FormField) -> Result<ScalarField> {
        if alpha.degree() != 1 || beta.degree() != 1 {
            return Err(Error::Degree { degree: alpha.degree().max(beta.degree()), reason: "inner product of 1-forms" });
        }
        let m = self.grid.real_dim();
        let (a, b) = (alpha.components(), beta.components());
        let values: Vec<f64> = (0..self.grid.len())
            .map(|p| {
                let ginv = self.real_inverse_at(p);
                let mut s = 0.0;
                for r in 0..m {
                    for c in 0..m {
                        s += ginv[r * m + c] * a[r][p].re * b[c][p].re;
                    }
                }
                s
            })
            .collect();
        ScalarField::from_real_values(self.grid, &values)
    }

    /// Contraction `g^{i j̄} a_{i j̄}` of sampled coefficients `a[i*n+j]`.
    pub fn trace(&self, a: &[Vec<Complex64>]) -> Vec<Complex64> {
        let n = self.dim();
        (0..self.grid.len())
            .map(|p| {
                let mut s = ZERO;
                for c in 0..n * n {
                    s += self.inverse[c][p] * a[c][p];
                }
                s
            })
            .collect()
    }
}

/// `2^n n!`.
pub fn volume_constant(n: usize) -> f64 {
    (1..=n).map(|k| 2.0 * k as f64).product()
}

/// `build_metric`: samples a spec on a grid and validates it.
pub fn build_metric(spec: &MetricSpec, grid: TorusGrid) -> Result<MetricField> {
    spec.validate()?;
    if spec.dim != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "metric spec has dimension {}, grid has {}",
            spec.dim,
            grid.dim()
        )));
    }
    let n = spec.dim;
    let mut entries = vec![Vec::with_capacity(grid.len()); n * n];
    grid.for_each_point(|_, x| {
        for (c, v) in spec.matrix_at(x).into_iter().enumerate() {
            entries[c].push(v);
        }
    });
    MetricField::from_entries(grid, entries, POSITIVITY_FLOOR)
}

/// `ω` in the complex basis: coefficient `i g_{i j̄}` on `dz^i ∧ dz̄^j`.
pub fn omega_complex(metric: &MetricField) -> ComplexForm {
    let grid = metric.grid();
    let n = grid.dim();
    let mut form = ComplexForm::zeros(grid, 2).expect("n >= 1");
    for i in 0..n {
        for j in 0..n {
            let pos = form.position(&[i, n + j]).expect("mixed basis element");
            form.components_mut()[pos] = metric.entry(i, j).iter().map(|g| Complex64::new(0.0, 1.0) * g).collect();
        }
    }
    form
}

/// `omega_form`: `ω` as a real 2-form.
pub fn omega_form(metric: &MetricField) -> FormField {
    omega_complex(metric).to_real(true)
}

/// `omega_power`: `ω^k` for `0 <= k <= n` (`ω^0` is the constant 0-form 1).
pub fn omega_power(metric: &MetricField, k: usize) -> Result<FormField> {
    let grid = metric.grid();
    if k > grid.dim() {
        return Err(Error::Degree { degree: 2 * k, reason: "omega power above n" });
    }
    let omega = omega_form(metric);
    let mut out = FormField::from_scalar(&ScalarField::constant(grid, 1.0));
    for _ in 0..k {
        out = out.wedge(&omega)?;
    }
    Ok(out)
}

/// `volume_integral`: `∫ f ω^n = 2^n n! ∫ f det g`.
pub fn volume_integral(f: &ScalarField, metric: &MetricField) -> Result<f64> {
    f.require_real()?;
    if f.grid() != metric.grid() {
        return Err(Error::DimensionMismatch("field and metric on different grids".into()));
    }
    let sum: f64 = f.values().iter().zip(metric.det()).map(|(v, d)| v.re * d).sum();
    Ok(volume_constant(metric.dim()) * sum / f.len() as f64)
}

/// Max-norm residuals of `dω = 0`, `dω^{n-1} = 0` and `∂∂̄ω^{n-1} = 0`, each
/// divided by the max-norm of the form being differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureResiduals {
    pub kahler: f64,
    pub balanced: f64,
    pub gauduchon: f64,
}

pub fn structure_residuals(metric: &MetricField) -> Result<StructureResiduals> {
    let spectral = Spectral::new(metric.grid());
    let n = metric.dim();
    let omega = omega_form(metric);
    let kahler = omega.exterior_d_with(&spectral)?.max_abs() / omega.max_abs();
    if n == 1 {
        return Ok(StructureResiduals { kahler, balanced: 0.0, gauduchon: 0.0 });
    }
    let pow = omega_power(metric, n - 1)?;
    let balanced = pow.exterior_d_with(&spectral)?.max_abs() / pow.max_abs();
    let gauduchon = pow.to_complex().ddbar(&spectral)?.max_abs() / pow.max_abs();
    Ok(StructureResiduals { kahler, balanced, gauduchon })
}
