//! Hermitian metrics on the trivial rank-`r` bundle over the torus: Chern
//! curvature, mean curvature `K`, its greatest eigenvalue `γ`, the conformal
//! vanishing certificate and the canonical-bundle specialization.
//!
//! A bundle metric may carry a constant background curvature `B_{i j̄}`. It
//! stands for a weight `e^{-φ_B}` with `∂_i ∂_j̄ φ_B = B_{i j̄}` that is not
//! periodic (a line-bundle twist of nonzero degree). All sampled matrices are
//! stored in the periodic gauge with that weight divided out; `B` only enters
//! the curvature, as `B_{i j̄} δ^β_α`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Deriv, ScalarField, Spectral, TorusGrid};
use crate::metric::{analyze, real_series, EntryTerm, FourierTerm, MetricField, HERMITIAN_TOL, POSITIVITY_FLOOR};

mod canonical;
mod certificate;

pub use canonical::{canonical_bundle, weitzenbock_residual, CanonicalSection, WeitzenbockTerms};
pub use certificate::{conformal_bundle_check, vanishing_certificate, CertificateStatus, VanishingCertificate};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn parse_matrix(m: &[Vec<[f64; 2]>]) -> Vec<Complex64> {
    m.iter().flat_map(|row| row.iter().map(|v| Complex64::new(v[0], v[1]))).collect()
}

fn check_hermitian_input(m: &[Vec<[f64; 2]>], size: usize, what: &str) -> Result<()> {
    if m.len() != size || m.iter().any(|r| r.len() != size) {
        return Err(Error::Config(format!("{what} must be {size}x{size}")));
    }
    for i in 0..size {
        for j in 0..size {
            let (a, b) = (m[i][j], m[j][i]);
            if (a[0] - b[0]).abs() > 1e-14 || (a[1] + b[1]).abs() > 1e-14 {
                return Err(Error::Config(format!("{what} is not Hermitian")));
            }
        }
    }
    Ok(())
}

/// `h = e^{-ψ} (base + Σ terms)` with an optional background curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
    /// Row-major `[re, im]` entries; identity when absent.
    #[serde(default)]
    pub base: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub terms: Vec<EntryTerm>,
    /// Real series for `ψ`.
    #[serde(default)]
    pub weight: Vec<FourierTerm>,
    /// Constant `B_{i j̄}`, row-major `[re, im]`, `n x n`.
    #[serde(default)]
    pub twist: Option<Vec<Vec<[f64; 2]>>>,
}

impl BundleSpec {
    pub fn trivial(rank: usize) -> Self {
        Self { rank, base: None, terms: Vec::new(), weight: Vec::new(), twist: None }
    }

    /// Line bundle `h = e^{-ψ}` with background curvature `B = b I`.
    pub fn line(weight: Vec<FourierTerm>, b: f64, dim: usize) -> Self {
        let twist = (b != 0.0).then(|| {
            (0..dim).map(|i| (0..dim).map(|j| if i == j { [b, 0.0] } else { [0.0, 0.0] }).collect()).collect()
        });
        Self { rank: 1, base: None, terms: Vec::new(), weight, twist }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let r = self.rank;
        if !(1..=4).contains(&r) {
            return Err(Error::Config(format!("bundle rank {r} outside 1..=4")));
        }
        if let Some(base) = &self.base {
            check_hermitian_input(base, r, "bundle base")?;
        }
        if let Some(twist) = &self.twist {
            check_hermitian_input(twist, dim, "bundle twist")?;
        }
        for t in &self.terms {
            if t.entry.iter().any(|&e| e == 0 || e > r) {
                return Err(Error::Config(format!("bundle term entry {:?} outside 1..={r}", t.entry)));
            }
            if t.k.len() != 2 * dim {
                return Err(Error::Config(format!("wave vector {:?} must have {} components", t.k, 2 * dim)));
            }
        }
        for t in &self.weight {
            if t.k.len() != 2 * dim {
                return Err(Error::Config(format!("wave vector {:?} must have {} components", t.k, 2 * dim)));
            }
        }
        Ok(())
    }

    /// Row-major `h_{α β̄}` at a point.
    pub fn matrix_at(&self, x: &[f64]) -> Vec<Complex64> {
        let r = self.rank;
        let mut m = match &self.base {
            Some(base) => parse_matrix(base),
            None => (0..r * r).map(|c| if c / r == c % r { Complex64::new(1.0, 0.0) } else { ZERO }).collect(),
        };
        for t in &self.terms {
            let (i, j) = (t.entry[0] - 1, t.entry[1] - 1);
            let v = FourierTerm::new(t.k.clone(), t.re, t.im).eval(x);
            m[i * r + j] += v;
            m[j * r + i] += v.conj();
        }
        let factor = (-real_series(&self.weight, x)).exp();
        m.iter_mut().for_each(|v| *v *= factor);
        m
    }
}

/// Pointwise `h_{α β̄}` plus the background curvature.
#[derive(Debug, Clone)]
pub struct BundleMetricField {
    grid: TorusGrid,
    rank: usize,
    entries: Vec<Vec<Complex64>>,
    twist: Vec<Complex64>,
}

impl BundleMetricField {
    /// `entries[a*r+b]` holds `h_{a b̄}`; `twist` is row-major `B_{i j̄}` (empty for none).
    pub fn from_entries(grid: TorusGrid, rank: usize, entries: Vec<Vec<Complex64>>, twist: Vec<Complex64>) -> Result<Self> {
        let n = grid.dim();
        if entries.len() != rank * rank || entries.iter().any(|e| e.len() != grid.len()) {
            return Err(Error::DimensionMismatch(format!("bundle metric needs {} entries", rank * rank)));
        }
        let twist = if twist.is_empty() { vec![ZERO; n * n] } else { twist };
        if twist.len() != n * n {
            return Err(Error::DimensionMismatch(format!("twist needs {} entries", n * n)));
        }
        let mut entries = entries;
        let scale = entries.iter().flat_map(|e| e.iter().map(|v| v.norm())).fold(0.0, f64::max).max(1e-300);
        for a in 0..rank {
            for b in a..rank {
                for p in 0..grid.len() {
                    let (x, y) = (entries[a * rank + b][p], entries[b * rank + a][p]);
                    let defect = (x - y.conj()).norm();
                    if defect > HERMITIAN_TOL * scale {
                        return Err(Error::NotHermitian { point: p, defect });
                    }
                    let sym = 0.5 * (x + y.conj());
                    entries[a * rank + b][p] = sym;
                    entries[b * rank + a][p] = sym.conj();
                }
            }
        }
        let field = Self { grid, rank, entries, twist };
        let mut worst = (0usize, f64::INFINITY);
        for p in 0..grid.len() {
            let (_, min, _) = analyze(&field.matrix_at(p), rank);
            if min < worst.1 {
                worst = (p, min);
            }
        }
        if !(worst.1 > POSITIVITY_FLOOR) {
            let coords = grid.point(worst.0)[..grid.real_dim()].to_vec();
            return Err(Error::PositivityViolation { point: worst.0, coords, eigenvalue: worst.1 });
        }
        Ok(field)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, a: usize, b: usize) -> &[Complex64] {
        &self.entries[a * self.rank + b]
    }

    pub fn matrix_at(&self, p: usize) -> Vec<Complex64> {
        self.entries.iter().map(|e| e[p]).collect()
    }

    /// Row-major `B_{i j̄}`.
    pub fn twist(&self) -> &[Complex64] {
        &self.twist
    }

    /// `e^u h`.
    pub fn conformal(&self, u: &ScalarField) -> Result<Self> {
        u.require_real()?;
        if u.grid() != self.grid {
            return Err(Error::DimensionMismatch("conformal factor on another grid".into()));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| e.iter().zip(u.values()).map(|(h, v)| h * v.re.exp()).collect())
            .collect();
        Self::from_entries(self.grid, self.rank, entries, self.twist.clone())
    }

    /// `A h A^†` for a constant invertible `A` (row-major), a change of frame.
    pub fn change_frame(&self, a: &[Complex64]) -> Result<Self> {
        let r = self.rank;
        if a.len() != r * r {
            return Err(Error::DimensionMismatch(format!("frame change needs {} entries", r * r)));
        }
        let mut entries = vec![vec![ZERO; self.grid.len()]; r * r];
        for p in 0..self.grid.len() {
            let h = self.matrix_at(p);
            for i in 0..r {
                for j in 0..r {
                    let mut s = ZERO;
                    for k in 0..r {
                        for l in 0..r {
                            s += a[i * r + k] * h[k * r + l] * a[j * r + l].conj();
                        }
                    }
                    entries[i * r + j][p] = s;
                }
            }
        }
        Self::from_entries(self.grid, r, entries, self.twist.clone())
    }
}

/// Samples a bundle spec.
pub fn build_bundle(spec: &BundleSpec, grid: TorusGrid) -> Result<BundleMetricField> {
    spec.validate(grid.dim())?;
    let r = spec.rank;
    let mut entries = vec![Vec::with_capacity(grid.len()); r * r];
    grid.for_each_point(|_, x| {
        for (c, v) in spec.matrix_at(x).into_iter().enumerate() {
            entries[c].push(v);
        }
    });
    let twist = spec.twist.as_deref().map(parse_matrix).unwrap_or_default();
    BundleMetricField::from_entries(grid, r, entries, twist)
}

/// Pointwise `R^β_{i j̄ α}`, component `((i*n + j)*r + α)*r + β`.
#[derive(Debug, Clone)]
pub struct BundleCurvatureField {
    grid: TorusGrid,
    rank: usize,
    comps: Vec<Vec<Complex64>>,
}

impl BundleCurvatureField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Sampled `R^β_{i j̄ α}` (0-based).
    pub fn component(&self, i: usize, j: usize, alpha: usize, beta: usize) -> &[Complex64] {
        let (n, r) = (self.grid.dim(), self.rank);
        &self.comps[((i * n + j) * r + alpha) * r + beta]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter().map(|v| v.norm())).fold(0.0, f64::max)
    }

    /// Lowered `R_{i j̄ α μ̄} = h_{β μ̄} R^β_{i j̄ α}` at one sample, same layout.
    pub fn lowered_at(&self, h: &BundleMetricField, p: usize) -> Vec<Complex64> {
        let (n, r) = (self.grid.dim(), self.rank);
        let hm = h.matrix_at(p);
        let mut out = vec![ZERO; n * n * r * r];
        for ij in 0..n * n {
            for a in 0..r {
                for mu in 0..r {
                    out[(ij * r + a) * r + mu] = (0..r).map(|b| hm[b * r + mu] * self.comps[(ij * r + a) * r + b][p]).sum();
                }
            }
        }
        out
    }

    /// `max |conj(R_{i j̄ α μ̄}) - R_{j ī μ ᾱ}|` relative to the lowered scale.
    pub fn hermitian_defect(&self, h: &BundleMetricField) -> f64 {
        let (n, r) = (self.grid.dim(), self.rank);
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for p in 0..self.grid.len() {
            let low = self.lowered_at(h, p);
            for i in 0..n {
                for j in 0..n {
                    for a in 0..r {
                        for mu in 0..r {
                            let x = low[((i * n + j) * r + a) * r + mu];
                            let y = low[((j * n + i) * r + mu) * r + a];
                            worst = worst.max((x.conj() - y).norm());
                            scale = scale.max(x.norm());
                        }
                    }
                }
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

/// Pointwise `h^{-1}` as a row-major matrix inverse.
fn inverse_at(h: &BundleMetricField, p: usize) -> Vec<Complex64> {
    let r = h.rank();
    let (_, _, tensor) = analyze(&h.matrix_at(p), r);
    let mut out = vec![ZERO; r * r];
    for a in 0..r {
        for b in 0..r {
            out[a * r + b] = tensor[b * r + a];
        }
    }
    out
}

fn mat_mul(a: &[Complex64], b: &[Complex64], r: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = (0..r).map(|k| a[i * r + k] * b[k * r + j]).sum();
        }
    }
    out
}

/// `R^β_{i j̄ α} = -∂_j̄ [(∂_i h) h^{-1}]_α^β + B_{i j̄} δ_α^β`, expanded as
/// `-(∂_i ∂_j̄ h) h^{-1} + (∂_i h) h^{-1} (∂_j̄ h) h^{-1}` so only `h` is differentiated.
pub fn bundle_curvature(h: &BundleMetricField) -> BundleCurvatureField {
    let grid = h.grid();
    let (n, r) = (grid.dim(), h.rank());
    let spectral = Spectral::new(grid);
    let hats: Vec<Vec<Complex64>> = (0..r * r).map(|c| spectral.forward(h.entry(c / r, c % r))).collect();
    let derive = |d: &[Deriv]| -> Vec<Vec<Complex64>> { hats.iter().map(|hat| spectral.derivative_from_hat(hat, d)).collect() };
    let dz: Vec<_> = (0..n).map(|i| derive(&[Deriv::Z(i)])).collect();
    let dzbar: Vec<_> = (0..n).map(|j| derive(&[Deriv::ZBar(j)])).collect();
    let inverses: Vec<Vec<Complex64>> = (0..grid.len()).map(|p| inverse_at(h, p)).collect();
    let at = |f: &[Vec<Complex64>], p: usize| -> Vec<Complex64> { f.iter().map(|e| e[p]).collect() };
    let mut comps = vec![vec![ZERO; grid.len()]; n * n * r * r];
    for i in 0..n {
        for j in 0..n {
            let ddbar = derive(&[Deriv::Z(i), Deriv::ZBar(j)]);
            let b = h.twist()[i * n + j];
            for (p, inv) in inverses.iter().enumerate() {
                let first = mat_mul(&at(&ddbar, p), inv, r);
                let theta = mat_mul(&at(&dz[i], p), inv, r);
                let phi = mat_mul(&at(&dzbar[j], p), inv, r);
                let second = mat_mul(&theta, &phi, r);
                for ab in 0..r * r {
                    let mut v = second[ab] - first[ab];
                    if ab / r == ab % r {
                        v += b;
                    }
                    comps[(i * n + j) * r * r + ab][p] = v;
                }
            }
        }
    }
    BundleCurvatureField { grid, rank: r, comps }
}

/// Pointwise `K_{α β̄}`.
#[derive(Debug, Clone)]
pub struct MeanCurvatureField {
    grid: TorusGrid,
    rank: usize,
    entries: Vec<Vec<Complex64>>,
}

impl MeanCurvatureField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, a: usize, b: usize) -> &[Complex64] {
        &self.entries[a * self.rank + b]
    }

    pub fn matrix_at(&self, p: usize) -> Vec<Complex64> {
        self.entries.iter().map(|e| e[p]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flat_map(|c| c.iter().map(|v| v.norm())).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                for (x, y) in self.entry(a, b).iter().zip(self.entry(b, a)) {
                    worst = worst.max((x - y.conj()).norm());
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

    /// `max |K - other|` over entries and samples.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// `K_{α β̄} = h_{γ β̄} g^{i j̄} R^γ_{i j̄ α}`.
pub fn mean_curvature(metric: &MetricField, h: &BundleMetricField, curvature: &BundleCurvatureField) -> Result<MeanCurvatureField> {
    let grid = metric.grid();
    if h.grid() != grid || curvature.grid() != grid || curvature.rank() != h.rank() {
        return Err(Error::DimensionMismatch("metric, bundle metric and curvature disagree".into()));
    }
    let (n, r) = (grid.dim(), h.rank());
    let mut entries = vec![vec![ZERO; grid.len()]; r * r];
    for p in 0..grid.len() {
        let ginv = metric.inverse_at(p);
        let low = curvature.lowered_at(h, p);
        for ab in 0..r * r {
            entries[ab][p] = (0..n * n).map(|ij| ginv[ij] * low[ij * r * r + ab]).sum();
        }
    }
    Ok(MeanCurvatureField { grid, rank: r, entries })
}

/// All eigenvalues of `K ξ = λ h ξ` at a sample, ascending.
pub fn generalized_eigenvalues(k: &MeanCurvatureField, h: &BundleMetricField, p: usize) -> Result<Vec<f64>> {
    let r = h.rank();
    if r == 1 {
        return Ok(vec![k.entries[0][p].re / h.entries[0][p].re]);
    }
    let hm = DMatrix::from_row_slice(r, r, &h.matrix_at(p));
    let km = DMatrix::from_row_slice(r, r, &k.matrix_at(p));
    let chol = hm.cholesky().ok_or(Error::EigenFailure { point: p, reason: "bundle metric not positive".into() })?;
    let linv = chol.l().try_inverse().ok_or(Error::EigenFailure { point: p, reason: "singular factor".into() })?;
    let c = &linv * km * linv.adjoint();
    let c = (&c + c.adjoint()).scale(0.5);
    let mut values: Vec<f64> = SymmetricEigen::try_new(c, f64::EPSILON, 0)
        .ok_or(Error::EigenFailure { point: p, reason: "eigen solver did not converge".into() })?
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { point: p, reason: "non-finite eigenvalue".into() });
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `γ`: greatest eigenvalue of `K` with respect to `h`.
pub fn gamma_field(k: &MeanCurvatureField, h: &BundleMetricField) -> Result<ScalarField> {
    if k.grid() != h.grid() || k.rank() != h.rank() {
        return Err(Error::DimensionMismatch("mean curvature and bundle metric disagree".into()));
    }
    let values = (0..h.grid().len())
        .map(|p| generalized_eigenvalues(k, h, p).map(|v| *v.last().expect("rank >= 1")))
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::from_real_values(h.grid(), &values)
}

/// Fourier-tail test for smoothness of `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessDiagnostic {
    /// Largest coefficient with `max_a |k_a| > 3N/8` over the largest nonconstant coefficient.
    pub tail_ratio: f64,
    /// The same tail over the largest coefficient with `N/8 < max_a |k_a| <= N/4`.
    pub decay_ratio: f64,
    /// Tail above roundoff and not decaying from the middle band.
    pub stalled: bool,
}

const TAIL_FLOOR: f64 = 1e-10;
const DECAY_STALL: f64 = 0.05;

pub fn smoothness_diagnostic(field: &ScalarField) -> SmoothnessDiagnostic {
    let grid = field.grid();
    let spectral = Spectral::new(grid);
    let hat = spectral.forward(field.values());
    let n = grid.samples();
    let (mut tail, mut mid, mut top) = (0.0f64, 0.0f64, 0.0f64);
    for (idx, c) in hat.iter().enumerate().skip(1) {
        let multi = grid.multi_index(idx);
        let kmax = multi[..grid.real_dim()].iter().map(|&m| grid.wavenumber(m).unsigned_abs() as usize).max().unwrap_or(0);
        top = top.max(c.norm());
        if 8 * kmax > 3 * n {
            tail = tail.max(c.norm());
        } else if 8 * kmax > n && 4 * kmax <= n {
            mid = mid.max(c.norm());
        }
    }
    let tail_ratio = if top > 0.0 { tail / top } else { 0.0 };
    let decay_ratio = if mid > 0.0 { tail / mid } else { 0.0 };
    SmoothnessDiagnostic { tail_ratio, decay_ratio, stalled: tail_ratio > TAIL_FLOOR && decay_ratio > DECAY_STALL }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::metric::build_metric;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 16).unwrap()
    }

    #[test]
    fn constant_metric_is_flat() {
        let g = grid();
        let h = build_bundle(&BundleSpec::trivial(2), g).unwrap();
        let r = bundle_curvature(&h);
        assert!(r.max_abs() < 1e-14);
        let m = build_metric(&fixtures::flat(2), g).unwrap();
        let k = mean_curvature(&m, &h, &r).unwrap();
        assert!(gamma_field(&k, &h).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn line_bundle_curvature_is_ddbar_weight() {
        let g = grid();
        let psi = vec![FourierTerm::new(vec![1, 0, 0, 1], 0.1, 0.05)];
        let h = build_bundle(&BundleSpec::line(psi.clone(), 0.0, 2), g).unwrap();
        let r = bundle_curvature(&h);
        let phi = crate::metric::series_field(g, &psi);
        let s = Spectral::new(g);
        for i in 0..2 {
            for j in 0..2 {
                let expected = s.derive(&phi, &[Deriv::Z(i), Deriv::ZBar(j)]);
                let got = ScalarField::from_values(g, r.component(i, j, 0, 0).to_vec()).unwrap();
                assert!(got.max_diff(&expected) < 1e-9);
            }
        }
    }

    #[test]
    fn rank_two_invariants() {
        let g = grid();
        let spec = BundleSpec {
            rank: 2,
            base: Some(vec![vec![[2.0, 0.0], [0.3, 0.1]], vec![[0.3, -0.1], [1.5, 0.0]]]),
            terms: vec![
                EntryTerm::new([1, 2], vec![0, 1, 1, 0], 0.1, 0.05),
                EntryTerm::new([2, 2], vec![1, 0, 0, 0], 0.2, 0.0),
            ],
            weight: vec![FourierTerm::new(vec![0, 0, 1, 0], 0.1, 0.0)],
            twist: None,
        };
        let h = build_bundle(&spec, g).unwrap();
        let m = build_metric(&fixtures::f2(fixtures::F2_EPSILON), g).unwrap();
        let r = bundle_curvature(&h);
        assert!(r.hermitian_defect(&h) < 1e-9);
        let k = mean_curvature(&m, &h, &r).unwrap();
        assert!(k.hermitian_defect() < 1e-9);
        let gamma = gamma_field(&k, &h).unwrap();
        // frame invariance and scaling
        let a = vec![Complex64::new(1.0, 0.5), Complex64::new(0.2, 0.0), Complex64::new(-0.3, 0.1), Complex64::new(0.8, 0.0)];
        let h2 = h.change_frame(&a).unwrap();
        let k2 = mean_curvature(&m, &h2, &bundle_curvature(&h2)).unwrap();
        assert!(gamma_field(&k2, &h2).unwrap().max_diff(&gamma) < 1e-9);
        let h3 = h.conformal(&ScalarField::constant(g, 0.7)).unwrap();
        let k3 = mean_curvature(&m, &h3, &bundle_curvature(&h3)).unwrap();
        assert!(gamma_field(&k3, &h3).unwrap().max_diff(&gamma) < 1e-12);
        assert!(!smoothness_diagnostic(&gamma).stalled);
    }

    #[test]
    fn diagonal_gamma_is_max() {
        let g = grid();
        let k = MeanCurvatureField {
            grid: g,
            rank: 2,
            entries: vec![
                ScalarField::from_real_fn(g, |x| (2.0 * PI * x[0]).cos()).into_values(),
                vec![ZERO; g.len()],
                vec![ZERO; g.len()],
                ScalarField::from_real_fn(g, |x| (2.0 * PI * x[1]).sin()).into_values(),
            ],
        };
        let h = build_bundle(&BundleSpec::trivial(2), g).unwrap();
        let gamma = gamma_field(&k, &h).unwrap();
        let expected = ScalarField::from_real_fn(g, |x| (2.0 * PI * x[0]).cos().max((2.0 * PI * x[1]).sin()));
        assert!(gamma.max_diff(&expected) < 1e-14);
        // the kink at the crossing shows up in the spectral tail
        assert!(smoothness_diagnostic(&gamma).stalled);
    }
}
