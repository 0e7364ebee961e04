//! Differential forms with constant-length component storage.
//!
//! A degree-`d` form carries one sampled component per strictly increasing
//! multi-index, encoded as a bit mask over the `2n` basis 1-forms. Two bases
//! are used:
//!
//! * real: `(dx^1, ..., dx^n, dy^1, ..., dy^n)` -- [`FormField`];
//! * complex: `(dz^1, ..., dz^n, dzbar^1, ..., dzbar^n)` -- [`ComplexForm`].
//!
//! Masks are listed in lexicographic order of their index tuples. The two bases
//! are related by `dz = dx + i dy`, extended to higher degrees through minors.

use num_complex::Complex64;

use super::spectral::{Deriv, Spectral};
use super::{ScalarField, TorusGrid};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Increasing multi-indices of the given degree, as bit masks, lexicographic.
pub fn basis(real_dim: usize, degree: usize) -> Vec<u8> {
    fn rec(start: usize, real_dim: usize, left: usize, mask: u8, out: &mut Vec<u8>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for a in start..real_dim {
            rec(a + 1, real_dim, left - 1, mask | (1 << a), out);
        }
    }
    let mut out = Vec::new();
    if degree <= real_dim {
        rec(0, real_dim, degree, 0, &mut out);
    }
    out
}

/// Indices set in a mask, increasing.
pub fn mask_indices(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |a| mask & (1 << a) != 0)
}

/// Sign of `e^a ∧ e^I` relative to the sorted basis element `e^{I ∪ a}`.
fn insert_sign(a: usize, mask: u8) -> f64 {
    if (mask & ((1u8 << a) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `e^I ∧ e^J` relative to `e^{I ∪ J}` for disjoint masks.
pub fn wedge_sign(left: u8, right: u8) -> f64 {
    let swaps: u32 = mask_indices(right)
        .map(|j| (left >> (j + 1)).count_ones())
        .sum();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn position_table(basis: &[u8]) -> [usize; 64] {
    let mut table = [usize::MAX; 64];
    for (p, &m) in basis.iter().enumerate() {
        table[m as usize] = p;
    }
    table
}

fn small_det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let d = m.len();
    let mut det = ONE;
    for c in 0..d {
        let pivot = (c..d)
            .max_by(|&a, &b| m[a][c].norm().total_cmp(&m[b][c].norm()))
            .unwrap_or(c);
        if m[pivot][c].norm() == 0.0 {
            return ZERO;
        }
        if pivot != c {
            m.swap(pivot, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..d {
            let f = m[r][c] / m[c][c];
            for k in c..d {
                let v = m[c][k];
                m[r][k] -= f * v;
            }
        }
    }
    det
}

/// Sparse `(from, to, coefficient)` triples of the degree-`d` exterior power
/// of a change of basis `e_row = sum_col mat[row][col] f_col`.
fn exterior_power(mat: &[Vec<Complex64>], degree: usize) -> Vec<(usize, usize, Complex64)> {
    let b = basis(mat.len(), degree);
    let mut out = Vec::new();
    for (pi, &rows) in b.iter().enumerate() {
        for (pj, &cols) in b.iter().enumerate() {
            let sub: Vec<Vec<Complex64>> = mask_indices(rows)
                .map(|r| mask_indices(cols).map(|c| mat[r][c]).collect())
                .collect();
            let det = if degree == 0 { ONE } else { small_det(sub) };
            if det.norm() > 1e-15 {
                out.push((pi, pj, det));
            }
        }
    }
    out
}

/// Coefficients of `(dx^j, dy^j)` in terms of `(dz^j, dzbar^j)`.
fn real_to_complex_matrix(n: usize) -> Vec<Vec<Complex64>> {
    let mut a = vec![vec![ZERO; 2 * n]; 2 * n];
    for j in 0..n {
        a[j][j] = Complex64::new(0.5, 0.0);
        a[j][n + j] = Complex64::new(0.5, 0.0);
        a[n + j][j] = Complex64::new(0.0, -0.5);
        a[n + j][n + j] = Complex64::new(0.0, 0.5);
    }
    a
}

/// Coefficients of `(dz^j, dzbar^j)` in terms of `(dx^j, dy^j)`.
fn complex_to_real_matrix(n: usize) -> Vec<Vec<Complex64>> {
    let mut b = vec![vec![ZERO; 2 * n]; 2 * n];
    for j in 0..n {
        b[j][j] = ONE;
        b[j][n + j] = Complex64::new(0.0, 1.0);
        b[n + j][j] = ONE;
        b[n + j][n + j] = Complex64::new(0.0, -1.0);
    }
    b
}

fn change_basis(comps: &[Vec<Complex64>], table: &[(usize, usize, Complex64)]) -> Vec<Vec<Complex64>> {
    let len = comps.first().map_or(0, Vec::len);
    let mut out = vec![vec![ZERO; len]; comps.len()];
    for &(from, to, c) in table {
        let src = &comps[from];
        for (o, s) in out[to].iter_mut().zip(src) {
            *o += c * s;
        }
    }
    out
}

fn is_zero(comp: &[Complex64]) -> bool {
    comp.iter().all(|v| *v == ZERO)
}

/// Applies `sum_c D_c(.) e^c ∧` for the listed `(basis index c, D_c)` pairs.
fn first_order(
    spectral: &Spectral,
    degree: usize,
    comps: &[Vec<Complex64>],
    ops: &[(usize, Deriv)],
) -> Vec<Vec<Complex64>> {
    let grid = spectral.grid();
    let src_basis = basis(grid.real_dim(), degree);
    let dst_basis = basis(grid.real_dim(), degree + 1);
    let dst_pos = position_table(&dst_basis);
    let mut acc: Vec<Option<Vec<Complex64>>> = vec![None; dst_basis.len()];
    for (comp, &mask) in comps.iter().zip(&src_basis) {
        if is_zero(comp) {
            continue;
        }
        let hat = spectral.forward(comp);
        for &(c, d) in ops {
            if mask & (1 << c) != 0 {
                continue;
            }
            let target = dst_pos[(mask | (1 << c)) as usize];
            let buf = acc[target].get_or_insert_with(|| vec![ZERO; grid.len()]);
            spectral.accumulate(buf, &hat, Complex64::new(insert_sign(c, mask), 0.0), &[d]);
        }
    }
    acc.into_iter()
        .map(|a| a.map_or_else(|| vec![ZERO; grid.len()], |h| spectral.inverse(h)))
        .collect()
}

/// Applies `second ∘ first`, fused in Fourier space: one forward transform per
/// input component and one inverse transform per output component.
fn second_order(
    spectral: &Spectral,
    degree: usize,
    comps: &[Vec<Complex64>],
    first: &[(usize, Deriv)],
    second: &[(usize, Deriv)],
) -> Vec<Vec<Complex64>> {
    let grid = spectral.grid();
    let src_basis = basis(grid.real_dim(), degree);
    let dst_basis = basis(grid.real_dim(), degree + 2);
    let dst_pos = position_table(&dst_basis);
    let mut acc: Vec<Option<Vec<Complex64>>> = vec![None; dst_basis.len()];
    for (comp, &mask) in comps.iter().zip(&src_basis) {
        if is_zero(comp) {
            continue;
        }
        let hat = spectral.forward(comp);
        for &(c1, d1) in first {
            if mask & (1 << c1) != 0 {
                continue;
            }
            let s1 = insert_sign(c1, mask);
            let mid = mask | (1 << c1);
            for &(c2, d2) in second {
                if mid & (1 << c2) != 0 {
                    continue;
                }
                let sign = s1 * insert_sign(c2, mid);
                let target = dst_pos[(mid | (1 << c2)) as usize];
                let buf = acc[target].get_or_insert_with(|| vec![ZERO; grid.len()]);
                spectral.accumulate(buf, &hat, Complex64::new(sign, 0.0), &[d1, d2]);
            }
        }
    }
    acc.into_iter()
        .map(|a| a.map_or_else(|| vec![ZERO; grid.len()], |h| spectral.inverse(h)))
        .collect()
}

fn check_components(grid: TorusGrid, degree: usize, comps: &[Vec<Complex64>]) -> Result<()> {
    if degree > grid.real_dim() {
        return Err(Error::Degree { degree, reason: "exceeds the real dimension" });
    }
    let expected = basis(grid.real_dim(), degree).len();
    if comps.len() != expected || comps.iter().any(|c| c.len() != grid.len()) {
        return Err(Error::DimensionMismatch(format!(
            "degree-{degree} form needs {expected} components of {} samples",
            grid.len()
        )));
    }
    Ok(())
}

/// A form in the real coordinate basis.
#[derive(Debug, Clone)]
pub struct FormField {
    grid: TorusGrid,
    degree: usize,
    comps: Vec<Vec<Complex64>>,
    real: bool,
}

impl FormField {
    pub fn zeros(grid: TorusGrid, degree: usize) -> Result<Self> {
        if degree > grid.real_dim() {
            return Err(Error::Degree { degree, reason: "exceeds the real dimension" });
        }
        let count = basis(grid.real_dim(), degree).len();
        Ok(Self { grid, degree, comps: vec![vec![ZERO; grid.len()]; count], real: true })
    }

    pub fn from_components(grid: TorusGrid, degree: usize, comps: Vec<Vec<Complex64>>, real: bool) -> Result<Self> {
        check_components(grid, degree, &comps)?;
        let mut form = Self { grid, degree, comps, real };
        form.clean();
        Ok(form)
    }

    /// The 0-form carried by a scalar field.
    pub fn from_scalar(f: &ScalarField) -> Self {
        let mut form = Self {
            grid: f.grid(),
            degree: 0,
            comps: vec![f.values().to_vec()],
            real: f.is_real(),
        };
        form.clean();
        form
    }

    /// A real 1-form from its components along `(dx^1.., dy^1..)`.
    pub fn one_form(grid: TorusGrid, comps: Vec<Vec<f64>>) -> Result<Self> {
        let comps = comps
            .into_iter()
            .map(|c| c.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            .collect();
        Self::from_components(grid, 1, comps, true)
    }

    fn clean(&mut self) {
        if self.real {
            for c in &mut self.comps {
                c.iter_mut().for_each(|v| v.im = 0.0);
            }
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn basis(&self) -> Vec<u8> {
        basis(self.grid.real_dim(), self.degree)
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    /// Component along the basis element with the given sorted real indices.
    pub fn component(&self, indices: &[usize]) -> Option<&[Complex64]> {
        let mask = indices.iter().fold(0u8, |m, &a| m | (1 << a));
        if indices.len() != self.degree || mask.count_ones() as usize != self.degree {
            return None;
        }
        let pos = position_table(&self.basis())[mask as usize];
        self.comps.get(pos).map(Vec::as_slice)
    }

    /// Coefficient of `dx^1 ∧ .. ∧ dx^n ∧ dy^1 ∧ .. ∧ dy^n` of a top-degree form.
    pub fn top(&self) -> Result<&[Complex64]> {
        if self.degree != self.grid.real_dim() {
            return Err(Error::Degree { degree: self.degree, reason: "top coefficient needs degree 2n" });
        }
        Ok(&self.comps[0])
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// Pointwise product with a scalar field.
    pub fn scale_by(&self, f: &ScalarField) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().zip(f.values()).map(|(a, b)| a * b).collect())
            .collect();
        let mut out = Self { grid: self.grid, degree: self.degree, comps, real: self.real && f.is_real() };
        out.clean();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Self { grid: self.grid, degree: self.degree, comps, real: self.real && other.real }
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch("forms on different grids".into()));
        }
        let degree = self.degree + other.degree;
        if degree > self.grid.real_dim() {
            return Err(Error::Degree { degree, reason: "wedge exceeds the real dimension" });
        }
        let d = self.grid.real_dim();
        let dst = basis(d, degree);
        let pos = position_table(&dst);
        let mut comps = vec![vec![ZERO; self.grid.len()]; dst.len()];
        for (a, &ma) in self.comps.iter().zip(&self.basis()) {
            for (b, &mb) in other.comps.iter().zip(&other.basis()) {
                if ma & mb != 0 {
                    continue;
                }
                let sign = wedge_sign(ma, mb);
                let out = &mut comps[pos[(ma | mb) as usize]];
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o += sign * x * y;
                }
            }
        }
        let mut out = Self { grid: self.grid, degree, comps, real: self.real && other.real };
        out.clean();
        Ok(out)
    }

    /// Exterior derivative, spectrally. Rejects top-degree input.
    pub fn exterior_d(&self) -> Result<Self> {
        self.exterior_d_with(&Spectral::new(self.grid))
    }

    pub fn exterior_d_with(&self, spectral: &Spectral) -> Result<Self> {
        if self.degree >= self.grid.real_dim() {
            return Err(Error::Degree { degree: self.degree, reason: "d of a top-degree form" });
        }
        let ops: Vec<(usize, Deriv)> = (0..self.grid.real_dim()).map(|a| (a, Deriv::Real(a))).collect();
        let comps = first_order(spectral, self.degree, &self.comps, &ops);
        let mut out = Self { grid: self.grid, degree: self.degree + 1, comps, real: self.real };
        out.clean();
        Ok(out)
    }

    /// Components in the complex basis `(dz, dzbar)`.
    pub fn to_complex(&self) -> ComplexForm {
        let table = exterior_power(&real_to_complex_matrix(self.grid.dim()), self.degree);
        ComplexForm { grid: self.grid, degree: self.degree, comps: change_basis(&self.comps, &table) }
    }

    /// Pointwise component vector at a sample.
    pub fn at(&self, idx: usize) -> Vec<Complex64> {
        self.comps.iter().map(|c| c[idx]).collect()
    }
}

/// A form in the complex basis `(dz^1.., dzbar^1..)`; index `c < n` is `dz^c`,
/// index `n + j` is `dzbar^j`.
#[derive(Debug, Clone)]
pub struct ComplexForm {
    grid: TorusGrid,
    degree: usize,
    comps: Vec<Vec<Complex64>>,
}

impl ComplexForm {
    pub fn zeros(grid: TorusGrid, degree: usize) -> Result<Self> {
        if degree > grid.real_dim() {
            return Err(Error::Degree { degree, reason: "exceeds the real dimension" });
        }
        let count = basis(grid.real_dim(), degree).len();
        Ok(Self { grid, degree, comps: vec![vec![ZERO; grid.len()]; count] })
    }

    pub fn from_components(grid: TorusGrid, degree: usize, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        check_components(grid, degree, &comps)?;
        Ok(Self { grid, degree, comps })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> Vec<u8> {
        basis(self.grid.real_dim(), self.degree)
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    /// Position of the basis element with the given sorted complex indices.
    pub fn position(&self, indices: &[usize]) -> Option<usize> {
        let mask = indices.iter().fold(0u8, |m, &a| m | (1 << a));
        let pos = position_table(&self.basis())[mask as usize];
        (pos != usize::MAX && indices.len() == self.degree).then_some(pos)
    }

    /// `(p, q)` type of a basis mask.
    pub fn bidegree(&self, mask: u8) -> (usize, usize) {
        let n = self.grid.dim();
        let low = (1u8 << n) - 1;
        ((mask & low).count_ones() as usize, (mask & !low).count_ones() as usize)
    }

    /// Keeps only the `(p, q)` part.
    pub fn project(&self, p: usize, q: usize) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(self.basis())
            .map(|(c, m)| if self.bidegree(m) == (p, q) { c.clone() } else { vec![ZERO; c.len()] })
            .collect();
        Self { grid: self.grid, degree: self.degree, comps }
    }

    fn holomorphic_ops(&self) -> Vec<(usize, Deriv)> {
        (0..self.grid.dim()).map(|i| (i, Deriv::Z(i))).collect()
    }

    fn antiholomorphic_ops(&self) -> Vec<(usize, Deriv)> {
        let n = self.grid.dim();
        (0..n).map(|j| (n + j, Deriv::ZBar(j))).collect()
    }

    fn check_room(&self, extra: usize) -> Result<()> {
        if self.degree + extra > self.grid.real_dim() {
            Err(Error::Degree { degree: self.degree, reason: "derivative exceeds the top degree" })
        } else {
            Ok(())
        }
    }

    /// The `∂` operator.
    pub fn partial(&self, spectral: &Spectral) -> Result<Self> {
        self.check_room(1)?;
        let comps = first_order(spectral, self.degree, &self.comps, &self.holomorphic_ops());
        Ok(Self { grid: self.grid, degree: self.degree + 1, comps })
    }

    /// The `∂̄` operator.
    pub fn partial_bar(&self, spectral: &Spectral) -> Result<Self> {
        self.check_room(1)?;
        let comps = first_order(spectral, self.degree, &self.comps, &self.antiholomorphic_ops());
        Ok(Self { grid: self.grid, degree: self.degree + 1, comps })
    }

    /// `∂∂̄`, fused in Fourier space.
    pub fn ddbar(&self, spectral: &Spectral) -> Result<Self> {
        self.check_room(2)?;
        let comps = second_order(
            spectral,
            self.degree,
            &self.comps,
            &self.antiholomorphic_ops(),
            &self.holomorphic_ops(),
        );
        Ok(Self { grid: self.grid, degree: self.degree + 2, comps })
    }

    /// Back to the real basis; `real` tags (and projects) the result as real.
    pub fn to_real(&self, real: bool) -> FormField {
        let table = exterior_power(&complex_to_real_matrix(self.grid.dim()), self.degree);
        let mut out = FormField {
            grid: self.grid,
            degree: self.degree,
            comps: change_basis(&self.comps, &table),
            real,
        };
        out.clean();
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 8).unwrap()
    }

    fn smooth(g: TorusGrid, seed: f64) -> ScalarField {
        ScalarField::from_real_fn(g, |x| {
            (2.0 * PI * (x[0] + seed * x[3])).sin() + 0.3 * (2.0 * PI * (x[1] - x[2])).cos() + seed
        })
    }

    #[test]
    fn basis_sizes_are_binomial() {
        let sizes: Vec<usize> = (0..=4).map(|d| basis(4, d).len()).collect();
        assert_eq!(sizes, vec![1, 4, 6, 4, 1]);
        assert_eq!(basis(6, 3).len(), 20);
        assert_eq!(basis(4, 2)[0], 0b0011);
        assert_eq!(basis(4, 2)[5], 0b1100);
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(0b01, 0b10), 1.0);
        assert_eq!(wedge_sign(0b10, 0b01), -1.0);
        // dx1 dy1 dx2 dy2 = - dx1 dx2 dy1 dy2 in (x1, x2, y1, y2) ordering
        assert_eq!(wedge_sign(0b0101, 0b1010), -1.0);
    }

    #[test]
    fn d_of_constants_vanishes() {
        let g = grid();
        let zero = FormField::from_scalar(&ScalarField::constant(g, 2.0)).exterior_d().unwrap();
        assert!(zero.max_abs() < 1e-14);
        let mut comps = vec![vec![ZERO; g.len()]; 4];
        comps[0] = vec![ONE; g.len()];
        let dx1 = FormField::from_components(g, 1, comps, true).unwrap();
        assert!(dx1.exterior_d().unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn d_squared_vanishes() {
        let g = grid();
        let f = FormField::from_scalar(&smooth(g, 0.4));
        let df = f.exterior_d().unwrap();
        let ddf = df.exterior_d().unwrap();
        assert!(df.max_abs() > 1.0);
        assert!(ddf.max_abs() < 1e-10 * df.max_abs());
        let alpha = df.scale_by(&smooth(g, 0.7));
        let da = alpha.exterior_d().unwrap();
        assert!(da.exterior_d().unwrap().max_abs() < 1e-10 * da.max_abs());
        assert!(FormField::zeros(g, 4).unwrap().exterior_d().is_err());
    }

    #[test]
    fn complex_basis_roundtrip_and_types() {
        let g = grid();
        let a = FormField::from_scalar(&smooth(g, 0.1)).exterior_d().unwrap();
        let b = FormField::from_scalar(&smooth(g, 0.9)).exterior_d().unwrap();
        let w = a.wedge(&b).unwrap();
        let back = w.to_complex().to_real(true);
        assert!(back.max_diff(&w) < 1e-12);
        // a real 1-form: dz-part and dzbar-part are conjugate
        let c = a.to_complex();
        for j in 0..2 {
            for (p, q) in c.components()[j].iter().zip(&c.components()[2 + j]) {
                assert!((p - q.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn ddbar_matches_composition() {
        let g = grid();
        let s = Spectral::new(g);
        let f = smooth(g, 0.3);
        let a = FormField::from_scalar(&f).exterior_d().unwrap().scale_by(&smooth(g, 0.5));
        let c = a.to_complex();
        let fused = c.ddbar(&s).unwrap();
        let composed = c.partial_bar(&s).unwrap().partial(&s).unwrap();
        assert!(fused.to_real(false).max_diff(&composed.to_real(false)) < 1e-10);
        // d = ∂ + ∂̄ on the complex side
        let d = a.exterior_d().unwrap();
        let sum = c.partial(&s).unwrap().to_real(false);
        let sum2 = c.partial_bar(&s).unwrap().to_real(false);
        let mut total = sum.clone();
        for (t, x) in total.comps.iter_mut().zip(&sum2.comps) {
            for (u, v) in t.iter_mut().zip(x) {
                *u += v;
            }
        }
        assert!(total.max_diff(&d) < 1e-10);
    }
}
