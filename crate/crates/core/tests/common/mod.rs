//! Finite-difference curvature oracles evaluated directly on analytic specs.

#![allow(dead_code)]

use hermtorus::bundle::{BundleCurvatureField, BundleSpec};
use hermtorus::curvature::ChernCurvatureField;
use hermtorus::grid::TorusGrid;
use hermtorus::metric::MetricSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn central(f: &dyn Fn(&[f64]) -> Mat, x: &[f64], axis: usize, h: f64) -> Mat {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[axis] += h;
    m[axis] -= h;
    (f(&p) - f(&m)) / Complex64::new(2.0 * h, 0.0)
}

/// `∂/∂z^a = ½(∂_x - i ∂_y)` by central differences.
pub fn d_z(f: &dyn Fn(&[f64]) -> Mat, x: &[f64], a: usize, dim: usize, h: f64) -> Mat {
    (central(f, x, a, h) - central(f, x, dim + a, h) * I) * Complex64::new(0.5, 0.0)
}

/// `∂/∂z̄^a = ½(∂_x + i ∂_y)` by central differences.
pub fn d_zbar(f: &dyn Fn(&[f64]) -> Mat, x: &[f64], a: usize, dim: usize, h: f64) -> Mat {
    (central(f, x, a, h) + central(f, x, dim + a, h) * I) * Complex64::new(0.5, 0.0)
}

pub fn metric_matrix(spec: &MetricSpec) -> impl Fn(&[f64]) -> Mat + '_ {
    move |x| DMatrix::from_row_slice(spec.dim, spec.dim, &spec.matrix_at(x))
}

pub fn bundle_matrix(spec: &BundleSpec) -> impl Fn(&[f64]) -> Mat + '_ {
    move |x| DMatrix::from_row_slice(spec.rank, spec.rank, &spec.matrix_at(x))
}

/// `R_{i j̄}` as matrices in `(k, l)`: `-∂_i∂_j̄ G + (∂_i G) G^{-1} (∂_j̄ G)`.
pub fn chern_fd(spec: &MetricSpec, x: &[f64], h: f64) -> Vec<Mat> {
    let n = spec.dim;
    let g = metric_matrix(spec);
    let ginv = g(x).try_inverse().expect("metric invertible");
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dbar_j = |y: &[f64]| d_zbar(&g, y, j, n, h);
            let second = d_z(&dbar_j, x, i, n, h);
            let first = d_z(&g, x, i, n, h) * &ginv * d_zbar(&g, x, j, n, h);
            out.push(first - second);
        }
    }
    out
}

/// `R_{i j̄} = -∂_j̄((∂_i h) h^{-1}) + B_{i j̄}` by nested differences of the connection.
pub fn bundle_fd(spec: &BundleSpec, dim: usize, x: &[f64], h: f64) -> Vec<Mat> {
    let hm = bundle_matrix(spec);
    let r = spec.rank;
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let connection = |y: &[f64]| d_z(&hm, y, i, dim, h) * hm(y).try_inverse().expect("bundle metric invertible");
        for j in 0..dim {
            let b = spec.twist.as_ref().map_or(Complex64::new(0.0, 0.0), |t| Complex64::new(t[i][j][0], t[i][j][1]));
            out.push(Mat::identity(r, r) * b - d_zbar(&connection, x, j, dim, h));
        }
    }
    out
}

/// Seeded indices of points of the `coarse` grid, mapped onto `fine` (which refines it).
pub fn shared_points(coarse: TorusGrid, fine: TorusGrid, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let ratio = fine.samples() / coarse.samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c = rng.gen_range(0..coarse.len());
            let multi: Vec<usize> = coarse.multi_index(c)[..coarse.real_dim()].iter().map(|m| m * ratio).collect();
            (c, fine.flat_index(&multi))
        })
        .collect()
}

/// `(4 D(h/2) - D(h)) / 3`, which removes the `h^2` error term.
pub fn richardson(coarse: Vec<Mat>, fine: Vec<Mat>) -> Vec<Mat> {
    coarse.into_iter().zip(fine).map(|(c, f)| (f * Complex64::new(4.0, 0.0) - c) / Complex64::new(3.0, 0.0)).collect()
}

/// How the oracle at step `h` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    Plain,
    Richardson,
}

fn extrapolate(fd: impl Fn(f64) -> Vec<Mat>, h: f64, oracle: Oracle) -> Vec<Mat> {
    match oracle {
        Oracle::Plain => fd(h),
        Oracle::Richardson => richardson(fd(h), fd(0.5 * h)),
    }
}

/// Max over points and components of `|FD - spectral|`, relative to `max |R|`.
pub fn chern_fd_error(spec: &MetricSpec, r: &ChernCurvatureField, points: &[usize], h: f64, oracle: Oracle) -> f64 {
    let n = spec.dim;
    let grid = r.grid();
    let mut worst = 0.0f64;
    for &p in points {
        let x = grid.point(p);
        let fd = extrapolate(|s| chern_fd(spec, &x[..grid.real_dim()], s), h, oracle);
        let spectral = r.at(p);
        for (ij, m) in fd.iter().enumerate() {
            for k in 0..n {
                for l in 0..n {
                    worst = worst.max((m[(k, l)] - spectral[(ij * n + k) * n + l]).norm());
                }
            }
        }
    }
    worst / r.max_abs()
}

pub fn bundle_fd_error(spec: &BundleSpec, r: &BundleCurvatureField, dim: usize, points: &[usize], h: f64, oracle: Oracle) -> f64 {
    let grid = r.grid();
    let rank = r.rank();
    let mut worst = 0.0f64;
    for &p in points {
        let x = grid.point(p);
        let fd = extrapolate(|s| bundle_fd(spec, dim, &x[..grid.real_dim()], s), h, oracle);
        for i in 0..dim {
            for j in 0..dim {
                for a in 0..rank {
                    for b in 0..rank {
                        let d = fd[i * dim + j][(a, b)] - r.component(i, j, a, b)[p];
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
    }
    worst / r.max_abs()
}

/// Observed orders `log2(e_k / e_{k+1})` for errors at halving steps.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Rank-2 bundle with off-diagonal structure, a weight and a twist.
pub fn rank_two_bundle() -> BundleSpec {
    use hermtorus::metric::{EntryTerm, FourierTerm};
    BundleSpec {
        rank: 2,
        base: Some(vec![vec![[1.5, 0.0], [0.2, 0.1]], vec![[0.2, -0.1], [1.0, 0.0]]]),
        terms: vec![
            EntryTerm::new([1, 1], vec![1, 0, 0, 1], 0.1, 0.0),
            EntryTerm::new([1, 2], vec![0, 1, -1, 0], 0.08, 0.05),
            EntryTerm::new([2, 2], vec![0, 0, 1, 0], 0.1, -0.03),
        ],
        weight: vec![FourierTerm::new(vec![1, 0, 0, 0], 0.1, 0.0)],
        twist: Some(vec![vec![[-0.3, 0.0], [0.05, 0.02]], vec![[0.05, -0.02], [-0.2, 0.0]]]),
    }
}
