//! Restarted, right-preconditioned GMRES for real non-symmetric operators.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Target for `‖b - A x‖₂ / ‖b‖₂`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 25, max_iter: 600 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the returned iterate, recomputed explicitly.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
}

/// Solves `A x = b` with `x = M y`; `M` approximates `A^{-1}`.
pub fn gmres(
    a: impl Fn(&[f64]) -> Vec<f64>,
    m: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: &GmresOptions,
) -> Result<GmresOutcome> {
    let len = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; len];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x, iterations: 0, residual: 0.0 });
    }
    let restart = opts.restart.max(1);
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut rel = 1.0;
    while iterations < opts.max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|t| t / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        while k < restart && iterations < opts.max_iter {
            let mut w = a(&m(&v[k]));
            for (j, vj) in v.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                axpy(&mut w, -h[j][k], vj);
            }
            h[k + 1][k] = norm(&w);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = if d == 0.0 { 1.0 } else { h[k][k] / d };
            sn[k] = if d == 0.0 { 0.0 } else { h[k + 1][k] / d };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k += 1;
            let est = g[k].abs() / bnorm;
            let hk = norm(&w);
            if est <= opts.tol || hk == 0.0 {
                break;
            }
            v.push(w.iter().map(|t| t / hk).collect());
        }
        // back substitution for y, then x += M (V y)
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
        }
        let mut comb = vec![0.0; len];
        for (yi, vi) in y.iter().zip(&v) {
            axpy(&mut comb, *yi, vi);
        }
        axpy(&mut x, 1.0, &m(&comb));
        let ax = a(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = norm(&r) / bnorm;
        if rel <= opts.tol {
            break;
        }
    }
    if rel > opts.tol {
        return Err(Error::NonConvergence { solver: "gmres", iterations, residual: rel, target: opts.tol });
    }
    Ok(GmresOutcome { x, iterations, residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonsymmetric_tridiagonal() {
        let n = 60;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = 4.0 * x[i];
                    if i > 0 {
                        s -= 1.5 * x[i - 1];
                    }
                    if i + 1 < n {
                        s -= 0.5 * x[i + 1];
                    }
                    s
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let out = gmres(apply, |x| x.to_vec(), &b, &GmresOptions { tol: 1e-12, restart: 8, max_iter: 500 }).unwrap();
        let r: Vec<f64> = apply(&out.x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm(&r) / norm(&b) <= 1e-12);
        let jacobi = gmres(apply, |x| x.iter().map(|v| v / 4.0).collect(), &b, &GmresOptions::default()).unwrap();
        assert!(jacobi.residual <= 1e-10);
    }

    #[test]
    fn reports_nonconvergence() {
        let b = vec![1.0; 10];
        let err = gmres(|x| x.to_vec(), |x| x.to_vec(), &b, &GmresOptions { tol: 1e-12, restart: 2, max_iter: 0 });
        assert!(matches!(err, Err(Error::NonConvergence { .. })));
    }
}
