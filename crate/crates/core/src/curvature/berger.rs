//! Sphere averages of holomorphic sectional curvature and sampled HSC ranges.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{contract_hsc, ChernCurvatureField, Direction};
use crate::error::{Error, Result};
use crate::metric::MetricField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Vol(S^{2n-1}) = 2π^n / (n-1)!`.
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powi(n as i32) / (1..n).product::<usize>() as f64
}

/// `(S + Ŝ) / (n(n+1)) · Vol(S^{2n-1})` at one sample.
pub fn berger_rhs(s: f64, s_hat: f64, n: usize) -> f64 {
    (s + s_hat) / (n * (n + 1)) as f64 * sphere_volume(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BergerMode {
    /// Exact fourth-moment contraction.
    Quadrature,
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergerEstimate {
    pub value: f64,
    /// Zero for the quadrature path.
    pub standard_error: f64,
}

/// Columns `e_a` with `g(e_a, e_b) = δ_{ab}`, from `g = L L^†`; entry `[i*n + a]` is `e_a^i`.
pub fn unitary_frame(metric: &MetricField, point: usize) -> Result<Vec<Complex64>> {
    let n = metric.dim();
    let g = DMatrix::from_row_slice(n, n, &metric.matrix_at(point));
    let chol = g.cholesky().ok_or(Error::EigenFailure { point, reason: "Cholesky factorization failed".into() })?;
    let linv = chol.l().try_inverse().ok_or(Error::EigenFailure { point, reason: "singular Cholesky factor".into() })?;
    let mut e = vec![ZERO; n * n];
    for i in 0..n {
        for a in 0..n {
            e[i * n + a] = linv[(a, i)];
        }
    }
    Ok(e)
}

/// The tensor at a sample expressed in a unitary frame.
fn frame_tensor(r: &ChernCurvatureField, metric: &MetricField, point: usize) -> Result<Vec<Complex64>> {
    let n = r.dim();
    let e = unitary_frame(metric, point)?;
    let mut cur = r.at(point);
    // transform one slot at a time; slots 1 and 3 take conjugated frames
    for slot in 0..4 {
        let stride = n.pow(3 - slot as u32);
        let mut next = vec![ZERO; cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let a = (idx / stride) % n;
            let base = idx - a * stride;
            let mut s = ZERO;
            for i in 0..n {
                let f = if slot % 2 == 0 { e[i * n + a] } else { e[i * n + a].conj() };
                s += cur[base + i * stride] * f;
            }
            *out = s;
        }
        cur = next;
    }
    Ok(cur)
}

/// Uniform point on the unit sphere of `C^n`.
pub fn sample_unit_sphere<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let w: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return w.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn point_rng(seed: u64, point: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point as u64);
    rng
}

/// `∫_{|v|=1} H_p(v) dθ(v)` over the `g`-unit sphere at `point`.
pub fn berger_average(r: &ChernCurvatureField, metric: &MetricField, point: usize, mode: BergerMode) -> Result<BergerEstimate> {
    if metric.grid() != r.grid() || point >= r.grid().len() {
        return Err(Error::DimensionMismatch("curvature, metric and sample disagree".into()));
    }
    let n = r.dim();
    let rf = frame_tensor(r, metric, point)?;
    let vol = sphere_volume(n);
    match mode {
        BergerMode::Quadrature => {
            let mut s = ZERO;
            for a in 0..n {
                for b in 0..n {
                    s += rf[((a * n + a) * n + b) * n + b] + rf[((a * n + b) * n + b) * n + a];
                }
            }
            Ok(BergerEstimate { value: s.re / (n * (n + 1)) as f64 * vol, standard_error: 0.0 })
        }
        BergerMode::MonteCarlo { seed, samples } => {
            let mut rng = point_rng(seed, point);
            let (mut mean, mut m2) = (0.0, 0.0);
            for t in 0..samples {
                let w = sample_unit_sphere(&mut rng, n);
                let h = contract_hsc(&rf, &w).re;
                let delta = h - mean;
                mean += delta / (t + 1) as f64;
                m2 += delta * (h - mean);
            }
            let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
            Ok(BergerEstimate { value: vol * mean, standard_error: vol * (var / samples as f64).sqrt() })
        }
    }
}

/// Sampling budget for [`hsc_range_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HscSampler {
    pub seed: u64,
    pub points: usize,
    pub directions: usize,
    pub refine_steps: usize,
}

impl Default for HscSampler {
    fn default() -> Self {
        Self { seed: 0, points: 64, directions: 64, refine_steps: 40 }
    }
}

/// Sampled extrema of `H` over unit directions; a heuristic, never a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HscRange {
    pub min: f64,
    pub max: f64,
    pub argmin: Direction,
    pub argmax: Direction,
    pub heuristic: bool,
}

fn refine<R: Rng>(rf: &[Complex64], w: &mut Vec<Complex64>, h: &mut f64, sign: f64, steps: usize, rng: &mut R) {
    let n = w.len();
    let mut step = 0.3;
    for _ in 0..steps {
        let trial = sample_unit_sphere(rng, n);
        let cand: Vec<Complex64> = w.iter().zip(&trial).map(|(a, b)| a + step * b).collect();
        let norm = cand.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let cand: Vec<Complex64> = cand.into_iter().map(|c| c / norm).collect();
        let hc = contract_hsc(rf, &cand).re;
        if sign * hc < sign * *h {
            *w = cand;
            *h = hc;
        } else {
            step *= 0.8;
        }
    }
}

/// Random grid samples and unit directions with hill-climbing refinement.
pub fn hsc_range_estimate(r: &ChernCurvatureField, metric: &MetricField, sampler: &HscSampler) -> Result<HscRange> {
    if metric.grid() != r.grid() {
        return Err(Error::DimensionMismatch("curvature and metric on different grids".into()));
    }
    let n = r.dim();
    let len = r.grid().len();
    let mut rng = point_rng(sampler.seed, usize::MAX);
    let points: Vec<usize> = (0..sampler.points.max(1)).map(|_| rng.gen_range(0..len)).collect();
    let mut best_min = (f64::INFINITY, 0usize, vec![ZERO; n]);
    let mut best_max = (f64::NEG_INFINITY, 0usize, vec![ZERO; n]);
    for &p in &points {
        let rf = frame_tensor(r, metric, p)?;
        let mut local = point_rng(sampler.seed, p);
        let mut lo = (f64::INFINITY, vec![ZERO; n]);
        let mut hi = (f64::NEG_INFINITY, vec![ZERO; n]);
        for _ in 0..sampler.directions.max(1) {
            let w = sample_unit_sphere(&mut local, n);
            let h = contract_hsc(&rf, &w).re;
            if h < lo.0 {
                lo = (h, w.clone());
            }
            if h > hi.0 {
                hi = (h, w);
            }
        }
        refine(&rf, &mut lo.1, &mut lo.0, 1.0, sampler.refine_steps, &mut local);
        refine(&rf, &mut hi.1, &mut hi.0, -1.0, sampler.refine_steps, &mut local);
        if lo.0 < best_min.0 {
            best_min = (lo.0, p, lo.1);
        }
        if hi.0 > best_max.0 {
            best_max = (hi.0, p, hi.1);
        }
    }
    let to_direction = |p: usize, w: &[Complex64]| -> Result<Direction> {
        let e = unitary_frame(metric, p)?;
        let v = (0..n).map(|i| (0..n).map(|a| e[i * n + a] * w[a]).sum()).collect();
        Ok(Direction::new(p, v))
    };
    Ok(HscRange {
        min: best_min.0,
        max: best_max.0,
        argmin: to_direction(best_min.1, &best_min.2)?,
        argmax: to_direction(best_max.1, &best_max.2)?,
        heuristic: true,
    })
}
