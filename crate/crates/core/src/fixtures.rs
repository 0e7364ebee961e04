//! The three reference metrics used by tests, examples and the default configs.
//!
//! * `flat`: `g = I`, Kähler.
//! * `f1`: `g = e^u I` with `u = cos(2π x^1) / 10`, conformally flat and not Gauduchon.
//! * `f2`: `g = I + ε (P + P†)` with `P_11 = e^{2πi x^1}`, `P_12 = e^{2πi y^2} / 2`,
//!   a generic non-Kähler perturbation (n = 2).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{ScalarField, Spectral, TorusGrid};
use crate::metric::{series_field, EntryTerm, FourierTerm, MetricSpec};

/// Amplitude of the `f2` perturbation used by default.
pub const F2_EPSILON: f64 = 0.05;

pub fn flat(n: usize) -> MetricSpec {
    MetricSpec::identity(n)
}

/// Conformal exponent of `f1`: `cos(2π x^1) / 10`.
pub fn f1_exponent(n: usize) -> Vec<FourierTerm> {
    let mut k = vec![0; 2 * n];
    k[0] = 1;
    vec![FourierTerm::new(k, 0.05, 0.0)]
}

pub fn f1(n: usize) -> MetricSpec {
    MetricSpec { conformal: f1_exponent(n), ..MetricSpec::identity(n) }
}

pub fn f2(epsilon: f64) -> MetricSpec {
    MetricSpec {
        terms: vec![
            EntryTerm::new([1, 1], vec![1, 0, 0, 0], epsilon, 0.0),
            EntryTerm::new([1, 2], vec![0, 0, 0, 1], 0.5 * epsilon, 0.0),
        ],
        ..MetricSpec::identity(2)
    }
}

/// `f2` rescaled by `e^{cos(2π y^1)/10}`; unlike `f2` it is not Gauduchon.
pub fn f2_conformal(epsilon: f64) -> MetricSpec {
    MetricSpec { conformal: vec![FourierTerm::new(vec![0, 0, 1, 0], 0.05, 0.0)], ..f2(epsilon) }
}

/// Seeded real trigonometric polynomial `Σ 2 Re(c_k e^{2πi k·x})` with
/// `|k_a| <= degree`, a handful of terms and coefficients up to `amplitude`.
pub fn random_trig_terms(dim: usize, seed: u64, degree: i64, amplitude: f64) -> Vec<FourierTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..6)
        .map(|_| {
            let k = (0..2 * dim).map(|_| rng.gen_range(-degree..=degree)).collect();
            let re = amplitude * rng.gen_range(-0.5..0.5);
            let im = amplitude * rng.gen_range(-0.5..0.5);
            FourierTerm::new(k, re, im)
        })
        .collect()
}

pub fn random_trig_field(grid: TorusGrid, seed: u64, degree: i64, amplitude: f64) -> ScalarField {
    series_field(grid, &random_trig_terms(grid.dim(), seed, degree, amplitude))
}

/// Seeded real field with every mode `0 < |k|_∞ <= degree` present, Gaussian
/// coefficients scaled by `decay^{|k|_1}`.
pub fn generic_field(grid: TorusGrid, seed: u64, degree: i64, decay: f64) -> ScalarField {
    let spectral = Spectral::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = vec![Complex64::new(0.0, 0.0); grid.len()];
    spectral.for_each_mode(|idx, k| {
        let norm1: f64 = k.iter().map(|v| v.abs()).sum();
        if norm1 > 0.0 && k.iter().all(|v| v.abs() <= degree as f64) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            hat[idx] = Complex64::new(re, im) * decay.powf(norm1);
        }
    });
    let values: Vec<f64> = spectral.inverse(hat).iter().map(|v| v.re).collect();
    ScalarField::from_real_values(grid, &values).expect("grid-sized values")
}

