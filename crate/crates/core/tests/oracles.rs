//! Spectral curvature and torsion against finite-difference and closed-form oracles.

mod common;

use std::f64::consts::PI;

use common::{bundle_fd_error, chern_fd_error, orders, rank_two_bundle, shared_points, Oracle};
use hermtorus::bundle::{build_bundle, bundle_curvature};
use hermtorus::curvature::chern_curvature;
use hermtorus::fixtures::{self, F2_EPSILON};
use hermtorus::grid::TorusGrid;
use hermtorus::metric::{build_metric, torsion};
use num_complex::Complex64;

const STEPS: [usize; 3] = [16, 32, 64];

#[test]
fn chern_curvature_matches_finite_differences() {
    let coarse = TorusGrid::new(2, 16).unwrap();
    let fine = TorusGrid::new(2, 32).unwrap();
    let pairs = shared_points(coarse, fine, 48, 5);
    let (on_coarse, on_fine): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
    for spec in [fixtures::f2(F2_EPSILON), fixtures::f2_conformal(F2_EPSILON)] {
        let r16 = chern_curvature(&build_metric(&spec, coarse).unwrap());
        let r32 = chern_curvature(&build_metric(&spec, fine).unwrap());
        let resolved = on_coarse
            .iter()
            .zip(&on_fine)
            .flat_map(|(&a, &b)| r16.at(a).into_iter().zip(r32.at(b)).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        assert!(resolved < 1e-9, "spectral reference not resolved: {resolved:e}");

        let errors: Vec<f64> =
            STEPS.iter().map(|&n| chern_fd_error(&spec, &r32, &on_fine, 1.0 / n as f64, Oracle::Plain)).collect();
        let p = orders(&errors);
        assert!(p.iter().all(|&o| o >= 1.8), "errors {errors:?} orders {p:?}");
        let extrapolated: Vec<f64> =
            [16.0, 32.0, 64.0].iter().map(|n| chern_fd_error(&spec, &r32, &on_fine, 1.0 / n, Oracle::Richardson)).collect();
        let q = orders(&extrapolated);
        assert!(q.iter().all(|&o| o >= 3.5), "extrapolated {extrapolated:?} orders {q:?}");
    }
}

#[test]
fn bundle_curvature_matches_finite_differences() {
    let fine = TorusGrid::new(2, 32).unwrap();
    let points: Vec<usize> = shared_points(TorusGrid::new(2, 16).unwrap(), fine, 48, 9).into_iter().map(|p| p.1).collect();
    let spec = rank_two_bundle();
    let r = bundle_curvature(&build_bundle(&spec, fine).unwrap());
    let errors: Vec<f64> =
        STEPS.iter().map(|&n| bundle_fd_error(&spec, &r, 2, &points, 1.0 / n as f64, Oracle::Plain)).collect();
    let p = orders(&errors);
    assert!(p.iter().all(|&o| o >= 1.8), "errors {errors:?} orders {p:?}");
    let extrapolated: Vec<f64> =
        [16.0, 32.0, 64.0].iter().map(|n| bundle_fd_error(&spec, &r, 2, &points, 1.0 / n, Oracle::Richardson)).collect();
    let q = orders(&extrapolated);
    assert!(q.iter().all(|&o| o >= 3.5), "extrapolated {extrapolated:?} orders {q:?}");
}

/// `θ^{1,0}` solves `t_1 g_{2k̄} - t_2 g_{1k̄} = ∂_1 g_{2k̄} - ∂_2 g_{1k̄}` for `k = 1, 2`.
fn lee_form_n2(g: [[Complex64; 2]; 2], dg: [[[Complex64; 2]; 2]; 2]) -> [Complex64; 2] {
    let t = [dg[0][1][0] - dg[1][0][0], dg[0][1][1] - dg[1][0][1]];
    // [[g21, -g11], [g22, -g12]] (t1, t2) = t
    let (a, b, c, d) = (g[1][0], -g[0][0], g[1][1], -g[0][1]);
    let det = a * d - b * c;
    [(d * t[0] - b * t[1]) / det, (a * t[1] - c * t[0]) / det]
}

fn compare_torsion(grid: TorusGrid, spec: &hermtorus::metric::MetricSpec, closed: impl Fn(&[f64]) -> [Complex64; 2]) -> f64 {
    let theta = torsion(&build_metric(spec, grid).unwrap()).unwrap();
    let form = theta.real_form();
    let mut worst = 0.0f64;
    for p in 0..grid.len() {
        let x = grid.point(p);
        let t = closed(&x[..4]);
        // θ = Σ t_l dz^l + conj = 2 Re t_l dx^l - 2 Im t_l dy^l
        let expected = [2.0 * t[0].re, 2.0 * t[1].re, -2.0 * t[0].im, -2.0 * t[1].im];
        for (a, e) in expected.iter().enumerate() {
            worst = worst.max((form.component(&[a]).unwrap()[p].re - e).abs());
        }
    }
    worst
}

#[test]
fn torsion_of_f2_matches_closed_form() {
    let eps = F2_EPSILON;
    let grid = TorusGrid::new(2, 16).unwrap();
    let err = compare_torsion(grid, &fixtures::f2(eps), |x| {
        let zero = Complex64::new(0.0, 0.0);
        let e = Complex64::from_polar(1.0, 2.0 * PI * x[3]);
        let g11 = Complex64::new(1.0 + 2.0 * eps * (2.0 * PI * x[0]).cos(), 0.0);
        let g12 = 0.5 * eps * e;
        let g = [[g11, g12], [g12.conj(), Complex64::new(1.0, 0.0)]];
        // dg[l][j][k] = ∂_l g_{j k̄}
        let mut dg = [[[zero; 2]; 2]; 2];
        dg[0][0][0] = Complex64::new(-2.0 * PI * eps * (2.0 * PI * x[0]).sin(), 0.0);
        dg[1][0][1] = PI * g12;
        dg[1][1][0] = -PI * g12.conj();
        lee_form_n2(g, dg)
    });
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn torsion_of_conformally_flat_is_du() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let err = compare_torsion(grid, &fixtures::f1(2), |x| {
        // u = cos(2π x^1)/10, θ^{1,0} = ∂u
        [Complex64::new(-0.1 * PI * (2.0 * PI * x[0]).sin(), 0.0), Complex64::new(0.0, 0.0)]
    });
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn three_dimensional_gauduchon_factor() {
    use hermtorus::laplace::{gauduchon_factor, gauduchon_metric_with, GauduchonOptions};
    use hermtorus::metric::{series_field, structure_residuals};
    assert!(TorusGrid::new(3, 16).is_err());
    let mut errors = Vec::new();
    for samples in [8, 10] {
        let grid = TorusGrid::new(3, samples).unwrap();
        let m = build_metric(&fixtures::f1(3), grid).unwrap();
        let factor = gauduchon_factor(&m, &GauduchonOptions::default()).unwrap();
        let u = series_field(grid, &fixtures::f1_exponent(3));
        let c = u.map_real(|v| (3.0 * v).exp()).integrate().re / u.map_real(f64::exp).integrate().re;
        errors.push(factor.f0.max_diff(&u.map_real(|v| c * (-2.0 * v).exp())));
        let omega0 = gauduchon_metric_with(&m, &factor).unwrap();
        assert!(structure_residuals(&omega0).unwrap().gauduchon < 1e-6);
        assert!(structure_residuals(&m).unwrap().gauduchon > 1e-3);
    }
    assert!(errors[0] < 5e-5 && errors[1] < 1e-6 && errors[1] < errors[0] / 20.0, "{errors:?}");
}
