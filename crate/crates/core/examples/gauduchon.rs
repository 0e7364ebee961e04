//! Gauduchon factor of a conformally flat metric against its closed form,
//! then the Gauduchon representative of a conformal class and its sign.
//!
//! `cargo run --release --example gauduchon [N]`

use hermtorus::fixtures;
use hermtorus::grid::TorusGrid;
use hermtorus::laplace::{gauduchon_factor, gauduchon_metric_with, gauduchon_sign_of, GauduchonOptions};
use hermtorus::metric::{build_metric, series_field, structure_residuals};

fn main() -> hermtorus::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let grid = TorusGrid::new(2, samples)?;
    let opts = GauduchonOptions::default();

    // ω = e^u ω_flat has f0 = c e^{-u}
    let metric = build_metric(&fixtures::f1(2), grid)?;
    let factor = gauduchon_factor(&metric, &opts)?;
    let u = series_field(grid, &fixtures::f1_exponent(2));
    let c = u.map_real(|v| (2.0 * v).exp()).integrate().re / u.map_real(f64::exp).integrate().re;
    let closed = u.map_real(|v| c * (-v).exp());
    println!(
        "F1: residual {:.2e}, {} outer iterations, |f0 - c e^-u| = {:.3e}",
        factor.residual,
        factor.report.outer_iterations,
        factor.f0.max_diff(&closed)
    );

    let metric = build_metric(&fixtures::f2_conformal(0.05), grid)?;
    println!("before: gauduchon residual {:.3e}", structure_residuals(&metric)?.gauduchon);
    let factor = gauduchon_factor(&metric, &opts)?;
    let g0 = gauduchon_metric_with(&metric, &factor)?;
    println!("after:  gauduchon residual {:.3e}", structure_residuals(&g0)?.gauduchon);

    let recovered = build_metric(&fixtures::f2(0.05), grid)?;
    let lambda = recovered.total_volume() / g0.total_volume();
    let drift = (0..grid.len())
        .map(|p| {
            let a = g0.matrix_at(p);
            let b = recovered.matrix_at(p);
            a.iter().zip(&b).map(|(x, y)| (x * lambda.sqrt() - y).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    println!("distance to F2 after rescaling: {drift:.3e}");

    let sign = gauduchon_sign_of(&g0)?;
    println!("Gauduchon degree {:.3e} (band {:.1e}), sign {:?}", sign.value, sign.zero_band, sign.sign);
    Ok(())
}
