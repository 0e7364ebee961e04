//! Conformal change to a metric whose Chern scalar curvature has constant sign:
//! solves for u and checks that `S_ω̃ e^u` is constant.
//!
//! `cargo run --release --example normalize [N]`

use hermtorus::curvature::scalar_curvature_change_residual;
use hermtorus::fixtures;
use hermtorus::grid::TorusGrid;
use hermtorus::laplace::{constant_sign_scalar_metric, GauduchonOptions};
use hermtorus::metric::build_metric;

fn main() -> hermtorus::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let grid = TorusGrid::new(2, samples)?;
    let metric = build_metric(&fixtures::f2_conformal(0.05), grid)?;
    let out = constant_sign_scalar_metric(&metric, &GauduchonOptions::default())?;

    let (lo, hi) = out.u.min_max_re();
    println!("u in [{lo:.6}, {hi:.6}], Poisson residual {:.2e}", out.report.residual);
    println!("C = {:.3e}, spread of S e^u = {:.3e}, sign {:?}", out.c, out.spread(), out.sign.sign);
    println!("scalar-change law residual {:.3e}", scalar_curvature_change_residual(&out.gauduchon, &out.u)?);
    Ok(())
}
