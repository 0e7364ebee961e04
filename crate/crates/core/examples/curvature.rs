//! Chern curvature of the non-Kähler metric F2: scalar curvatures, Ricci trace,
//! the Berger sphere average at a few points and the holomorphic sectional range.
//!
//! `cargo run --release --example curvature [N]`

use hermtorus::curvature::{
    berger_average, berger_rhs, chern_curvature, hsc_range_estimate, ricci_form, scalar_s, scalar_s_hat,
    trace_omega, BergerMode, HscSampler,
};
use hermtorus::fixtures;
use hermtorus::grid::TorusGrid;
use hermtorus::metric::{build_metric, structure_residuals, volume_integral};

fn main() -> hermtorus::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let grid = TorusGrid::new(2, samples)?;
    let metric = build_metric(&fixtures::f2(0.05), grid)?;

    let s = structure_residuals(&metric)?;
    println!("kahler {:.3e}  balanced {:.3e}  gauduchon {:.3e}", s.kahler, s.balanced, s.gauduchon);

    let r = chern_curvature(&metric);
    println!("max |R| {:.4e}, hermitian defect {:.2e}", r.max_abs(), r.hermitian_defect());
    let scalar = scalar_s(&metric, &r)?;
    let scalar_hat = scalar_s_hat(&metric, &r)?;
    let (lo, hi) = scalar.min_max_re();
    println!("S in [{lo:.6}, {hi:.6}], ∫S ω^2 = {:.3e}", volume_integral(&scalar, &metric)?);
    println!("∫Ŝ ω^2 = {:.3e}", volume_integral(&scalar_hat, &metric)?);

    let trace = trace_omega(&ricci_form(&metric), &metric)?;
    println!("|tr Ric - S| = {:.3e}", trace.max_diff(&scalar));

    for p in [0, grid.len() / 3, grid.len() / 2 + 7] {
        let exact = berger_average(&r, &metric, p, BergerMode::Quadrature)?;
        let mc = berger_average(&r, &metric, p, BergerMode::MonteCarlo { seed: 7, samples: 200_000 })?;
        let rhs = berger_rhs(scalar.re(p), scalar_hat.re(p), 2);
        println!(
            "point {p:>6}: quadrature {:+.10} rhs {:+.10} monte-carlo {:+.6} ± {:.1e}",
            exact.value, rhs, mc.value, mc.standard_error
        );
    }

    let range = hsc_range_estimate(&r, &metric, &HscSampler { seed: 3, points: 32, directions: 32, refine_steps: 20 })?;
    println!("holomorphic sectional curvature in [{:.6}, {:.6}]", range.min, range.max);
    Ok(())
}
