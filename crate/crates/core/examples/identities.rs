//! The integral identities for the Gauduchon representative of a conformal
//! rescaling of F2, adjointness of the complex Laplacian and the Weitzenböck
//! formula on canonical bundles.
//!
//! `cargo run --release --example identities [N]`

use hermtorus::bundle::{weitzenbock_residual, CanonicalSection};
use hermtorus::fixtures::{self, random_trig_field};
use hermtorus::grid::TorusGrid;
use hermtorus::laplace::{adjointness_residual, identity_suite, GauduchonOptions};
use hermtorus::metric::build_metric;
use num_complex::Complex64;

fn main() -> hermtorus::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let grid = TorusGrid::new(2, samples)?;
    let metric = build_metric(&fixtures::f2_conformal(0.05), grid)?;

    let r = identity_suite(&metric, &GauduchonOptions::default(), 11)?;
    println!("input ∂∂̄ω residual    {:.3e}", r.gauduchon_residual);
    println!("input ∫Δ_c u ω^n      {:.3e}  (nonzero off the Gauduchon class)", r.laplacian_integral);
    println!("comparison            {:.3e}", r.comparison);
    println!("∫S ω0^n               {:.3e}", r.total_scalar);
    println!("∫Ŝ ω0^n               {:.3e}", r.total_scalar_hat);
    println!("torsion norm sides    {:.10e} {:.10e}", r.torsion_norm_sides[0], r.torsion_norm_sides[1]);
    println!("decomposition         {:.3e}", r.decomposition);

    let worst = (0..5)
        .map(|s| {
            let u = random_trig_field(grid, 100 + s, 2, 0.3);
            let f = random_trig_field(grid, 200 + s, 2, 0.3);
            adjointness_residual(&metric, &u, &f)
        })
        .try_fold(0.0, |acc: f64, r| r.map(|v| acc.max(v)))?;
    println!("adjointness, worst of 5 pairs {worst:.3e}");

    for m in 1..=2 {
        let sec = CanonicalSection::new(m, Complex64::new(1.0, 0.5))?;
        println!("Weitzenböck m={m}: {:.3e}", weitzenbock_residual(&metric, &sec)?);
    }
    Ok(())
}
