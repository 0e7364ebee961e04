//! Vanishing certificate for a line bundle whose mean curvature changes sign
//! but has negative integral, and the hypothesis failure on a flat bundle.
//!
//! `cargo run --release --example vanishing_certificate [N]`

use hermtorus::bundle::{
    build_bundle, bundle_curvature, gamma_field, mean_curvature, vanishing_certificate, BundleSpec,
};
use hermtorus::grid::TorusGrid;
use hermtorus::laplace::GauduchonOptions;
use hermtorus::metric::{build_metric, FourierTerm, MetricSpec};

fn main() -> hermtorus::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let grid = TorusGrid::new(2, samples)?;
    let metric = build_metric(&MetricSpec::identity(2), grid)?;
    let opts = GauduchonOptions::default();

    let spec = BundleSpec::line(vec![FourierTerm::new(vec![1, 0, 0, 0], 0.1, 0.0)], -0.25, 2);
    let h = build_bundle(&spec, grid)?;
    let gamma = gamma_field(&mean_curvature(&metric, &h, &bundle_curvature(&h))?, &h)?;
    let (lo, hi) = gamma.min_max_re();
    println!("γ in [{lo:.4}, {hi:.4}]");

    let cert = vanishing_certificate(&metric, &h, &opts)?;
    println!(
        "{:?}: ∫γ = {:.4}, min gap {:.6}, worst point {:?}",
        cert.status,
        cert.gamma_integral,
        cert.min_gap.unwrap_or(f64::NAN),
        cert.worst_point
    );
    if let Some(u0) = &cert.u0 {
        let (lo, hi) = u0.min_max_re();
        println!("u0 in [{lo:.6}, {hi:.6}]");
    }

    let flat = build_bundle(&BundleSpec::trivial(2), grid)?;
    let cert = vanishing_certificate(&metric, &flat, &opts)?;
    println!("trivial rank 2: {:?}, ∫γ = {:.3e}", cert.status, cert.gamma_integral);
    Ok(())
}
