//! Randomized invariants over small metrics, bundles and configurations.

use hermtorus::bundle::{build_bundle, bundle_curvature, gamma_field, mean_curvature, BundleSpec};
use hermtorus::cli::{Command, RunConfig};
use hermtorus::curvature::{chern_curvature, scalar_curvature_change_residual, scalar_s, scalar_s_hat};
use hermtorus::fixtures::random_trig_field;
use hermtorus::grid::TorusGrid;
use hermtorus::laplace::adjointness_residual;
use hermtorus::metric::{build_metric, volume_integral, EntryTerm, FourierTerm, MetricSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn wave() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1i64..=1, 4)
}

fn entry_term() -> impl Strategy<Value = EntryTerm> {
    (1usize..=2, 1usize..=2, wave(), -0.05..0.05f64, -0.05..0.05f64)
        .prop_map(|(i, j, k, re, im)| EntryTerm::new([i, j], k, re, im))
}

/// `I + Σ terms` with at most three small terms stays positive-definite.
fn metric_spec() -> impl Strategy<Value = MetricSpec> {
    (prop::collection::vec(entry_term(), 1..=3), wave(), -0.05..0.05f64).prop_map(|(terms, k, a)| MetricSpec {
        terms,
        conformal: vec![FourierTerm::new(k, a, 0.0)],
        ..MetricSpec::identity(2)
    })
}

fn grid(samples: usize) -> TorusGrid {
    TorusGrid::new(2, samples).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn curvature_is_hermitian_and_scales(spec in metric_spec(), lambda in 0.3..4.0f64) {
        let g = grid(8);
        let m = build_metric(&spec, g).unwrap();
        let r = chern_curvature(&m);
        prop_assert!(r.hermitian_defect() < 1e-12);
        let s = scalar_s(&m, &r).unwrap();
        let sh = scalar_s_hat(&m, &r).unwrap();
        let scaled = m.scaled(lambda).unwrap();
        let rs = chern_curvature(&scaled);
        let s2 = scalar_s(&scaled, &rs).unwrap();
        let sh2 = scalar_s_hat(&scaled, &rs).unwrap();
        prop_assert!(s2.max_diff(&s.scale(1.0 / lambda)) < 1e-10 * (1.0 + s.max_abs()));
        prop_assert!(sh2.max_diff(&sh.scale(1.0 / lambda)) < 1e-10 * (1.0 + sh.max_abs()));
        let total = volume_integral(&s, &m).unwrap();
        let total2 = volume_integral(&s2, &scaled).unwrap();
        prop_assert!((total2 - lambda * total).abs() < 1e-10 * (1.0 + total.abs()));
    }

    #[test]
    fn scalar_change_law(spec in metric_spec(), seed in any::<u64>()) {
        let g = grid(16);
        let m = build_metric(&spec, g).unwrap();
        let u = random_trig_field(g, seed, 1, 0.03);
        let residual = scalar_curvature_change_residual(&m, &u).unwrap();
        prop_assert!(residual < 1e-8, "residual {:e}", residual);
    }

    #[test]
    fn laplacian_adjointness(spec in metric_spec(), seed in any::<u64>()) {
        let g = grid(8);
        let m = build_metric(&spec, g).unwrap();
        let u = random_trig_field(g, seed, 2, 0.5);
        let f = random_trig_field(g, seed.wrapping_add(1), 2, 0.5);
        prop_assert!(adjointness_residual(&m, &u, &f).unwrap() < 1e-12);
    }

    #[test]
    fn gamma_is_frame_invariant(
        weight in -0.1..0.1f64,
        b in -0.5..0.5f64,
        a in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let g = grid(8);
        let metric = build_metric(&MetricSpec::identity(2), g).unwrap();
        let spec = BundleSpec {
            terms: vec![EntryTerm::new([1, 2], vec![1, 0, 0, 0], 0.1, 0.05)],
            ..BundleSpec::line(vec![FourierTerm::new(vec![0, 1, 0, 0], weight, 0.0)], b, 2)
        };
        let spec = BundleSpec { rank: 2, ..spec };
        let h = build_bundle(&spec, g).unwrap();
        // A = 2I + small perturbation is invertible
        let frame: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(a[2 * i] * 0.3 + if i % 3 == 0 { 2.0 } else { 0.0 }, a[2 * i + 1] * 0.3))
            .collect();
        let h2 = h.change_frame(&frame).unwrap();
        let gamma = gamma_field(&mean_curvature(&metric, &h, &bundle_curvature(&h)).unwrap(), &h).unwrap();
        let gamma2 = gamma_field(&mean_curvature(&metric, &h2, &bundle_curvature(&h2)).unwrap(), &h2).unwrap();
        prop_assert!(gamma.max_diff(&gamma2) < 1e-9 * (1.0 + gamma.max_abs()));
    }

    #[test]
    fn config_round_trips(seed in 0..=i64::MAX as u64, samples in (4usize..=16).prop_map(|s| 2 * s), solver in 1e-13..1e-6f64) {
        let mut c = RunConfig::new(samples, hermtorus::fixtures::f2(0.05));
        c.seed = seed;
        c.command = Some(Command::Identities);
        c.tolerances.solver = solver;
        let json = serde_json::to_string(&c).unwrap();
        let back = RunConfig::from_json(&json).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.digest(), c.digest());
        let toml_text = toml::to_string(&c).unwrap();
        prop_assert_eq!(RunConfig::from_toml(&toml_text).unwrap(), c);
    }
}
