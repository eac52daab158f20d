use proptest::prelude::*;
use sbm_core::quad::QuadConfig;
use sbm_core::spectral::{closed, quadrature, renormalized_spectral_density, spectral_density};
use sbm_core::spectrum::{bound_state, y_function, ROOT_TOL};
use sbm_core::variational::{solve_eta, Phase};
use sbm_core::ModelParams;

fn tight() -> QuadConfig {
    QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_are_ordered(w in 0.0..1.5f64, delta in 1e-3..0.5f64, alpha in 0.0..1.5f64, eta in 1e-6..1.0f64) {
        let p = ModelParams::new(delta, alpha).unwrap();
        let j = spectral_density(w, &p).unwrap();
        let jr = renormalized_spectral_density(w, &p, eta).unwrap();
        prop_assert!(j >= 0.0 && jr >= 0.0 && jr <= j);
        if w >= 1.0 {
            prop_assert_eq!(j, 0.0);
        }
    }

    #[test]
    fn closed_forms_match_quadrature(la in -6.0..0.0f64, lb in -7.0..0.5f64) {
        let (a, b) = (10f64.powf(la), 10f64.powf(lb));
        let cfg = tight();
        let pairs = [
            (closed::log_moment(a, 1.0), quadrature::log_moment(a, 1.0, &cfg).unwrap()),
            (closed::displacement_moment(a, 1.0), quadrature::displacement_moment(a, 1.0, &cfg).unwrap()),
            (closed::edge_integral(a, b, 1.0), quadrature::edge_integral(a, b, 1.0, &cfg).unwrap()),
            (closed::residue_integral(a, b, 1.0), quadrature::residue_integral(a, b, 1.0, &cfg).unwrap()),
        ];
        for (c, q) in pairs {
            prop_assert!((c - q).abs() <= 1e-9 * q.abs(), "a = {a}, b = {b}: {c} vs {q}");
        }
    }

    #[test]
    fn eta_is_non_increasing_in_alpha(delta in 1e-3..0.3f64) {
        let mut last = 1.0;
        for k in 0..=40 {
            let p = ModelParams::new(delta, 1.2 * k as f64 / 40.0).unwrap();
            let s = solve_eta(&p, 1e-12, 10_000).unwrap();
            if s.phase == Phase::Localized {
                break;
            }
            prop_assert!(s.converged);
            prop_assert!(s.eta <= last * (1.0 + 1e-12));
            last = s.eta;
        }
    }

    #[test]
    fn bound_state_follows_the_closed_criterion(delta in 1e-3..0.3f64, alpha in 0.3..0.9f64) {
        let p = ModelParams::new(delta, alpha).unwrap();
        let s = solve_eta(&p, 1e-12, 10_000).unwrap();
        prop_assume!(s.phase == Phase::Delocalized);
        let threshold = 0.5 + s.eta * delta / 2.0;
        prop_assume!((alpha - threshold).abs() > 1e-9);
        let bs = bound_state(&p, s.eta, ROOT_TOL).unwrap();
        prop_assert_eq!(bs.exists, alpha > threshold);
        if bs.exists {
            prop_assert!(bs.energy < -s.eta * delta / 2.0);
            prop_assert!(bs.residue > 0.0 && bs.residue < 1.0);
            let (lo, hi) = (bs.energy - 4.0 * ROOT_TOL, bs.energy + 4.0 * ROOT_TOL);
            if hi < -s.eta * delta / 2.0 {
                let (ylo, yhi) = (y_function(lo, &p, s.eta).unwrap() - lo, y_function(hi, &p, s.eta).unwrap() - hi);
                prop_assert!(ylo * yhi <= 0.0, "no sign change around the root: {ylo}, {yhi}");
            }
        }
    }
}

#[test]
fn residue_is_bounded_and_continuous_in_alpha() {
    let ac = sbm_core::spectrum::critical_alpha(&ModelParams::new(0.1, 0.0).unwrap(), 1e-13).unwrap();
    let mut last: Option<f64> = None;
    for k in 1..=300 {
        let p = ModelParams::new(0.1, ac + 1e-3 * k as f64).unwrap();
        let eta = solve_eta(&p, 1e-12, 10_000).unwrap().delocalized_eta().unwrap();
        let z = bound_state(&p, eta, ROOT_TOL).unwrap().residue;
        assert!(z > 0.0 && z <= 1.0);
        if let Some(prev) = last {
            assert!((z - prev).abs() < 0.02, "jump at k = {k}: {prev} -> {z}");
        }
        last = Some(z);
    }
}
