use num_complex::Complex64;
use sbm_core::dynamics::solve_amplitude;
use sbm_core::oracle::{
    diag_single_excitation, diag_single_excitation_dense, diag_two_excitation, discretize, riemann_uniform,
    riemann_uniform_complex, unitary_dynamics, Discretization, TWO_EXCITATION_CAP,
};
use sbm_core::quad::QuadConfig;
use sbm_core::spectral::{kernel, renormalized_spectral_density};
use sbm_core::spectrum::{bound_state, ROOT_TOL};
use sbm_core::variational::solve_eta;
use sbm_core::ModelParams;

fn setup(alpha: f64) -> (ModelParams, f64) {
    let p = ModelParams::new(0.1, alpha).unwrap();
    let eta = solve_eta(&p, 1e-12, 10_000).unwrap().delocalized_eta().unwrap();
    (p, eta)
}

#[test]
fn kernel_matches_riemann_sum() {
    let (p, eta) = setup(0.25);
    let x = 5.0;
    let k = kernel(x, &p, eta, &QuadConfig::default()).unwrap();
    let r = riemann_uniform_complex(
        |w| renormalized_spectral_density(w, &p, eta).unwrap() * Complex64::from_polar(1.0, -w * x),
        0.0,
        1.0,
        1_000_000,
    );
    assert!((k - r).norm() <= 1e-8 * r.norm(), "{k} vs {r}");
}

#[test]
fn discrete_bath_keeps_total_weight() {
    let (p, eta) = setup(0.55);
    let exact = riemann_uniform(
        |w| renormalized_spectral_density(w, &p, eta).unwrap(),
        0.0,
        1.0,
        4_000_000,
    );
    for scheme in [Discretization::Linear, Discretization::Logarithmic] {
        let bath = discretize(&p, eta, 1000, scheme).unwrap();
        assert!((bath.total_weight() - exact).abs() <= 1e-6 * exact);
    }
}

#[test]
fn diagonalization_converges_to_the_bound_state() {
    let (p, eta) = setup(0.55);
    let bs = bound_state(&p, eta, ROOT_TOL).unwrap();
    let mut last = f64::INFINITY;
    for m in [250, 500, 1000, 2000] {
        let bath = discretize(&p, eta, m, Discretization::Logarithmic).unwrap();
        let ed = diag_single_excitation(&bath, &p, eta).unwrap();
        let err = (ed.energy - bs.energy).abs() / bs.energy.abs();
        assert!(err < last, "M = {m}");
        last = err;
        if m == 2000 {
            assert!(err < 1e-5);
            assert!((ed.spin_weight - bs.residue).abs() < 1e-4);
        }
    }
    let small = discretize(&p, eta, 300, Discretization::Logarithmic).unwrap();
    let a = diag_single_excitation(&small, &p, eta).unwrap();
    let b = diag_single_excitation_dense(&small, &p, eta).unwrap();
    assert!((a.energy - b.energy).abs() < 1e-12);
}

#[test]
fn two_excitation_sector_lies_above_e1() {
    let (p, eta) = setup(0.55);
    let e1 = bound_state(&p, eta, ROOT_TOL).unwrap().energy;
    let mut last = f64::INFINITY;
    for m in [10, 20, 30] {
        let bath = discretize(&p, eta, m, Discretization::Logarithmic).unwrap();
        let e2 = diag_two_excitation(&bath, &p, eta, TWO_EXCITATION_CAP).unwrap();
        assert!(e2 > e1 && e2 <= last + 1e-12, "M = {m}: {e2}");
        last = e2;
    }
}

#[test]
fn volterra_amplitude_matches_finite_bath_evolution() {
    for alpha in [0.05, 0.55] {
        let (p, eta) = setup(alpha);
        let bath = discretize(&p, eta, 2000, Discretization::Linear).unwrap();
        let t_max = 40.0;
        assert!(t_max < bath.recurrence_time());
        let series = solve_amplitude(&p, eta, t_max, 0.02, &QuadConfig::default()).unwrap();
        let unitary = unitary_dynamics(&bath, &p, eta, t_max, 0.02).unwrap();
        let dev = series
            .c
            .iter()
            .zip(&unitary)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-3, "alpha = {alpha}: {dev}");
    }
}
