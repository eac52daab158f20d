//! Reference values at Δ/ω_c = 0.1, frozen from independent high-precision runs.

use approx::assert_relative_eq;
use sbm_core::spectrum::{bound_state, critical_alpha, ROOT_TOL};
use sbm_core::variational::solve_eta;
use sbm_core::ModelParams;

#[test]
fn bound_state_at_alpha_055() {
    let p = ModelParams::new(0.1, 0.55).unwrap();
    let eta = solve_eta(&p, 1e-13, 10_000).unwrap().delocalized_eta().unwrap();
    assert_relative_eq!(eta, 0.194_204_986_234_7, max_relative = 1e-10);
    let bs = bound_state(&p, eta, ROOT_TOL).unwrap();
    assert_relative_eq!(bs.energy, -1.005_269_425_728e-2, max_relative = 1e-9);
    assert_relative_eq!(bs.residue, 0.286_697_108_846, max_relative = 1e-8);
}

#[test]
fn critical_coupling() {
    let ac = critical_alpha(&ModelParams::new(0.1, 0.0).unwrap(), 1e-13).unwrap();
    assert_relative_eq!(ac, 0.512_118_696_9, max_relative = 1e-9);
}
