//! Quick oracle suite behind the `verify` command.

use sbm_core::dynamics::{run_dynamics, solve_amplitude, DynamicsConfig};
use sbm_core::oracle::{
    diag_single_excitation, diag_two_excitation, discretize, riemann_log, unitary_dynamics, Discretization,
    TWO_EXCITATION_CAP,
};
use sbm_core::quad::QuadConfig;
use sbm_core::spectral::closed;
use sbm_core::spectrum::{bound_state, critical_alpha, ROOT_TOL};
use sbm_core::variational::{exponent_integral, EtaSolver, Route};
use sbm_core::ModelParams;

use crate::commands::Failure;
use crate::config::RunConfig;
use crate::output::{Cell, Report, Table};

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            pass: value <= limit,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    let alpha = cfg.alpha.unwrap_or(0.55);
    let p = ModelParams::try_new(cfg.delta, cfg.omega_c, alpha, cfg.s, cfg.epsilon)?;
    let solver = EtaSolver {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..EtaSolver::default()
    };
    let eta = solver.solve(&p)?.delocalized_eta()?;
    let wc = p.omega_c();
    let a = p.dressed_gap(eta);
    let mut checks = Vec::new();

    let defect = (eta - (-exponent_integral(&p, eta, &Route::ClosedForm)?).exp()).abs();
    checks.push(Check::at_most(
        "eta fixed-point defect",
        defect,
        10.0 * cfg.tol.max(1e-15),
    ));

    let riemann = riemann_log(|w| w / ((w + a) * (w + a)), wc, a, 400_000);
    checks.push(Check::at_most(
        "log moment vs Riemann sum",
        rel(closed::log_moment(a, wc), riemann),
        1e-8,
    ));
    let quad = exponent_integral(&p, eta, &Route::Quadrature(QuadConfig::default()))?;
    checks.push(Check::at_most(
        "eta exponent vs quadrature",
        rel(exponent_integral(&p, eta, &Route::ClosedForm)?, quad),
        1e-8,
    ));

    let small = ModelParams::try_new(1e-3, 1.0, 0.0, 1.0, 0.0)?;
    let ac = critical_alpha(&small, 1e-12)?;
    checks.push(Check {
        name: "critical alpha at delta = 1e-3",
        value: ac,
        limit: 0.5 + 6e-4,
        pass: (0.5..=0.5 + 6e-4).contains(&ac),
    });

    let bath = discretize(&p, eta, 1000, Discretization::Logarithmic)?;
    let exact_weight = 2.0 * alpha * a * a * closed::log_moment(a, wc);
    checks.push(Check::at_most(
        "discrete sum rule (M = 1000)",
        rel(bath.total_weight(), exact_weight),
        1e-6,
    ));

    let bs = bound_state(&p, eta, ROOT_TOL)?;
    if bs.exists {
        let ed = diag_single_excitation(&bath, &p, eta)?;
        checks.push(Check::at_most(
            "E1 vs exact diagonalization (M = 1000)",
            rel(ed.energy, bs.energy),
            1e-3,
        ));
        let small_bath = discretize(&p, eta, 20, Discretization::Logarithmic)?;
        let e2 = diag_two_excitation(&small_bath, &p, eta, TWO_EXCITATION_CAP)?;
        checks.push(Check {
            name: "two-excitation minimum above E1 (M = 20)",
            value: e2 - bs.energy,
            limit: 0.0,
            pass: e2 > bs.energy,
        });
    }

    let t_short = cfg.tmax.min(50.0);
    let dc = DynamicsConfig {
        t_max: t_short,
        dt: cfg.dt,
        eta_solver: solver,
        ..DynamicsConfig::default()
    };
    let tr = run_dynamics(&p, &dc)?;
    checks.push(Check::at_most(
        "master equation vs closed form",
        tr.route_discrepancy(),
        1e-4,
    ));
    let norm_excess = tr.c.iter().map(|c| c.norm() - 1.0).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("amplitude norm excess", norm_excess, 1e-6));

    let fine = discretize(&p, eta, 2000, Discretization::Linear)?;
    let t_cmp = t_short.min(0.5 * fine.recurrence_time());
    let series = solve_amplitude(&p, eta, t_cmp, cfg.dt, &QuadConfig::default())?;
    let unitary = unitary_dynamics(&fine, &p, eta, t_cmp, cfg.dt)?;
    let dev = series
        .c
        .iter()
        .zip(&unitary)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("amplitude vs finite-bath unitary evolution", dev, 1e-3));

    let mut t = Table::new("verify", &["check", "status", "value", "limit"]);
    let mut failed = 0u64;
    for c in &checks {
        failed += u64::from(!c.pass);
        t.push(vec![
            Cell::Text(c.name.into()),
            Cell::Text(if c.pass { "PASS" } else { "FAIL" }.into()),
            Cell::Num(c.value),
            Cell::Num(c.limit),
        ]);
    }
    Ok(Report {
        summary: vec![("failed_checks", Cell::Int(failed))],
        tables: vec![t],
    })
}
