//! Command implementations.

use rayon::prelude::*;
use sbm_core::dynamics::{run_dynamics, DynamicsConfig};
use sbm_core::phasemap::{sweep, CellClass, Grid, SweepOptions};
use sbm_core::spectrum::{
    bound_state, critical_alpha_with, ground_energy_derivative_with, ground_energy_with, Branch, ROOT_TOL,
};
use sbm_core::variational::{EtaSolver, Phase};
use sbm_core::{Error, ModelParams};

use crate::config::{Command, GridSpec, RunConfig};
use crate::output::{Cell, Report, Table};
use crate::verify;

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::Quadrature { .. } | Error::Bracket(_) => 2,
            Error::Domain(_) | Error::Localized { .. } | Error::DimensionCap { .. } | Error::StepSize(_) => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn grid(g: GridSpec) -> Result<Vec<f64>, Failure> {
    Ok(Grid::new(g.lo, g.hi, g.n)?.points())
}

fn params(cfg: &RunConfig, delta: f64, alpha: f64) -> Result<ModelParams, Failure> {
    Ok(ModelParams::try_new(delta, cfg.omega_c, alpha, cfg.s, cfg.epsilon)?)
}

fn solver(cfg: &RunConfig) -> EtaSolver {
    EtaSolver {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..EtaSolver::default()
    }
}

fn alphas(cfg: &RunConfig) -> Result<Vec<f64>, Failure> {
    match (cfg.grid_alpha, cfg.alpha) {
        (Some(g), _) => grid(g),
        (None, Some(a)) => Ok(vec![a]),
        (None, None) => Err(Failure::usage("no alpha value or grid given")),
    }
}

/// Map in parallel, keep input order, stop at the first failure by index.
fn par_rows<T, F>(xs: &[f64], f: F) -> Result<Vec<T>, Failure>
where
    T: Send,
    F: Fn(f64) -> Result<T, Failure> + Sync + Send,
{
    xs.par_iter().map(|&x| f(x)).collect::<Vec<_>>().into_iter().collect()
}

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Eta => eta(cfg),
        Command::BoundState => bound_state_cmd(cfg),
        Command::CriticalAlpha => critical_alpha_cmd(cfg),
        Command::GroundEnergy => ground_energy_cmd(cfg),
        Command::Derivative => derivative_cmd(cfg),
        Command::Dynamics => dynamics_cmd(cfg),
        Command::PhaseDiagram => phase_diagram_cmd(cfg),
        Command::Verify => verify::run(cfg),
    }
}

fn eta(cfg: &RunConfig) -> Outcome {
    let s = solver(cfg);
    let rows = par_rows(&alphas(cfg)?, |a| {
        let sol = s.solve(&params(cfg, cfg.delta, a)?)?;
        if !sol.converged {
            sol.delocalized_eta()?;
        }
        Ok(vec![
            Cell::Num(cfg.delta),
            Cell::Num(a),
            Cell::Num(sol.eta),
            Cell::Bool(sol.converged),
            Cell::Int(sol.iterations as u64),
            Cell::Num(sol.residual),
            Cell::Text(match sol.phase {
                Phase::Delocalized => "delocalized".into(),
                Phase::Localized => "localized".into(),
            }),
        ])
    })?;
    let mut t = Table::new(
        "eta",
        &["delta", "alpha", "eta", "converged", "iterations", "residual", "phase"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report {
        summary: Vec::new(),
        tables: vec![t],
    })
}

fn bound_state_cmd(cfg: &RunConfig) -> Outcome {
    let s = solver(cfg);
    let rows = par_rows(&alphas(cfg)?, |a| {
        let p = params(cfg, cfg.delta, a)?;
        let eta = s.solve(&p)?.delocalized_eta()?;
        let bs = bound_state(&p, eta, ROOT_TOL)?;
        Ok(vec![
            Cell::Num(cfg.delta),
            Cell::Num(a),
            Cell::Num(eta),
            Cell::Bool(bs.exists),
            Cell::Num(bs.energy),
            Cell::Num(bs.residue),
            Cell::Num(bs.detuning),
        ])
    })?;
    let mut t = Table::new(
        "bound_state",
        &["delta", "alpha", "eta", "exists", "energy", "residue", "detuning"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report {
        summary: Vec::new(),
        tables: vec![t],
    })
}

fn critical_alpha_cmd(cfg: &RunConfig) -> Outcome {
    let deltas = match cfg.grid_delta {
        Some(g) => grid(g)?,
        None => vec![cfg.delta],
    };
    let s = solver(cfg);
    let rows = par_rows(&deltas, |d| {
        let ac = critical_alpha_with(&params(cfg, d, 0.0)?, cfg.tol, &s)?;
        Ok(vec![Cell::Num(d), Cell::Num(ac)])
    })?;
    let mut t = Table::new("critical_alpha", &["delta", "alpha_c"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report {
        summary: Vec::new(),
        tables: vec![t],
    })
}

fn ground_energy_cmd(cfg: &RunConfig) -> Outcome {
    let s = solver(cfg);
    let base = params(cfg, cfg.delta, 0.0)?;
    let alpha_c = critical_alpha_with(&base, cfg.tol, &s)?;
    let points = par_rows(&alphas(cfg)?, |a| {
        let p = base.with_alpha(a)?;
        let g = ground_energy_with(&p, &s, ROOT_TOL)?;
        let d = ground_energy_derivative_with(&p, cfg.dalpha, false, &s)?;
        Ok((a, g, d))
    })?;
    let mut t = Table::new(
        "ground_energy",
        &["alpha", "eta", "c", "energy", "branch", "d_energy", "kink"],
    );
    let mut prev_branch = None;
    for (a, g, d) in points {
        let kink = d.crosses_branch || prev_branch.is_some_and(|b| b != g.branch);
        prev_branch = Some(g.branch);
        t.push(vec![
            Cell::Num(a),
            Cell::Num(g.eta),
            Cell::Num(g.c),
            Cell::Num(g.energy),
            Cell::Int(match g.branch {
                Branch::ZeroExcitation => 0,
                Branch::OneExcitation => 1,
            }),
            Cell::Num(d.value),
            Cell::Bool(kink),
        ]);
    }
    Ok(Report {
        summary: vec![("alpha_c", Cell::Num(alpha_c))],
        tables: vec![t],
    })
}

fn derivative_cmd(cfg: &RunConfig) -> Outcome {
    let a = cfg.alpha.ok_or_else(|| Failure::usage("`derivative` needs --alpha"))?;
    let p = params(cfg, cfg.delta, a)?;
    let d = ground_energy_derivative_with(&p, cfg.dalpha, false, &solver(cfg))?;
    let mut t = Table::new("derivative", &["delta", "alpha", "d_energy", "crosses_branch"]);
    t.push(vec![
        Cell::Num(cfg.delta),
        Cell::Num(a),
        Cell::Num(d.value),
        Cell::Bool(d.crosses_branch),
    ]);
    Ok(Report {
        summary: Vec::new(),
        tables: vec![t],
    })
}

fn dynamics_cmd(cfg: &RunConfig) -> Outcome {
    let a = cfg.alpha.ok_or_else(|| Failure::usage("`dynamics` needs --alpha"))?;
    let p = params(cfg, cfg.delta, a)?;
    let dc = DynamicsConfig {
        t_max: cfg.tmax,
        dt: cfg.dt,
        eta_solver: solver(cfg),
        ..DynamicsConfig::default()
    };
    let tr = run_dynamics(&p, &dc)?;
    let bs = bound_state(&p, tr.eta, ROOT_TOL)?;
    let mut t = Table::new(
        "dynamics",
        &["t", "re_c", "im_c", "abs_c", "omega", "gamma", "pz", "rate_valid"],
    );
    for i in 0..tr.times.len() {
        t.push(vec![
            Cell::Num(tr.times[i]),
            Cell::Num(tr.c[i].re),
            Cell::Num(tr.c[i].im),
            Cell::Num(tr.c[i].norm()),
            Cell::Num(tr.omega_shift[i]),
            Cell::Num(tr.gamma[i]),
            Cell::Num(tr.pz[i]),
            Cell::Bool(tr.rate_valid[i]),
        ]);
    }
    Ok(Report {
        summary: vec![
            ("eta", Cell::Num(tr.eta)),
            ("bound_state", Cell::Bool(bs.exists)),
            ("residue", Cell::Num(bs.residue)),
            ("route_discrepancy", Cell::Num(tr.route_discrepancy())),
            ("max_trace_error", Cell::Num(tr.max_trace_error)),
            ("closed_form_intervals", Cell::Int(tr.closed_form_intervals as u64)),
            ("too_coarse", Cell::Bool(tr.too_coarse)),
        ],
        tables: vec![t],
    })
}

fn phase_diagram_cmd(cfg: &RunConfig) -> Outcome {
    let ga = cfg
        .grid_alpha
        .ok_or_else(|| Failure::usage("`phase-diagram` needs --grid-alpha"))?;
    let gd = cfg
        .grid_delta
        .ok_or_else(|| Failure::usage("`phase-diagram` needs --grid-delta"))?;
    // parameter preconditions apply to the whole sweep
    params(cfg, gd.lo.max(f64::MIN_POSITIVE), ga.lo.max(0.0))?;
    if cfg.omega_c != 1.0 {
        return Err(Failure {
            code: 3,
            message: "phase-diagram sweeps are in units of omega_c; set omega_c = 1".into(),
        });
    }
    let opts = SweepOptions {
        eta_solver: solver(cfg),
        ..SweepOptions::default()
    };
    let pd = sweep(&Grid::new(gd.lo, gd.hi, gd.n)?, &Grid::new(ga.lo, ga.hi, ga.n)?, &opts)?;
    let mut cells = Table::new("grid", &["delta", "alpha", "class", "detail"]);
    let mut failed = 0u64;
    for (i, row) in pd.classification.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let (label, detail) = match c {
                CellClass::NoBoundState => ("no-bound-state", String::new()),
                CellClass::BoundState => ("bound-state", String::new()),
                CellClass::Localized => ("localized", String::new()),
                CellClass::Failed(msg) => {
                    failed += 1;
                    ("failed", msg.replace(',', ";"))
                }
            };
            cells.push(vec![
                Cell::Num(pd.delta_grid[i]),
                Cell::Num(pd.alpha_grid[j]),
                Cell::Text(label.into()),
                Cell::Text(detail),
            ]);
        }
    }
    let mut curves = Table::new("boundaries", &["delta", "boundary_bs", "boundary_dl"]);
    for (i, &d) in pd.delta_grid.iter().enumerate() {
        curves.push(vec![
            Cell::Num(d),
            Cell::Num(pd.boundary_bs[i].unwrap_or(f64::NAN)),
            Cell::Num(pd.boundary_dl[i].unwrap_or(f64::NAN)),
        ]);
    }
    Ok(Report {
        summary: vec![("failed_cells", Cell::Int(failed))],
        tables: vec![cells, curves],
    })
}
