//! Single-excitation bound state of the effective rotating-wave Hamiltonian,
//! the critical coupling where it appears, and the two-branch ground energy.
//!
//! With `a = ηΔ` and the binding depth `b = −(E + a/2) ≥ 0`, the eigenvalue
//! condition `y(E) = E` becomes `G(b) = a + b − 2αa² B(b) = 0` where
//! `B(b) = ∫ ω / ((ω + a)² (ω + b)) dω`. `G` is strictly increasing, so the
//! root is unique and found by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_eta, closed, quadrature, ModelParams};
use crate::variational::{displacement_constant, EtaSolver, Phase, Route};

/// Default bisection tolerance on the energy, in units of `ω_c`.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateResult {
    pub exists: bool,
    /// `E₁`; `NaN` when no bound state exists.
    pub energy: f64,
    /// Pole weight `Z` of the `|+,{0}⟩` amplitude; `NaN` when no bound state exists.
    pub residue: f64,
    /// `E₁ + Δη/2`, zero without a bound state.
    pub detuning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    ZeroExcitation,
    OneExcitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub branch: Branch,
    pub eta: f64,
    pub c: f64,
    pub bound_state: BoundStateResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    /// The stencil straddles the bound-state transition.
    pub crosses_branch: bool,
}

fn edge_integral(a: f64, b: f64, wc: f64, route: &Route) -> Result<f64> {
    match route {
        Route::ClosedForm => Ok(closed::edge_integral(a, b, wc)),
        Route::Quadrature(cfg) => quadrature::edge_integral(a, b, wc, cfg),
    }
}

/// `y(E) = Δη/2 − ∫ J'(ω) / (ω − (E + Δη/2)) dω` for `E ≤ −Δη/2`.
pub fn y_function(e: f64, p: &ModelParams, eta: f64) -> Result<f64> {
    y_function_with(e, p, eta, &Route::ClosedForm)
}

pub fn y_function_with(e: f64, p: &ModelParams, eta: f64, route: &Route) -> Result<f64> {
    check_eta(eta)?;
    let a = p.dressed_gap(eta);
    let b = -(e + 0.5 * a);
    if !(b >= 0.0) {
        return Err(Error::Domain(format!(
            "y(E) requires E <= -eta*delta/2 = {}, got {e}",
            -0.5 * a
        )));
    }
    if b.is_infinite() {
        return Ok(0.5 * a);
    }
    let alpha = p.alpha();
    if alpha == 0.0 {
        return Ok(0.5 * a);
    }
    Ok(0.5 * a - 2.0 * alpha * a * a * edge_integral(a, b, p.omega_c(), route)?)
}

// G(b) = y(E) − E, increasing in b.
fn secular(a: f64, b: f64, alpha: f64, wc: f64) -> f64 {
    a + b - 2.0 * alpha * a * a * closed::edge_integral(a, b, wc)
}

pub fn bound_state(p: &ModelParams, eta: f64, root_tol: f64) -> Result<BoundStateResult> {
    check_eta(eta)?;
    if !(root_tol > 0.0) {
        return Err(Error::Domain(format!("root tolerance must be > 0, got {root_tol}")));
    }
    let a = p.dressed_gap(eta);
    let wc = p.omega_c();
    let alpha = p.alpha();
    let none = BoundStateResult {
        exists: false,
        energy: f64::NAN,
        residue: f64::NAN,
        detuning: 0.0,
    };
    // exactly critical counts as unbound
    if !(secular(a, 0.0, alpha, wc) < 0.0) {
        return Ok(none);
    }

    let mut lo = 0.0;
    let mut hi = wc;
    let mut doublings = 0;
    while secular(a, hi, alpha, wc) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "bound-state root not bracketed below {}",
                -0.5 * a - hi
            )));
        }
    }
    while hi - lo > root_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if secular(a, mid, alpha, wc) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    let residue = 1.0 / (1.0 + 2.0 * alpha * a * a * closed::residue_integral(a, b, wc));
    Ok(BoundStateResult {
        exists: true,
        energy: -0.5 * a - b,
        residue,
        detuning: -b,
    })
}

/// Self-consistent `α_c` solving `α = 1/2 + η(α)Δ / (2ω_c)`.
pub fn critical_alpha(p: &ModelParams, tol: f64) -> Result<f64> {
    critical_alpha_with(p, tol, &EtaSolver::default())
}

pub fn critical_alpha_with(p: &ModelParams, tol: f64, solver: &EtaSolver) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let ratio = p.delta() / (2.0 * p.omega_c());
    let gap = |alpha: f64| -> Result<f64> {
        let sol = solver.solve(&p.with_alpha(alpha)?)?;
        let eta = match sol.phase {
            Phase::Localized => 0.0,
            Phase::Delocalized => sol.delocalized_eta()?,
        };
        Ok(alpha - 0.5 - eta * ratio)
    };
    let mut lo = 0.5;
    let mut hi = 0.5 + ratio;
    if gap(hi)? < 0.0 {
        return Err(Error::Bracket(format!(
            "critical coupling not bracketed by [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn ground_energy(p: &ModelParams) -> Result<GroundState> {
    ground_energy_with(p, &EtaSolver::default(), ROOT_TOL)
}

pub fn ground_energy_with(p: &ModelParams, solver: &EtaSolver, root_tol: f64) -> Result<GroundState> {
    let eta = solver.solve(p)?.delocalized_eta()?;
    let c = displacement_constant(p, eta)?;
    let bs = bound_state(p, eta, root_tol)?;
    let (energy, branch) = if bs.exists {
        (bs.energy - c, Branch::OneExcitation)
    } else {
        (-0.5 * p.dressed_gap(eta) - c, Branch::ZeroExcitation)
    };
    Ok(GroundState {
        energy,
        branch,
        eta,
        c,
        bound_state: bs,
    })
}

/// Finite-difference `dE_g/dα`, central where possible and second-order
/// one-sided near `α = 0`. `richardson` combines steps `h` and `h/2`.
pub fn ground_energy_derivative(p: &ModelParams, dalpha: f64, richardson: bool) -> Result<DerivativeEstimate> {
    ground_energy_derivative_with(p, dalpha, richardson, &EtaSolver::default())
}

pub fn ground_energy_derivative_with(
    p: &ModelParams,
    dalpha: f64,
    richardson: bool,
    solver: &EtaSolver,
) -> Result<DerivativeEstimate> {
    if !(dalpha > 0.0) {
        return Err(Error::Domain(format!("derivative step must be > 0, got {dalpha}")));
    }
    let eval = |alpha: f64| ground_energy_with(&p.with_alpha(alpha)?, solver, ROOT_TOL);
    let stencil = |h: f64| -> Result<(f64, bool)> {
        let alpha = p.alpha();
        if alpha >= h {
            let lo = eval(alpha - h)?;
            let hi = eval(alpha + h)?;
            Ok(((hi.energy - lo.energy) / (2.0 * h), lo.branch != hi.branch))
        } else {
            let e0 = eval(alpha)?;
            let e1 = eval(alpha + h)?;
            let e2 = eval(alpha + 2.0 * h)?;
            Ok((
                (-3.0 * e0.energy + 4.0 * e1.energy - e2.energy) / (2.0 * h),
                e0.branch != e2.branch,
            ))
        }
    };
    let (coarse, cross) = stencil(dalpha)?;
    if !richardson {
        return Ok(DerivativeEstimate {
            value: coarse,
            crosses_branch: cross,
        });
    }
    let (fine, cross_fine) = stencil(0.5 * dalpha)?;
    Ok(DerivativeEstimate {
        value: (4.0 * fine - coarse) / 3.0,
        crosses_branch: cross || cross_fine,
    })
}
