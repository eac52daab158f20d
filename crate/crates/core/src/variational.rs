//! Self-consistent renormalized tunneling `η` from the variational polaron
//! transformation with displacements `ξ(ω) = ω / (ω + ηΔ)`.
//!
//! The stationarity condition reads `η = exp(−I(η))` with
//! `I(η) = ∫ J(ω) / (2(ω + ηΔ)²) dω`. It is solved by damped fixed-point
//! iteration seeded at `η₀ = 1`, which selects the largest fixed point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::spectral::{check_eta, closed, quadrature, ModelParams};

/// Below this `η` the solution is labelled localized.
pub const ETA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Delocalized,
    Localized,
}

/// How the reservoir integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Route {
    #[default]
    ClosedForm,
    Quadrature(QuadConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub eta: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub phase: Phase,
}

impl VariationalSolution {
    pub fn is_delocalized(&self) -> bool {
        self.phase == Phase::Delocalized
    }

    /// `η` of a converged delocalized solution, or the matching error.
    pub fn delocalized_eta(&self) -> Result<f64> {
        match (self.phase, self.converged) {
            (Phase::Localized, _) => Err(Error::Localized { eta: self.eta }),
            (Phase::Delocalized, false) => Err(Error::NotConverged {
                what: "variational eta iteration",
                iterations: self.iterations,
                residual: self.residual,
            }),
            (Phase::Delocalized, true) => Ok(self.eta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolver {
    /// Relative step tolerance `|η_{n+1} − η_n| ≤ tol·η_n`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping `λ` in `η ← (1−λ)η + λ e^{−I(η)}`.
    pub damping: f64,
    /// Iterates below this value are classified localized.
    pub eta_floor: f64,
    pub route: Route,
}

impl Default for EtaSolver {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 0.5,
            eta_floor: ETA_FLOOR,
            route: Route::ClosedForm,
        }
    }
}

/// Exponent `I(η) = ∫₀^{ω_c} J(ω) / (2(ω + ηΔ)²) dω`.
pub fn exponent_integral(p: &ModelParams, eta: f64, route: &Route) -> Result<f64> {
    check_eta(eta)?;
    if p.alpha() == 0.0 {
        return Ok(0.0);
    }
    let a = p.dressed_gap(eta);
    let moment = match route {
        Route::ClosedForm => closed::log_moment(a, p.omega_c()),
        Route::Quadrature(cfg) => quadrature::log_moment(a, p.omega_c(), cfg)?,
    };
    Ok(p.alpha() * moment)
}

/// Displacement constant `C = ∫ J(ω) ξ(ω)(2 − ξ(ω)) / (4ω) dω = α ω_c² / (2(ω_c + ηΔ))`.
pub fn displacement_constant(p: &ModelParams, eta: f64) -> Result<f64> {
    displacement_constant_with(p, eta, &Route::ClosedForm)
}

pub fn displacement_constant_with(p: &ModelParams, eta: f64, route: &Route) -> Result<f64> {
    check_eta(eta)?;
    let a = p.dressed_gap(eta);
    let moment = match route {
        Route::ClosedForm => closed::displacement_moment(a, p.omega_c()),
        Route::Quadrature(cfg) => quadrature::displacement_moment(a, p.omega_c(), cfg)?,
    };
    Ok(0.5 * p.alpha() * moment)
}

pub fn solve_eta(p: &ModelParams, tol: f64, max_iter: usize) -> Result<VariationalSolution> {
    EtaSolver {
        tol,
        max_iter,
        ..EtaSolver::default()
    }
    .solve(p)
}

impl EtaSolver {
    pub fn solve(&self, p: &ModelParams) -> Result<VariationalSolution> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Domain(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.eta_floor > 0.0 && self.eta_floor < 1.0) {
            return Err(Error::Domain(format!(
                "eta floor must lie in (0, 1), got {}",
                self.eta_floor
            )));
        }
        let mut lambda = self.damping;
        let mut eta = 1.0_f64;
        let mut residual = f64::INFINITY;
        let mut last_step = 0.0_f64;

        for iter in 1..=self.max_iter {
            let target = (-exponent_integral(p, eta, &self.route)?).exp();
            let next = (1.0 - lambda) * eta + lambda * target;
            let step = next - eta;
            residual = step.abs();

            if next < self.eta_floor {
                return Ok(VariationalSolution {
                    eta: next,
                    converged: true,
                    iterations: iter,
                    residual,
                    phase: Phase::Localized,
                });
            }
            // sign flips of the step mean overshoot
            if last_step != 0.0 && step.signum() != last_step.signum() {
                lambda *= 0.5;
            }
            last_step = step;
            eta = next;
            // relative test so that tiny fixed points are resolved too
            if residual <= self.tol * eta {
                return Ok(VariationalSolution {
                    eta,
                    converged: true,
                    iterations: iter,
                    residual,
                    phase: Phase::Delocalized,
                });
            }
        }
        Ok(VariationalSolution {
            eta,
            converged: false,
            iterations: self.max_iter,
            residual,
            phase: Phase::Delocalized,
        })
    }
}
