//! Phase-diagram sweeps over `(Δ, α)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ModelParams;
use crate::spectrum::{bound_state, critical_alpha_with, ROOT_TOL};
use crate::variational::{EtaSolver, Phase};

/// Inclusive linear grid `lo, …, hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Domain(format!("invalid grid range [{lo}, {hi}]")));
        }
        if n == 0 || (n == 1 && lo != hi) {
            return Err(Error::Domain(format!(
                "grid over [{lo}, {hi}] needs more than {n} points"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellClass {
    NoBoundState,
    BoundState,
    Localized,
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub eta_solver: EtaSolver,
    /// Bisection steps per boundary point.
    pub bisection_steps: u32,
    /// Upper search limit for the delocalized-localized boundary.
    pub alpha_search_max: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            eta_solver: EtaSolver::default(),
            bisection_steps: 12,
            alpha_search_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub delta_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// Row-major, `classification[i][j]` for `delta_grid[i]`, `alpha_grid[j]`.
    pub classification: Vec<Vec<CellClass>>,
    /// Delocalized-localized boundary `α*(Δ)`; `None` if not found below the search limit.
    pub boundary_dl: Vec<Option<f64>>,
    /// Bound-state boundary `α_c(Δ)`.
    pub boundary_bs: Vec<Option<f64>>,
}

/// Classify one `(Δ, α)` point.
pub fn classify(p: &ModelParams, solver: &EtaSolver) -> CellClass {
    let sol = match solver.solve(p) {
        Ok(s) => s,
        Err(e) => return CellClass::Failed(e.to_string()),
    };
    if sol.phase == Phase::Localized {
        return CellClass::Localized;
    }
    let eta = match sol.delocalized_eta() {
        Ok(eta) => eta,
        Err(e) => return CellClass::Failed(e.to_string()),
    };
    match bound_state(p, eta, ROOT_TOL) {
        Ok(bs) if bs.exists => CellClass::BoundState,
        Ok(_) => CellClass::NoBoundState,
        Err(e) => CellClass::Failed(e.to_string()),
    }
}

fn is_localized(p: &ModelParams, solver: &EtaSolver) -> Result<bool> {
    Ok(solver.solve(p)?.phase == Phase::Localized)
}

/// `η`-collapse coupling at fixed `Δ` by bisection.
pub fn localization_boundary(delta: f64, opts: &SweepOptions) -> Result<Option<f64>> {
    let base = ModelParams::new(delta, 0.0)?;
    let mut lo = 0.0;
    let mut hi = opts.alpha_search_max;
    if !is_localized(&base.with_alpha(hi)?, &opts.eta_solver)? {
        return Ok(None);
    }
    for _ in 0..opts.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if is_localized(&base.with_alpha(mid)?, &opts.eta_solver)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Bound-state coupling at fixed `Δ`, resolved to `Δ / 2^{steps+1}`.
pub fn bound_state_boundary(delta: f64, opts: &SweepOptions) -> Result<f64> {
    let base = ModelParams::new(delta, 0.0)?;
    let tol = 0.5 * delta / base.omega_c() / f64::from(1u32 << opts.bisection_steps.min(30));
    critical_alpha_with(&base, tol, &opts.eta_solver)
}

pub fn sweep(delta: &Grid, alpha: &Grid, opts: &SweepOptions) -> Result<PhaseDiagram> {
    let delta_grid = delta.points();
    let alpha_grid = alpha.points();
    if delta_grid.iter().any(|&d| !(d > 0.0)) || alpha_grid.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::Domain("sweep needs delta > 0 and alpha >= 0".into()));
    }
    let cells: Vec<(usize, usize)> = (0..delta_grid.len())
        .flat_map(|i| (0..alpha_grid.len()).map(move |j| (i, j)))
        .collect();
    let labels: Vec<CellClass> = cells
        .par_iter()
        .map(|&(i, j)| match ModelParams::new(delta_grid[i], alpha_grid[j]) {
            Ok(p) => classify(&p, &opts.eta_solver),
            Err(e) => CellClass::Failed(e.to_string()),
        })
        .collect();
    let classification = labels.chunks(alpha_grid.len()).map(<[CellClass]>::to_vec).collect();

    let boundaries: Vec<(Option<f64>, Option<f64>)> = delta_grid
        .par_iter()
        .map(|&d| {
            let dl = localization_boundary(d, opts).ok().flatten();
            let bs = bound_state_boundary(d, opts).ok();
            (dl, bs)
        })
        .collect();
    let (boundary_dl, boundary_bs) = boundaries.into_iter().unzip();

    Ok(PhaseDiagram {
        delta_grid,
        alpha_grid,
        classification,
        boundary_dl,
        boundary_bs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::solve_eta;

    #[test]
    fn grid_points_hit_both_ends() {
        let g = Grid::new(0.0, 1.3, 14).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 14);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[13], 1.3);
        assert!(Grid::new(1.0, 0.0, 3).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert_eq!(Grid::new(0.2, 0.2, 1).unwrap().points(), vec![0.2]);
    }

    #[test]
    fn single_cell_matches_direct_calls() {
        let opts = SweepOptions::default();
        for &(d, a) in &[(0.1, 0.25), (0.1, 0.55), (1e-3, 1.2)] {
            let pd = sweep(&Grid::new(d, d, 1).unwrap(), &Grid::new(a, a, 1).unwrap(), &opts).unwrap();
            let p = ModelParams::new(d, a).unwrap();
            let sol = solve_eta(&p, 1e-12, 10_000).unwrap();
            let expect = if sol.phase == Phase::Localized {
                CellClass::Localized
            } else if bound_state(&p, sol.eta, ROOT_TOL).unwrap().exists {
                CellClass::BoundState
            } else {
                CellClass::NoBoundState
            };
            assert_eq!(pd.classification[0][0], expect);
        }
    }

    #[test]
    fn small_delta_boundaries() {
        let opts = SweepOptions::default();
        let bs = bound_state_boundary(1e-3, &opts).unwrap();
        assert!((bs - 0.5).abs() < 1e-3);
        let dl = localization_boundary(1e-3, &opts).unwrap().unwrap();
        assert!(dl > bs && dl < 1.0, "dl = {dl}");
    }

    #[test]
    fn localization_boundary_tends_to_one_as_floor_vanishes() {
        let mut last = 0.0;
        for floor in [1e-6, 1e-30, 1e-150] {
            let opts = SweepOptions {
                eta_solver: EtaSolver {
                    eta_floor: floor,
                    ..EtaSolver::default()
                },
                bisection_steps: 16,
                ..SweepOptions::default()
            };
            let dl = localization_boundary(1e-3, &opts).unwrap().unwrap();
            assert!(dl > last && dl < 1.0 + 1e-3, "floor {floor}: dl = {dl}");
            last = dl;
        }
        assert!((last - 1.0).abs() < 0.02, "dl = {last}");
    }

    #[test]
    fn boundaries_agree_with_grid_flips() {
        let opts = SweepOptions::default();
        let alpha = Grid::new(0.0, 1.3, 27).unwrap();
        let pd = sweep(&Grid::new(0.05, 0.2, 3).unwrap(), &alpha, &opts).unwrap();
        let step = 1.3 / 26.0;
        for (i, row) in pd.classification.iter().enumerate() {
            let first_bound = row.iter().position(|c| *c == CellClass::BoundState).unwrap();
            let bs = pd.boundary_bs[i].unwrap();
            assert!(pd.alpha_grid[first_bound] >= bs && pd.alpha_grid[first_bound] - bs <= step);
            if let Some(first_loc) = row.iter().position(|c| *c == CellClass::Localized) {
                let dl = pd.boundary_dl[i].unwrap();
                assert!((pd.alpha_grid[first_loc] - dl).abs() <= step);
            }
        }
    }
}
