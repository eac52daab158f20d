//! Brute-force cross-checks on a finite, discretized bath.
//!
//! Everything here avoids the closed forms and the Volterra solver: bath
//! integrals become Riemann sums, the bound state comes from diagonalizing
//! the star Hamiltonian of the `N = 1` and `N = 2` sectors, and `c(t)` from
//! unitary evolution of the finite system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::spectral::{check_eta, dressed_density, ModelParams};

/// Lower edge of the logarithmic grid, in units of `ω_c`.
pub const LOG_OMEGA_MIN: f64 = 1e-8;

/// Default cap on the two-excitation sector dimension.
pub const TWO_EXCITATION_CAP: usize = 4000;

/// Midpoint Riemann sum of `f` over `[lo, hi]` with `n` uniform cells.
pub fn riemann_uniform<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += f(lo + (i as f64 + 0.5) * h);
    }
    acc * h
}

/// Complex version of [`riemann_uniform`].
pub fn riemann_uniform_complex<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, n: usize) -> Complex64 {
    let h = (hi - lo) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        acc += f(lo + (i as f64 + 0.5) * h);
    }
    acc * h
}

/// Midpoint Riemann sum over `[0, wc]` on a grid uniform in
/// `u = ln(1 + ω/scale)`, which resolves structure down to `ω ~ scale`.
pub fn riemann_log<F: Fn(f64) -> f64>(f: F, wc: f64, scale: f64, n: usize) -> f64 {
    let top = (wc / scale).ln_1p();
    let h = top / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let u = (i as f64 + 0.5) * h;
        let shifted = scale * u.exp();
        acc += f(shifted - scale) * shifted;
    }
    acc * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    Linear,
    Logarithmic,
}

/// Finite star-geometry bath reproducing `J'(ω)` bin by bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedBath {
    pub frequencies: Vec<f64>,
    pub couplings_sq: Vec<f64>,
    pub scheme: Discretization,
    pub m: usize,
}

impl DiscretizedBath {
    pub fn total_weight(&self) -> f64 {
        self.couplings_sq.iter().sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.couplings_sq.iter().copied().fold(0.0, f64::max)
    }

    /// `2π / min spacing`: comparisons against the continuum are only
    /// meaningful well below this time.
    pub fn recurrence_time(&self) -> f64 {
        let spacing = self
            .frequencies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        2.0 * std::f64::consts::PI / spacing
    }
}

fn bin_edges(m: usize, wc: f64, scheme: Discretization) -> Vec<f64> {
    match scheme {
        Discretization::Linear => (0..=m).map(|k| wc * k as f64 / m as f64).collect(),
        Discretization::Logarithmic => {
            let lo = LOG_OMEGA_MIN * wc;
            let ratio = (wc / lo).ln();
            let mut edges = Vec::with_capacity(m + 1);
            edges.push(0.0);
            for k in 0..m {
                edges.push(lo * (ratio * k as f64 / (m - 1) as f64).exp());
            }
            edges[m] = wc;
            edges
        }
    }
}

pub fn discretize(p: &ModelParams, eta: f64, m: usize, scheme: Discretization) -> Result<DiscretizedBath> {
    check_eta(eta)?;
    if m < 2 {
        return Err(Error::Domain(format!("bath needs at least 2 modes, got {m}")));
    }
    let a = p.dressed_gap(eta);
    let edges = bin_edges(m, p.omega_c(), scheme);
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 200,
    };
    let mut frequencies = Vec::with_capacity(m);
    let mut couplings_sq = Vec::with_capacity(m);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let weight = quad::integrate(|x: f64| dressed_density(x, p, a), lo, hi, &cfg)?.value;
        let centroid = if weight > 0.0 {
            quad::integrate(|x: f64| x * dressed_density(x, p, a), lo, hi, &cfg)?.value / weight
        } else {
            0.5 * (lo + hi)
        };
        frequencies.push(centroid);
        couplings_sq.push(weight);
    }
    Ok(DiscretizedBath {
        frequencies,
        couplings_sq,
        scheme,
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorGroundState {
    pub energy: f64,
    /// Weight `|c₀|²` of `|+,{0}⟩` in the lowest eigenvector.
    pub spin_weight: f64,
}

// Diagonal of the single-excitation block: |+,{0}⟩ first, then |−,1_k⟩.
fn single_sector_diagonal(bath: &DiscretizedBath, gap: f64) -> (f64, Vec<f64>) {
    (0.5 * gap, bath.frequencies.iter().map(|w| w - 0.5 * gap).collect())
}

// Eigenvalues of the arrowhead matrix below `lambda`, by Sylvester inertia:
// eliminate the bath rows first, then count the Schur-complement pivot.
fn count_below(lambda: f64, head: f64, diag: &[f64], couplings_sq: &[f64]) -> usize {
    let mut count = 0;
    let mut schur = head - lambda;
    for (&d, &v2) in diag.iter().zip(couplings_sq) {
        let pivot = d - lambda;
        if pivot < 0.0 {
            count += 1;
        }
        schur -= v2 / pivot;
    }
    if schur < 0.0 {
        count += 1;
    }
    count
}

/// Lowest eigenpair of the `(M+1)`-dimensional `N = 1` block by inertia
/// bisection.
pub fn diag_single_excitation(bath: &DiscretizedBath, p: &ModelParams, eta: f64) -> Result<SectorGroundState> {
    check_eta(eta)?;
    let gap = p.dressed_gap(eta);
    let (head, diag) = single_sector_diagonal(bath, gap);
    let radius: f64 = bath.couplings_sq.iter().map(|v| v.sqrt()).sum();
    let mut lo = diag
        .iter()
        .zip(&bath.couplings_sq)
        .map(|(d, v)| d - v.sqrt())
        .fold(head - radius, f64::min)
        - 1.0;
    let mut hi = diag.iter().copied().fold(head, f64::min);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // pivots vanish exactly on a diagonal entry; nudge off it
        let probe = if diag.contains(&mid) { mid.next_down() } else { mid };
        if count_below(probe, head, &diag, &bath.couplings_sq) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    let norm: f64 = bath
        .couplings_sq
        .iter()
        .zip(&diag)
        .map(|(v2, d)| v2 / ((energy - d) * (energy - d)))
        .sum();
    Ok(SectorGroundState {
        energy,
        spin_weight: 1.0 / (1.0 + norm),
    })
}

/// Same eigenpair from a dense symmetric eigensolver; for small baths.
pub fn diag_single_excitation_dense(bath: &DiscretizedBath, p: &ModelParams, eta: f64) -> Result<SectorGroundState> {
    check_eta(eta)?;
    let gap = p.dressed_gap(eta);
    let (head, diag) = single_sector_diagonal(bath, gap);
    let dim = bath.m + 1;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    h[(0, 0)] = head;
    for k in 0..bath.m {
        h[(k + 1, k + 1)] = diag[k];
        let v = bath.couplings_sq[k].sqrt();
        h[(0, k + 1)] = v;
        h[(k + 1, 0)] = v;
    }
    let eig = SymmetricEigen::new(h);
    let (idx, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Domain("empty matrix".into()))?;
    let c0 = eig.eigenvectors[(0, idx)];
    Ok(SectorGroundState {
        energy,
        spin_weight: c0 * c0,
    })
}

/// Lowest eigenvalue of the `N = 2` sector, basis `|+,1_k⟩` and
/// `|−,1_k 1_l⟩` (`k ≤ l`).
pub fn diag_two_excitation(bath: &DiscretizedBath, p: &ModelParams, eta: f64, cap: usize) -> Result<f64> {
    check_eta(eta)?;
    let m = bath.m;
    let dim = m + m * (m + 1) / 2;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let gap = p.dressed_gap(eta);
    let w = &bath.frequencies;
    let nu: Vec<f64> = bath.couplings_sq.iter().map(|v| v.sqrt()).collect();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..m {
        h[(k, k)] = 0.5 * gap + w[k];
    }
    let mut row = m;
    for k in 0..m {
        for l in k..m {
            h[(row, row)] = -0.5 * gap + w[k] + w[l];
            // σ₋ b_j† from |+,1_m⟩; b†|1⟩ = √2|2⟩ on the diagonal pairs
            if k == l {
                let v = std::f64::consts::SQRT_2 * nu[k];
                h[(row, k)] = v;
                h[(k, row)] = v;
            } else {
                h[(row, k)] = nu[l];
                h[(k, row)] = nu[l];
                h[(row, l)] = nu[k];
                h[(l, row)] = nu[k];
            }
            row += 1;
        }
    }
    let eig = SymmetricEigen::new(h);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `|+,{0}⟩` amplitude under the finite `N = 1` Hamiltonian, sampled every
/// `dt` up to `t_max`, by Crank-Nicolson substeps of at most `MAX_SUBSTEP`.
pub fn unitary_dynamics(
    bath: &DiscretizedBath,
    p: &ModelParams,
    eta: f64,
    t_max: f64,
    dt: f64,
) -> Result<Vec<Complex64>> {
    check_eta(eta)?;
    if !(dt > 0.0 && t_max >= 0.0) {
        return Err(Error::Domain(format!("invalid grid t_max = {t_max}, dt = {dt}")));
    }
    const MAX_SUBSTEP: f64 = 2.5e-3;
    const NORM_DRIFT: f64 = 1e-8;

    let gap = p.dressed_gap(eta);
    let (head, diag) = single_sector_diagonal(bath, gap);
    let nu: Vec<f64> = bath.couplings_sq.iter().map(|v| v.sqrt()).collect();
    let mut psi = DVector::<Complex64>::zeros(bath.m + 1);
    psi[0] = Complex64::new(1.0, 0.0);

    let n_out = (t_max / dt + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n_out + 1);
    out.push(psi[0]);
    let mut substeps = (dt / MAX_SUBSTEP).ceil() as usize;
    for _ in 0..n_out {
        loop {
            let h = dt / substeps as f64;
            let mut trial = psi.clone();
            for _ in 0..substeps {
                trial = cayley_step(&trial, h, head, &diag, &nu);
            }
            if (trial.norm() - 1.0).abs() <= NORM_DRIFT {
                psi = trial;
                break;
            }
            substeps *= 2;
            if substeps > 1 << 20 {
                return Err(Error::NotConverged {
                    what: "unitary propagation",
                    iterations: substeps,
                    residual: (trial.norm() - 1.0).abs(),
                });
            }
        }
        out.push(psi[0]);
    }
    Ok(out)
}

// (1 + iHh/2) ψ' = (1 − iHh/2) ψ for the arrowhead H, solved in O(M).
fn cayley_step(psi: &DVector<Complex64>, h: f64, head: f64, diag: &[f64], nu: &[f64]) -> DVector<Complex64> {
    let g = Complex64::new(0.0, 0.5 * h);
    let m = diag.len();
    // r = (1 − iHh/2) ψ
    let mut rhs = DVector::<Complex64>::zeros(m + 1);
    let mut cross = Complex64::new(0.0, 0.0);
    for k in 0..m {
        cross += psi[k + 1] * nu[k];
        rhs[k + 1] = psi[k + 1] * (Complex64::new(1.0, 0.0) - g * diag[k]) - g * nu[k] * psi[0];
    }
    rhs[0] = psi[0] * (Complex64::new(1.0, 0.0) - g * head) - g * cross;

    let mut num = rhs[0];
    let mut den = Complex64::new(1.0, 0.0) + g * head;
    for k in 0..m {
        let pivot = Complex64::new(1.0, 0.0) + g * diag[k];
        num -= g * nu[k] * rhs[k + 1] / pivot;
        den -= g * g * nu[k] * nu[k] / pivot;
    }
    let x0 = num / den;
    let mut out = DVector::<Complex64>::zeros(m + 1);
    out[0] = x0;
    for k in 0..m {
        out[k + 1] = (rhs[k + 1] - g * nu[k] * x0) / (Complex64::new(1.0, 0.0) + g * diag[k]);
    }
    out
}
