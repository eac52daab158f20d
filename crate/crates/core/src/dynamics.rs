//! Zero-temperature spin dynamics for the displaced-vacuum reservoir.
//!
//! In the polaron frame the initial state is `|+_x, {0}⟩`, so only the
//! `N = 0` and `N = 1` sectors take part. The `|+,{0}⟩` amplitude `c(t)`
//! obeys
//!
//! ```text
//! ċ(t) + i(ηΔ/2) c(t) + ∫₀ᵗ f̃(t − τ) c(τ) dτ = 0,   c(0) = 1,
//! ```
//!
//! with the memory kernel `f̃(x) = e^{iηΔx/2} f(x)`: bath frequencies are
//! measured from the continuum edge `−ηΔ/2` where the states `|−,1_k⟩` sit,
//! which is the same reference the bound-state condition uses. The reduced
//! spin state follows the time-local master equation with
//! `Ω(t) = −2 Im[ċ/c] + ηΔ` and `γ(t) = −2 Re[ċ/c]`, and
//! `P_z(t) = 2 Re ρ'_{+−}(t) = Re[c(t) e^{−iηΔt/2}]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::spectral::{check_eta, KernelCache, ModelParams};
use crate::variational::EtaSolver;

/// Below this `|c|` the rate quotient `ċ/c` is not trusted.
pub const C_FLOOR: f64 = 1e-3;

/// `|c|` above `1 + COARSE_NORM_SLACK` marks the grid as too coarse.
pub const COARSE_NORM_SLACK: f64 = 1e-3;

/// Largest accepted step, in units of `1/ω_c`.
pub const MAX_DT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub c: Vec<Complex64>,
    /// Dressed gap `ηΔ` the series was computed with.
    pub gap: f64,
    /// `|c|` exceeded `1 + 10⁻³` somewhere: refine `dt`.
    pub too_coarse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub omega_shift: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rate_valid: Vec<bool>,
}

/// Reduced spin state in the polaron frame, `σ_z` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub pp: f64,
    pub mm: f64,
    pub pm: Complex64,
}

impl SpinState {
    /// `|+_x⟩⟨+_x|`, the image of the displaced-vacuum initial state.
    pub fn plus_x() -> Self {
        Self {
            pp: 0.5,
            mm: 0.5,
            pm: Complex64::new(0.5, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.pp + self.mm
    }

    /// `⟨σ_x⟩` in this frame, i.e. `P_z` in the laboratory frame.
    pub fn sigma_x(&self) -> f64 {
        2.0 * self.pm.re
    }

    /// Smaller eigenvalue; negative values signal lost positivity.
    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.pp + self.mm);
        let half_gap = (0.25 * (self.pp - self.mm).powi(2) + self.pm.norm_sqr()).sqrt();
        mean - half_gap
    }

    fn validate(&self) -> Result<()> {
        let ok = (self.trace() - 1.0).abs() < 1e-12 && self.min_eigenvalue() >= -1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(
                "initial spin state must be a unit-trace positive matrix".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    pub states: Vec<SpinState>,
    pub pz: Vec<f64>,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    /// Grid intervals propagated with the closed form because a rate was invalid.
    pub closed_form_intervals: usize,
}

/// Full trace of one dynamics run.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub eta: f64,
    pub times: Vec<f64>,
    pub c: Vec<Complex64>,
    pub omega_shift: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Master-equation `P_z`.
    pub pz: Vec<f64>,
    /// Closed-form `P_z = Re[c e^{−iηΔt/2}]`.
    pub pz_closed: Vec<f64>,
    pub rate_valid: Vec<bool>,
    pub too_coarse: bool,
    pub max_trace_error: f64,
    pub closed_form_intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub t_max: f64,
    pub dt: f64,
    pub quad: QuadConfig,
    pub eta_solver: EtaSolver,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            t_max: 500.0,
            dt: 0.02,
            quad: QuadConfig::default(),
            eta_solver: EtaSolver::default(),
        }
    }
}

fn grid_len(t_max: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::Domain(format!("dt must lie in (0, {MAX_DT}], got {dt}")));
    }
    if !(t_max >= dt) || !t_max.is_finite() {
        return Err(Error::Domain(format!("t_max must be >= dt, got {t_max}")));
    }
    Ok((t_max / dt + 1e-9).floor() as usize)
}

/// Solve the amplitude equation on `t_i = i·dt` up to `t_max`.
pub fn solve_amplitude(p: &ModelParams, eta: f64, t_max: f64, dt: f64, cfg: &QuadConfig) -> Result<AmplitudeSeries> {
    check_eta(eta)?;
    let n = grid_len(t_max, dt)?;
    let cache = KernelCache::new(p, eta, dt, n, cfg)?;
    solve_amplitude_cached(p, eta, &cache)
}

/// Implicit trapezoidal product rule on the cached kernel grid.
///
/// The equation is linear in `c_n`, so the trapezoidal corrector is solved
/// exactly rather than iterated.
pub fn solve_amplitude_cached(p: &ModelParams, eta: f64, cache: &KernelCache) -> Result<AmplitudeSeries> {
    check_eta(eta)?;
    let dt = cache.dt();
    let len = cache.len();
    if len < 2 {
        return Err(Error::Domain("kernel cache must cover at least one step".into()));
    }
    let gap = p.dressed_gap(eta);
    let kernel: Vec<Complex64> = cache
        .values()
        .iter()
        .enumerate()
        .map(|(i, f)| f * Complex64::from_polar(1.0, 0.5 * gap * i as f64 * dt))
        .collect();

    let mut c = Vec::with_capacity(len);
    c.push(Complex64::new(1.0, 0.0));
    let bare = Complex64::new(0.0, -0.5 * gap);
    // F_n = bare·c_n − K_n with K_n = dt[½f_n c_0 + Σ f_{n−j} c_j + ½f_0 c_n]
    let mut f_prev = bare;
    let implicit = bare - kernel[0] * (0.5 * dt);
    let denom = Complex64::new(1.0, 0.0) - implicit * (0.5 * dt);
    for step in 1..len {
        let mut history = kernel[step] * (0.5 * c[0]);
        for j in 1..step {
            history += kernel[step - j] * c[j];
        }
        let explicit = -history * dt;
        let next = (c[step - 1] + (f_prev + explicit) * (0.5 * dt)) / denom;
        f_prev = explicit + implicit * next;
        c.push(next);
    }
    let too_coarse = c.iter().any(|z| z.norm() > 1.0 + COARSE_NORM_SLACK);
    let times = (0..len).map(|i| i as f64 * dt).collect();
    Ok(AmplitudeSeries {
        dt,
        times,
        c,
        gap,
        too_coarse,
    })
}

/// `Ω(t)` and `γ(t)` from centered differences of `c`.
pub fn rates(series: &AmplitudeSeries) -> Rates {
    let c = &series.c;
    let n = c.len();
    let dt = series.dt;
    let mut omega_shift = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut rate_valid = Vec::with_capacity(n);
    for i in 0..n {
        let dc = if n < 3 {
            (c[n - 1] - c[0]) / (dt * (n - 1) as f64)
        } else if i == 0 {
            (c[1] * 4.0 - c[0] * 3.0 - c[2]) / (2.0 * dt)
        } else if i == n - 1 {
            (c[i] * 3.0 - c[i - 1] * 4.0 + c[i - 2]) / (2.0 * dt)
        } else {
            (c[i + 1] - c[i - 1]) / (2.0 * dt)
        };
        let valid = c[i].norm() >= C_FLOOR;
        if valid {
            let q = dc / c[i];
            omega_shift.push(-2.0 * q.im + series.gap);
            gamma.push(-2.0 * q.re);
        } else {
            omega_shift.push(f64::NAN);
            gamma.push(f64::NAN);
        }
        rate_valid.push(valid);
    }
    Rates {
        omega_shift,
        gamma,
        rate_valid,
    }
}

/// Exact reduced state from the amplitude alone.
pub fn closed_form_state(initial: &SpinState, c: Complex64, gap: f64, t: f64) -> SpinState {
    let pop = c.norm_sqr() * initial.pp;
    SpinState {
        pp: pop,
        mm: initial.trace() - pop,
        pm: initial.pm * c * Complex64::from_polar(1.0, -0.5 * gap * t),
    }
}

/// `P_z(t) = Re[c(t) e^{−iηΔt/2}]` for the `|+_x⟩` initial state.
pub fn pz_closed_form(series: &AmplitudeSeries) -> Vec<f64> {
    series
        .times
        .iter()
        .zip(&series.c)
        .map(|(&t, &c)| (c * Complex64::from_polar(1.0, -0.5 * series.gap * t)).re)
        .collect()
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MASTER_RTOL: f64 = 1e-10;
const MASTER_ATOL: f64 = 1e-13;

#[derive(Clone, Copy)]
struct Vec4([f64; 4]);

impl Vec4 {
    fn from_state(s: &SpinState) -> Self {
        Vec4([s.pp, s.mm, s.pm.re, s.pm.im])
    }
    fn to_state(self) -> SpinState {
        SpinState {
            pp: self.0[0],
            mm: self.0[1],
            pm: Complex64::new(self.0[2], self.0[3]),
        }
    }
    fn axpy(self, h: f64, k: &Vec4) -> Vec4 {
        let mut out = self.0;
        for (o, v) in out.iter_mut().zip(k.0.iter()) {
            *o += h * v;
        }
        Vec4(out)
    }
}

// Right-hand side of the master equation in the σ_z basis.
fn master_rhs(y: &Vec4, omega: f64, gamma: f64) -> Vec4 {
    let [pp, _mm, re, im] = y.0;
    let pm = Complex64::new(re, im) * Complex64::new(-0.5 * gamma, -0.5 * omega);
    Vec4([-gamma * pp, gamma * pp, pm.re, pm.im])
}

/// Integrate the master equation across one grid interval with rates
/// interpolated linearly between its endpoints.
fn master_interval(y0: Vec4, dt: f64, om: (f64, f64), ga: (f64, f64)) -> Vec4 {
    let rate_at = |s: f64| {
        let w = s / dt;
        (om.0 + w * (om.1 - om.0), ga.0 + w * (ga.1 - ga.0))
    };
    let mut y = y0;
    let mut s = 0.0;
    let mut h = dt;
    while s < dt {
        h = h.min(dt - s);
        let mut k = [Vec4([0.0; 4]); 7];
        for stage in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                ys = ys.axpy(h * DP_A[stage][j], kj);
            }
            let (o, g) = rate_at(s + DP_C[stage] * h);
            k[stage] = master_rhs(&ys, o, g);
        }
        let mut y5 = y;
        let mut y4 = y;
        for stage in 0..7 {
            y5 = y5.axpy(h * DP_B5[stage], &k[stage]);
            y4 = y4.axpy(h * DP_B4[stage], &k[stage]);
        }
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let scale = MASTER_ATOL + MASTER_RTOL * y.0[i].abs().max(y5.0[i].abs());
            err = err.max((y5.0[i] - y4.0[i]).abs() / scale);
        }
        if err <= 1.0 || h < 1e-12 * dt {
            s += h;
            y = y5;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).min(5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.1);
        }
    }
    y
}

/// Evolve the reduced state with the time-dependent rates.
///
/// Intervals touching an invalid rate point are bridged with the closed-form
/// state, which needs no division by `c`.
pub fn evolve_master(series: &AmplitudeSeries, rates: &Rates, initial: &SpinState) -> Result<MasterSolution> {
    initial.validate()?;
    let n = series.c.len();
    if rates.gamma.len() != n {
        return Err(Error::Domain("rates and amplitude series differ in length".into()));
    }
    let mut states = Vec::with_capacity(n);
    let mut y = Vec4::from_state(initial);
    states.push(*initial);
    let mut closed_form_intervals = 0;
    for i in 1..n {
        if rates.rate_valid[i - 1] && rates.rate_valid[i] {
            y = master_interval(
                y,
                series.dt,
                (rates.omega_shift[i - 1], rates.omega_shift[i]),
                (rates.gamma[i - 1], rates.gamma[i]),
            );
        } else {
            closed_form_intervals += 1;
            y = Vec4::from_state(&closed_form_state(initial, series.c[i], series.gap, series.times[i]));
        }
        states.push(y.to_state());
    }
    let pz = states.iter().map(SpinState::sigma_x).collect();
    let max_trace_error = states.iter().map(|s| (s.trace() - 1.0).abs()).fold(0.0, f64::max);
    let min_eigenvalue = states
        .iter()
        .map(SpinState::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    Ok(MasterSolution {
        states,
        pz,
        max_trace_error,
        min_eigenvalue,
        closed_form_intervals,
    })
}

/// Variational solve, amplitude, rates, master equation and closed form.
pub fn run_dynamics(p: &ModelParams, cfg: &DynamicsConfig) -> Result<DynamicsTrace> {
    let eta = cfg.eta_solver.solve(p)?.delocalized_eta()?;
    let series = solve_amplitude(p, eta, cfg.t_max, cfg.dt, &cfg.quad)?;
    let r = rates(&series);
    let master = evolve_master(&series, &r, &SpinState::plus_x())?;
    let pz_closed = pz_closed_form(&series);
    Ok(DynamicsTrace {
        eta,
        times: series.times,
        c: series.c,
        omega_shift: r.omega_shift,
        gamma: r.gamma,
        pz: master.pz,
        pz_closed,
        rate_valid: r.rate_valid,
        too_coarse: series.too_coarse,
        max_trace_error: master.max_trace_error,
        closed_form_intervals: master.closed_form_intervals,
    })
}

impl DynamicsTrace {
    /// Largest `|P_z^{master} − P_z^{closed}|` over points with valid rates.
    pub fn route_discrepancy(&self) -> f64 {
        self.pz
            .iter()
            .zip(&self.pz_closed)
            .zip(&self.rate_valid)
            .filter(|(_, &v)| v)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn free_spin_precesses() {
        let delta = 0.1;
        let p = ModelParams::new(delta, 0.0).unwrap();
        let cfg = DynamicsConfig {
            t_max: 100.0,
            dt: 0.05,
            ..DynamicsConfig::default()
        };
        let tr = run_dynamics(&p, &cfg).unwrap();
        assert_eq!(tr.eta, 1.0);
        assert_eq!(tr.c[0], Complex64::new(1.0, 0.0));
        for (i, &t) in tr.times.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, -0.5 * delta * t);
            assert!((tr.c[i] - expect).norm() < 1e-5, "c at t = {t}");
            assert_relative_eq!(tr.pz_closed[i], (delta * t).cos(), epsilon = 1e-5);
            assert_relative_eq!(tr.pz[i], (delta * t).cos(), epsilon = 1e-5);
            assert!(tr.gamma[i].abs() < 1e-6);
            assert_relative_eq!(tr.omega_shift[i], 2.0 * delta, epsilon = 1e-6);
        }
    }

    #[test]
    fn rejects_coarse_grid() {
        let p = ModelParams::new(0.1, 0.2).unwrap();
        assert!(solve_amplitude(&p, 0.5, 10.0, 0.5, &QuadConfig::default()).is_err());
        assert!(solve_amplitude(&p, 0.5, 0.001, 0.01, &QuadConfig::default()).is_err());
    }

    #[test]
    fn closed_form_handles_general_states() {
        let s = SpinState {
            pp: 0.8,
            mm: 0.2,
            pm: Complex64::new(0.1, 0.3),
        };
        let c = Complex64::from_polar(0.6, 0.4);
        let out = closed_form_state(&s, c, 0.05, 3.0);
        assert_relative_eq!(out.trace(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.pp, 0.8 * 0.36, epsilon = 1e-15);
        assert!(out.min_eigenvalue() >= 0.0);
    }

    #[test]
    fn invalid_initial_state_rejected() {
        let series = AmplitudeSeries {
            dt: 0.1,
            times: vec![0.0, 0.1],
            c: vec![Complex64::new(1.0, 0.0); 2],
            gap: 0.1,
            too_coarse: false,
        };
        let r = rates(&series);
        let bad = SpinState {
            pp: 0.7,
            mm: 0.7,
            pm: Complex64::new(0.0, 0.0),
        };
        assert!(evolve_master(&series, &r, &bad).is_err());
    }
}
