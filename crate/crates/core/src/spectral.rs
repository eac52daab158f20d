//! Ohmic spectral density, its polaron-renormalized counterpart, and the
//! reservoir integrals shared by the other modules.
//!
//! All integrals over the ohmic density `J(ω) = 2αω Θ(ω_c − ω)` reduce to
//! rational functions of `ω` and `a = ηΔ`, so each has a closed form
//! ([`closed`]) next to an adaptive-quadrature route ([`quadrature`]).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};

/// Physical inputs of the unbiased spin-boson model.
///
/// Energies are measured in the same unit as `omega_c` (normally 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    delta: f64,
    omega_c: f64,
    alpha: f64,
    s: f64,
    epsilon: f64,
}

impl ModelParams {
    /// Ohmic, unbiased model with `ω_c = 1`.
    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        Self::try_new(delta, 1.0, alpha, 1.0, 0.0)
    }

    pub fn try_new(delta: f64, omega_c: f64, alpha: f64, s: f64, epsilon: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!("tunneling delta must be > 0, got {delta}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::Domain(format!("cutoff omega_c must be > 0, got {omega_c}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Domain(format!("coupling alpha must be >= 0, got {alpha}")));
        }
        if s != 1.0 {
            return Err(Error::Domain(format!(
                "only the ohmic exponent s = 1 is supported, got {s}"
            )));
        }
        if epsilon != 0.0 {
            return Err(Error::Domain(format!(
                "only the unbiased model epsilon = 0 is supported, got {epsilon}"
            )));
        }
        Ok(Self {
            delta,
            omega_c,
            alpha,
            s,
            epsilon,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same model at a different coupling.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::try_new(self.delta, self.omega_c, alpha, self.s, self.epsilon)
    }

    /// Same model at a different tunneling amplitude.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::try_new(delta, self.omega_c, self.alpha, self.s, self.epsilon)
    }

    /// Renormalized tunneling `ηΔ`.
    pub fn dressed_gap(&self, eta: f64) -> f64 {
        eta * self.delta
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "renormalization factor eta must lie in (0, 1], got {eta}"
        )))
    }
}

/// Bare spectral density `J(ω) = 2α ω_c^{1−s} ω^s Θ(ω_c − ω)`.
pub fn spectral_density(omega: f64, p: &ModelParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("frequency must be >= 0, got {omega}")));
    }
    Ok(bare_density(omega, p))
}

#[inline]
fn bare_density(omega: f64, p: &ModelParams) -> f64 {
    if omega < p.omega_c {
        2.0 * p.alpha * p.omega_c.powf(1.0 - p.s) * omega.powf(p.s)
    } else {
        0.0
    }
}

/// Renormalized density `J'(ω) = (ηΔ)² J(ω) / (ω + ηΔ)²`.
pub fn renormalized_spectral_density(omega: f64, p: &ModelParams, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let j = spectral_density(omega, p)?;
    let a = p.dressed_gap(eta);
    Ok(a * a * j / ((omega + a) * (omega + a)))
}

#[inline]
pub(crate) fn dressed_density(omega: f64, p: &ModelParams, a: f64) -> f64 {
    a * a * bare_density(omega, p) / ((omega + a) * (omega + a))
}

/// Memory kernel `f(x) = ∫₀^{ω_c} J'(ω) e^{−iωx} dω` for `x ≥ 0`.
pub fn kernel(x: f64, p: &ModelParams, eta: f64, cfg: &QuadConfig) -> Result<Complex64> {
    check_eta(eta)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("kernel time must be >= 0, got {x}")));
    }
    let a = p.dressed_gap(eta);
    if x == 0.0 {
        let r = quad::integrate(|w: f64| dressed_density(w, p, a), 0.0, p.omega_c, cfg)?;
        return Ok(Complex64::new(r.value, 0.0));
    }
    let r = quad::integrate(
        |w: f64| Complex64::from_polar(dressed_density(w, p, a), -w * x),
        0.0,
        p.omega_c,
        cfg,
    )?;
    Ok(r.value)
}

/// Kernel values on the uniform grid `x_i = i·dt`, `i = 0..=n`.
///
/// Built once per dynamics run, read-only afterwards.
#[derive(Debug, Clone)]
pub struct KernelCache {
    dt: f64,
    values: Vec<Complex64>,
}

impl KernelCache {
    pub fn new(p: &ModelParams, eta: f64, dt: f64, n: usize, cfg: &QuadConfig) -> Result<Self> {
        check_eta(eta)?;
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("kernel grid step must be > 0, got {dt}")));
        }
        let values = (0..=n)
            .into_par_iter()
            .map(|i| kernel(i as f64 * dt, p, eta, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dt, values })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Mean boson number `n = ∫ J(ω) / (4(ω + ηΔ)²) dω` of the displaced vacuum.
pub fn displaced_boson_number(p: &ModelParams, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let a = p.dressed_gap(eta);
    Ok(0.5 * p.alpha * closed::log_moment(a, p.omega_c))
}

/// Closed forms of the ohmic integrals over `[0, ω_c]`.
///
/// `a > 0` is the dressed gap `ηΔ`, `b ≥ 0` the binding depth below the
/// continuum edge.
pub mod closed {
    /// `∫ ω / (ω + a)² dω`.
    pub fn log_moment(a: f64, wc: f64) -> f64 {
        (wc / a).ln_1p() - wc / (wc + a)
    }

    /// `∫ ω (ω + 2a) / (ω + a)² dω`, the shape of the displacement constant.
    pub fn displacement_moment(a: f64, wc: f64) -> f64 {
        wc * wc / (wc + a)
    }

    /// `∫ ω / ((ω + a)² (ω + b)) dω`.
    pub fn edge_integral(a: f64, b: f64, wc: f64) -> f64 {
        let head = wc * wc / (a * (wc + a) * (wc + b));
        if b == 0.0 {
            return head;
        }
        let d = delta_ratio(a, b, wc);
        let h = h_series(d, ln_one_plus_delta(a, b, wc));
        head + b * wc * wc * h / (a * a * (wc + b) * (wc + b))
    }

    /// `∫ ω / ((ω + a)² (ω + b)²) dω`; diverges logarithmically as `b → 0`.
    pub fn residue_integral(a: f64, b: f64, wc: f64) -> f64 {
        if b == 0.0 {
            return f64::INFINITY;
        }
        let d = delta_ratio(a, b, wc);
        let l = ln_one_plus_delta(a, b, wc);
        let h = h_series(d, l);
        let hp = h_prime(d, l, a, b, wc);
        let wb = wc + b;
        wc * wc / (a * (wc + a) * wb * wb)
            - wc * wc / (a * a) * (h * (wc - b) / (wb * wb * wb) + hp * wc * (wc + a) / (a * wb.powi(4)))
    }

    // δ = ω_c (b − a) / (a (ω_c + b))
    fn delta_ratio(a: f64, b: f64, wc: f64) -> f64 {
        wc * (b - a) / (a * (wc + b))
    }

    // ln(1 + δ) = ln(b (a + ω_c) / (a (ω_c + b)))
    fn ln_one_plus_delta(a: f64, b: f64, wc: f64) -> f64 {
        let d = delta_ratio(a, b, wc);
        if d.abs() < 0.5 {
            d.ln_1p()
        } else {
            (b / a).ln() + ((a + wc) / (wc + b)).ln()
        }
    }

    // h(δ) = (ln(1+δ) − δ) / δ²
    fn h_series(d: f64, l: f64) -> f64 {
        if d.abs() < 1e-2 {
            // Σ (−1)^{k+1} δ^k / (k + 2)
            let mut acc = 0.0;
            let mut pow = 1.0;
            for k in 0..12 {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                acc += sign * pow / (k as f64 + 2.0);
                pow *= d;
            }
            acc
        } else {
            (l - d) / (d * d)
        }
    }

    // b · h'(δ), kept finite as b → 0 where 1 + δ → 0.
    fn h_prime(d: f64, l: f64, a: f64, b: f64, wc: f64) -> f64 {
        if d.abs() < 1e-2 {
            // Σ (−1)^{k+1} k δ^{k−1} / (k + 2)
            let mut acc = 0.0;
            let mut pow = 1.0;
            for k in 1..13 {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                acc += sign * k as f64 * pow / (k as f64 + 2.0);
                pow *= d;
            }
            b * acc
        } else {
            // b / (1 + δ) = a (ω_c + b) / (a + ω_c)
            let b_over_1pd = a * (wc + b) / (a + wc);
            let h = (l - d) / (d * d);
            -b_over_1pd / d - 2.0 * b * h / d
        }
    }
}

/// Adaptive-quadrature versions of the [`closed`] integrals.
pub mod quadrature {
    use crate::error::Result;
    use crate::quad::{integrate_with_breaks, QuadConfig};

    pub fn log_moment(a: f64, wc: f64, cfg: &QuadConfig) -> Result<f64> {
        integrate_with_breaks(|w: f64| w / ((w + a) * (w + a)), 0.0, wc, &[a], cfg).map(|r| r.value)
    }

    pub fn displacement_moment(a: f64, wc: f64, cfg: &QuadConfig) -> Result<f64> {
        integrate_with_breaks(|w: f64| w * (w + 2.0 * a) / ((w + a) * (w + a)), 0.0, wc, &[a], cfg).map(|r| r.value)
    }

    pub fn edge_integral(a: f64, b: f64, wc: f64, cfg: &QuadConfig) -> Result<f64> {
        integrate_with_breaks(|w: f64| w / ((w + a) * (w + a) * (w + b)), 0.0, wc, &[a, b], cfg).map(|r| r.value)
    }

    pub fn residue_integral(a: f64, b: f64, wc: f64, cfg: &QuadConfig) -> Result<f64> {
        integrate_with_breaks(
            |w: f64| w / ((w + a) * (w + a) * (w + b) * (w + b)),
            0.0,
            wc,
            &[a, b],
            cfg,
        )
        .map(|r| r.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(delta: f64, alpha: f64) -> ModelParams {
        ModelParams::new(delta, alpha).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(0.0, 0.1).is_err());
        assert!(ModelParams::new(0.1, -0.1).is_err());
        assert!(ModelParams::try_new(0.1, 1.0, 0.1, 0.5, 0.0).is_err());
        assert!(ModelParams::try_new(0.1, 1.0, 0.1, 1.0, 0.2).is_err());
        assert!(ModelParams::try_new(0.1, -1.0, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn spectral_density_values() {
        let q = p(0.1, 0.55);
        assert_eq!(spectral_density(0.0, &q).unwrap(), 0.0);
        assert_eq!(spectral_density(2.0, &q).unwrap(), 0.0);
        assert_eq!(spectral_density(1.0, &q).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(0.5, &q).unwrap(), 0.55, epsilon = 1e-15);
        assert!(spectral_density(-0.1, &q).is_err());
    }

    #[test]
    fn renormalized_density_limits() {
        assert_eq!(renormalized_spectral_density(0.3, &p(0.1, 0.0), 0.5).unwrap(), 0.0);
        let q = p(0.1, 0.3);
        let w = 1e-9;
        assert_relative_eq!(
            renormalized_spectral_density(w, &q, 0.4).unwrap(),
            2.0 * 0.3 * w,
            max_relative = 1e-6
        );
        assert!(renormalized_spectral_density(0.3, &q, 0.0).is_err());
        assert!(renormalized_spectral_density(0.3, &q, 1.5).is_err());
    }

    #[test]
    fn kernel_at_zero_is_real_total_weight() {
        let q = p(0.1, 0.55);
        let eta = 0.2;
        let f0 = kernel(0.0, &q, eta, &QuadConfig::default()).unwrap();
        assert_eq!(f0.im, 0.0);
        let a = q.dressed_gap(eta);
        let total = 2.0 * 0.55 * a * a * closed::log_moment(a, 1.0);
        assert_relative_eq!(f0.re, total, max_relative = 1e-10);
        assert_eq!(kernel(0.0, &p(0.1, 0.0), eta, &QuadConfig::default()).unwrap().re, 0.0);
        assert!(kernel(-1.0, &q, eta, &QuadConfig::default()).is_err());
    }

    #[test]
    fn kernel_cache_matches_pointwise() {
        let q = p(0.1, 0.25);
        let cfg = QuadConfig::default();
        let cache = KernelCache::new(&q, 0.5, 0.5, 8, &cfg).unwrap();
        assert_eq!(cache.len(), 9);
        for (i, v) in cache.values().iter().enumerate() {
            assert_eq!(*v, kernel(i as f64 * 0.5, &q, 0.5, &cfg).unwrap());
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cfg = QuadConfig::default();
        for &(a, b) in &[
            (0.02, 1e-4),
            (0.05, 0.05),
            (0.05, 0.0501),
            (0.1, 0.3),
            (0.3, 2.0),
            (0.01, 0.5),
        ] {
            for &wc in &[1.0, 2.5] {
                assert_relative_eq!(
                    closed::log_moment(a, wc),
                    quadrature::log_moment(a, wc, &cfg).unwrap(),
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    closed::displacement_moment(a, wc),
                    quadrature::displacement_moment(a, wc, &cfg).unwrap(),
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    closed::edge_integral(a, b, wc),
                    quadrature::edge_integral(a, b, wc, &cfg).unwrap(),
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    closed::residue_integral(a, b, wc),
                    quadrature::residue_integral(a, b, wc, &cfg).unwrap(),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn edge_integral_at_threshold() {
        let (a, wc) = (0.03, 1.0);
        assert_relative_eq!(
            closed::edge_integral(a, 0.0, wc),
            wc / (a * (wc + a)),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed::edge_integral(a, 1e-14, wc),
            closed::edge_integral(a, 0.0, wc),
            max_relative = 1e-9
        );
        assert!(closed::residue_integral(a, 0.0, wc).is_infinite());
    }

    #[test]
    fn boson_number_grows_with_coupling() {
        assert_eq!(displaced_boson_number(&p(0.1, 0.0), 0.7).unwrap(), 0.0);
        let mut prev = 0.0;
        for k in 1..10 {
            let n = displaced_boson_number(&p(0.1, 0.1 * k as f64), 0.7).unwrap();
            assert!(n > prev);
            prev = n;
        }
    }
}
