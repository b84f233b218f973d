//! Reflection off a detuned optical cavity and the RD noise coefficients.
//!
//! Detunings are dimensionless, in units of the cavity half-bandwidth γ. A
//! beam analysed at frequency Ω has its upper sideband reflected with
//! `r(Δ + Ω/γ)` and its lower sideband with `r(Δ − Ω/γ)`; the carrier phase
//! `u = r(Δ)/|r(Δ)|` sets the local-oscillator reference.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex cavity reflection `r(Δ) = −(√d + 2iΔ)/(1 − 2iΔ)`.
pub fn reflection(d: f64, delta: f64) -> Result<Complex64> {
    check_d(d)?;
    if !delta.is_finite() {
        return Err(Error::NonFinite("detuning"));
    }
    Ok(reflection_unchecked(d, delta))
}

fn reflection_unchecked(d: f64, delta: f64) -> Complex64 {
    -Complex64::new(d.sqrt(), 2.0 * delta) / Complex64::new(1.0, -2.0 * delta)
}

fn check_d(d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::OutOfRange {
            name: "d",
            value: d,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Resonator calibration: impedance matching `d` and analysis frequency in
/// units of the cavity bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub d: f64,
    pub omega_ratio: f64,
}

impl CavityParams {
    pub fn new(d: f64, omega_ratio: f64) -> Result<Self> {
        let p = Self { d, omega_ratio };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_d(self.d)?;
        if !(self.omega_ratio > 0.0) || !self.omega_ratio.is_finite() {
            return Err(Error::OutOfRange {
                name: "omega_ratio",
                value: self.omega_ratio,
                range: "(0, inf)",
            });
        }
        if self.omega_ratio <= std::f64::consts::SQRT_2 {
            log::debug!(
                "omega_ratio {} is below sqrt(2); sideband dephasing is weak",
                self.omega_ratio
            );
        }
        Ok(())
    }
}

/// Complex weights of the S/A quadratures in the detected photocurrent:
/// `√2·J = g₊*(p_s + i q_a) − g₋*(q_s − i p_a) + vacuum`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandGains {
    pub g_plus: Complex64,
    pub g_minus: Complex64,
    /// Noise power contributed by vacuum leaking through the cavity.
    pub vacuum: f64,
}

impl SidebandGains {
    /// Homodyne detection at LO phase `phi`.
    pub fn homodyne(phi: f64) -> Self {
        Self {
            g_plus: Complex64::new(phi.cos(), 0.0),
            g_minus: Complex64::new(-phi.sin(), 0.0),
            vacuum: 0.0,
        }
    }

    pub fn noise_coefficients(&self) -> CoefficientSet {
        let cg = -2.0 * self.g_plus * self.g_minus.conj();
        CoefficientSet {
            c_alpha: self.g_plus.norm_sqr(),
            c_beta: self.g_minus.norm_sqr(),
            c_gamma: cg.re,
            c_delta: cg.im,
            c_v: self.vacuum,
            g_plus: self.g_plus,
            g_minus: self.g_minus,
        }
    }
}

/// RD gains at detuning `delta`.
///
/// `g₊ = [u r*(Δ+Ω) + u* r(Δ−Ω)]/2`, `g₋ = i[u r*(Δ+Ω) − u* r(Δ−Ω)]/2`.
pub fn sideband_coeffs(p: &CavityParams, delta: f64) -> Result<SidebandGains> {
    p.validate()?;
    if !delta.is_finite() {
        return Err(Error::NonFinite("detuning"));
    }
    let r0 = reflection_unchecked(p.d, delta);
    let norm = r0.norm();
    if norm == 0.0 {
        return Err(Error::SingularReflection);
    }
    let u = r0 / norm;
    let up = reflection_unchecked(p.d, delta + p.omega_ratio);
    let lo = reflection_unchecked(p.d, delta - p.omega_ratio);
    let a = u * up.conj();
    let b = u.conj() * lo;
    let g_plus = (a + b) * 0.5;
    let g_minus = Complex64::i() * (a - b) * 0.5;
    let vacuum = (1.0 - g_plus.norm_sqr() - g_minus.norm_sqr()).max(0.0);
    Ok(SidebandGains {
        g_plus,
        g_minus,
        vacuum,
    })
}

/// Single-beam RD coefficients: `S_RD = c_α α + c_β β + c_γ γ + c_δ δ + c_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_gamma: f64,
    pub c_delta: f64,
    pub c_v: f64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
}

impl CoefficientSet {
    /// Weights on `(α, β, γ, δ)`.
    pub fn moment_row(&self) -> [f64; 4] {
        [self.c_alpha, self.c_beta, self.c_gamma, self.c_delta]
    }
}

pub fn noise_coefficients(p: &CavityParams, delta: f64) -> Result<CoefficientSet> {
    Ok(sideband_coeffs(p, delta)?.noise_coefficients())
}

/// Coefficients over a detuning grid, evaluated in parallel.
pub fn coefficient_curve(p: &CavityParams, detunings: &[f64]) -> Result<Vec<CoefficientSet>> {
    detunings.par_iter().map(|&x| noise_coefficients(p, x)).collect()
}

/// Two-beam correlation coefficients, defined by the raw products
/// `2g₊⁽¹⁾*g₊⁽²⁾ = c_μ − i c_η`, `2g₋⁽¹⁾*g₋⁽²⁾ = c_ν − i c_τ`,
/// `2g₊⁽¹⁾*g₋⁽²⁾ = c_ξ − i c_κ`, `2g₋⁽¹⁾*g₊⁽²⁾ = c_ζ − i c_λ`.
///
/// Each lies in `[−2, 2]`; far from resonance `c_μ = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoBeamCoefficientSet {
    pub c_mu: f64,
    pub c_eta: f64,
    pub c_nu: f64,
    pub c_tau: f64,
    pub c_xi: f64,
    pub c_kappa: f64,
    pub c_zeta: f64,
    pub c_lambda: f64,
}

impl TwoBeamCoefficientSet {
    pub fn from_gains(g1: &SidebandGains, g2: &SidebandGains) -> Self {
        let pp = 2.0 * g1.g_plus.conj() * g2.g_plus;
        let mm = 2.0 * g1.g_minus.conj() * g2.g_minus;
        let pm = 2.0 * g1.g_plus.conj() * g2.g_minus;
        let mp = 2.0 * g1.g_minus.conj() * g2.g_plus;
        Self {
            c_mu: pp.re,
            c_eta: -pp.im,
            c_nu: mm.re,
            c_tau: -mm.im,
            c_xi: pm.re,
            c_kappa: -pm.im,
            c_zeta: mp.re,
            c_lambda: -mp.im,
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.c_mu,
            self.c_eta,
            self.c_nu,
            self.c_tau,
            self.c_xi,
            self.c_kappa,
            self.c_zeta,
            self.c_lambda,
        ]
    }
}

pub fn cross_coefficients(p1: &CavityParams, d1: f64, p2: &CavityParams, d2: f64) -> Result<TwoBeamCoefficientSet> {
    let g1 = sideband_coeffs(p1, d1)?;
    let g2 = sideband_coeffs(p2, d2)?;
    Ok(TwoBeamCoefficientSet::from_gains(&g1, &g2))
}

/// Equivalent homodyne phase of a lossless cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdLimit {
    /// `φ` with `(c_α, c_β, c_γ) = (cos²φ, sin²φ, sin 2φ)`, in `(−π/2, π/2]`.
    pub phase: f64,
    /// Common phase `χ` of the gains, `g₊ = e^{iχ} cos φ`, `g₋ = −e^{iχ} sin φ`.
    /// Invisible in single-beam noise; it rotates two-beam correlations by
    /// `e^{i(χ₂−χ₁)}`.
    pub delay: f64,
}

/// For `d = 1` the cavity only dephases the sidebands and RD is HD at an
/// effective LO phase that depends on the detuning.
pub fn hd_limit_phase(p: &CavityParams, delta: f64) -> Result<HdLimit> {
    if p.d != 1.0 {
        return Err(Error::OutOfRange {
            name: "d",
            value: p.d,
            range: "{1} (lossless cavity)",
        });
    }
    let g = sideband_coeffs(p, delta)?;
    // g₊ ∓ i g₋ recover the unit phasors u r*(Δ+Ω) and u* r(Δ−Ω)
    let ea = g.g_plus - Complex64::i() * g.g_minus;
    let eb = g.g_plus + Complex64::i() * g.g_minus;
    let phase = 0.5 * (ea * eb.conj()).arg();
    let delay = eb.arg() + phase;
    Ok(HdLimit { phase, delay })
}
