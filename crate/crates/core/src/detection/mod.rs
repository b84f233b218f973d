//! Forward models from state moments to photocurrent statistics.
//!
//! The demodulated photocurrent of one beam is the complex amplitude
//! `J = (I_cos + i I_sin)/√2`, so the noise power is `S = ⟨|J|²⟩` and the
//! two-beam correlation is `⟨J₁ J₂*⟩`. In terms of S/A quadratures
//!
//! ```text
//! √2·J = g₊*(p_s + i q_a) − g₋*(q_s − i p_a) + vacuum
//! ```
//!
//! with `(g₊, g₋) = (cos φ, −sin φ)` for homodyne detection at LO phase `φ`
//! and the cavity gains of [`crate::cavity::sideband_coeffs`] for RD.

mod sampling;

pub use sampling::{mc_sample, BLOCK_SAMPLES, MIN_SAMPLES};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{sideband_coeffs, CavityParams, CoefficientSet, SidebandGains, TwoBeamCoefficientSet};
use crate::error::{Error, Result};
use crate::modal::{change_basis, CovarianceMatrix, QuadratureBasis, StationaryBeamMoments, TwoBeamCrossMoments};

/// How one beam is detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum MeasurementSetting {
    /// Spectral homodyne detection at LO phase `lo_phase` (radians).
    #[serde(rename = "hd")]
    Homodyne { lo_phase: f64 },
    /// Intensity detection after reflection off a cavity detuned by
    /// `detuning` (units of the cavity bandwidth).
    #[serde(rename = "rd")]
    Resonator { cavity: CavityParams, detuning: f64 },
}

impl MeasurementSetting {
    /// Homodyne setting with the phase wrapped into `[0, 2π)`.
    pub fn homodyne(lo_phase: f64) -> Self {
        MeasurementSetting::Homodyne {
            lo_phase: lo_phase.rem_euclid(2.0 * PI),
        }
    }

    pub fn resonator(cavity: CavityParams, detuning: f64) -> Self {
        MeasurementSetting::Resonator { cavity, detuning }
    }

    pub fn is_homodyne(&self) -> bool {
        matches!(self, MeasurementSetting::Homodyne { .. })
    }

    /// LO phase or detuning, whichever this setting scans.
    pub fn scan_value(&self) -> f64 {
        match *self {
            MeasurementSetting::Homodyne { lo_phase } => lo_phase,
            MeasurementSetting::Resonator { detuning, .. } => detuning,
        }
    }

    pub fn gains(&self) -> Result<SidebandGains> {
        match *self {
            MeasurementSetting::Homodyne { lo_phase } => {
                if !lo_phase.is_finite() {
                    return Err(Error::NonFinite("LO phase"));
                }
                Ok(SidebandGains::homodyne(lo_phase))
            }
            MeasurementSetting::Resonator { cavity, detuning } => sideband_coeffs(&cavity, detuning),
        }
    }

    pub fn noise_coefficients(&self) -> Result<CoefficientSet> {
        Ok(self.gains()?.noise_coefficients())
    }
}

/// A sample estimate; `std_error` is zero for analytic predictions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }

    /// Deviation from `expected` in units of the standard error.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.value - expected) / self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CrossEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

/// Noise power per beam and `⟨J_i J_j*⟩` per beam pair `i < j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PhotocurrentStats {
    pub noise_power: Vec<Estimate>,
    pub cross: BTreeMap<(usize, usize), CrossEstimate>,
    /// Number of samples behind the estimates; zero for analytic values.
    pub samples: usize,
}

/// `cos²φ α + sin²φ β + sin 2φ γ`. There is no `δ` term.
pub fn s_hd(phi: f64, m: &StationaryBeamMoments) -> f64 {
    let (s, c) = phi.sin_cos();
    c * c * m.alpha + s * s * m.beta + (2.0 * phi).sin() * m.gamma
}

/// Homodyne noise power of an arbitrary (possibly non-stationary) beam.
pub fn s_hd_general(phi: f64, v: &CovarianceMatrix) -> Result<f64> {
    let m = single_beam_sa(v)?;
    let (s, c) = phi.sin_cos();
    Ok(c * c * (m[(0, 0)] + m[(3, 3)]) / 2.0
        + s * s * (m[(2, 2)] + m[(1, 1)]) / 2.0
        + (2.0 * phi).sin() * (m[(0, 1)] - m[(2, 3)]) / 2.0)
}

/// `c_α α + c_β β + c_γ γ + c_δ δ + c_v`.
pub fn s_rd(c: &CoefficientSet, m: &StationaryBeamMoments) -> f64 {
    c.c_alpha * m.alpha + c.c_beta * m.beta + c.c_gamma * m.gamma + c.c_delta * m.delta + c.c_v
}

/// In-phase (`re`) and in-quadrature (`im`) HD correlation of two beams.
pub fn hd_cross(phi1: f64, phi2: f64, x: &TwoBeamCrossMoments) -> (f64, f64) {
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let re = c1 * c2 * x.mu + s1 * s2 * x.nu + c1 * s2 * x.xi + s1 * c2 * x.zeta;
    let im = c1 * s2 * x.kappa + s1 * c2 * x.lambda + s1 * s2 * x.tau + c1 * c2 * x.eta;
    (re, im)
}

/// RD correlation `⟨J₁ J₂*⟩` from the raw two-beam coefficients. There is no
/// vacuum term: the ancillas of different cavities are independent.
pub fn rd_cross(t: &TwoBeamCoefficientSet, x: &TwoBeamCrossMoments) -> (f64, f64) {
    let re = t.c_mu * x.mu + t.c_eta * x.eta + t.c_nu * x.nu + t.c_tau * x.tau
        - t.c_xi * x.xi
        - t.c_kappa * x.kappa
        - t.c_zeta * x.zeta
        - t.c_lambda * x.lambda;
    let im = t.c_mu * x.eta - t.c_eta * x.mu + t.c_nu * x.tau - t.c_tau * x.nu - t.c_xi * x.kappa
        + t.c_kappa * x.xi
        - t.c_zeta * x.lambda
        + t.c_lambda * x.zeta;
    (0.5 * re, 0.5 * im)
}

/// Weights `w` on `(p_s, q_s, p_a, q_a)` with `J = w·x` (vacuum excluded).
pub fn photocurrent_weights(g: &SidebandGains) -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    let gp = g.g_plus.conj() * h;
    let gm = g.g_minus.conj() * h;
    [gp, -gm, i * gm, i * gp]
}

fn single_beam_sa(v: &CovarianceMatrix) -> Result<Matrix4<f64>> {
    if v.dim() != 4 {
        return Err(Error::Dimension {
            found: v.dim(),
            expected: "4 (one beam)",
        });
    }
    let sa = change_basis(v, QuadratureBasis::SymAsymSA)?;
    Ok(Matrix4::from_fn(|i, j| sa.get(i, j)))
}

fn bilinear(w1: &[Complex64; 4], block: &DMatrix<f64>, w2: &[Complex64; 4], conj2: bool) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            let b = if conj2 { w2[j].conj() } else { w2[j] };
            acc += w1[i] * block[(i, j)] * b;
        }
    }
    acc
}

/// Analytic statistics of any multi-beam covariance, one setting per beam.
///
/// Unlike [`s_rd`] and [`rd_cross`] this does not assume stationarity.
pub fn predict_stats(v: &CovarianceMatrix, settings: &[MeasurementSetting]) -> Result<PhotocurrentStats> {
    let beams = v.beams().filter(|&b| b == settings.len()).ok_or_else(|| {
        Error::Incompatible(format!(
            "{} settings for a covariance of dimension {}",
            settings.len(),
            v.dim()
        ))
    })?;
    let sa = change_basis(v, QuadratureBasis::SymAsymSA)?;
    let gains = settings.iter().map(|s| s.gains()).collect::<Result<Vec<_>>>()?;
    let weights: Vec<_> = gains.iter().map(photocurrent_weights).collect();
    let idx: Vec<[usize; 4]> = (0..beams).map(|b| crate::modal::beam_indices(beams, b)).collect();
    let block = |i: usize, j: usize| DMatrix::from_fn(4, 4, |r, c| sa.get(idx[i][r], idx[j][c]));
    let mut stats = PhotocurrentStats::default();
    for b in 0..beams {
        let s = bilinear(&weights[b], &block(b, b), &weights[b], true).re + gains[b].vacuum;
        stats.noise_power.push(Estimate::exact(s));
    }
    for i in 0..beams {
        for j in i + 1..beams {
            let z = bilinear(&weights[i], &block(i, j), &weights[j], true);
            stats.cross.insert(
                (i, j),
                CrossEstimate {
                    re: Estimate::exact(z.re),
                    im: Estimate::exact(z.im),
                },
            );
        }
    }
    Ok(stats)
}

/// Second moments of the two demodulated components of one beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemodulatedMoments {
    pub var_cos: f64,
    pub var_sin: f64,
    pub cov_cos_sin: f64,
}

impl DemodulatedMoments {
    /// Variance of `I_θ = cos θ I_cos + sin θ I_sin`.
    pub fn variance_at(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.var_cos + s * s * self.var_sin + 2.0 * s * c * self.cov_cos_sin
    }

    /// Covariance of `I_θ` with `I_{θ+π/2}`.
    pub fn quadrature_covariance_at(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        s * c * (self.var_sin - self.var_cos) + (c * c - s * s) * self.cov_cos_sin
    }
}

/// `Var I_cos`, `Var I_sin` and their covariance for one beam.
pub fn demodulated_moments(setting: &MeasurementSetting, v: &CovarianceMatrix) -> Result<DemodulatedMoments> {
    let m = single_beam_sa(v)?;
    let g = setting.gains()?;
    let w = photocurrent_weights(&g);
    let block = DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    let power = bilinear(&w, &block, &w, true).re + g.vacuum;
    // ⟨J²⟩: the vacuum ancilla terms pair b with b† and average out
    let pseudo = bilinear(&w, &block, &w, false);
    Ok(DemodulatedMoments {
        var_cos: power + pseudo.re,
        var_sin: power - pseudo.re,
        cov_cos_sin: pseudo.im,
    })
}

/// Statistics after uniform averaging over the electronic LO phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMixedStats {
    /// Mixed variance of `I_θ`, the same for every `θ`.
    pub noise_power: f64,
    /// Mixed variances of `I_θ` at `θ = 0` and `θ = π/2`.
    pub var_cos: f64,
    pub var_sin: f64,
    /// Mixed covariance of `I_θ` with `I_{θ+π/2}`.
    pub quadrature_correlation: f64,
    pub unmixed: DemodulatedMoments,
}

/// Points of the uniform phase rule; exact for the degree-4 trigonometric
/// polynomials that appear after a phase shift.
const MIX_POINTS: usize = 16;

/// Phase-mixed photocurrent statistics of one beam.
///
/// A random eLO phase `ψ` turns `I_θ` into `I_{θ+ψ}`; the average over `ψ`
/// is evaluated with an equally spaced rule, which is exact here.
pub fn phase_mixed_stats(setting: &MeasurementSetting, v: &CovarianceMatrix) -> Result<PhaseMixedStats> {
    let unmixed = demodulated_moments(setting, v)?;
    let avg = |f: &dyn Fn(f64) -> f64| -> f64 {
        (0..MIX_POINTS).map(|k| f(2.0 * PI * k as f64 / MIX_POINTS as f64)).sum::<f64>() / MIX_POINTS as f64
    };
    let var_cos = avg(&|psi| unmixed.variance_at(psi));
    let var_sin = avg(&|psi| unmixed.variance_at(psi + PI / 2.0));
    let quadrature_correlation = avg(&|psi| unmixed.quadrature_covariance_at(psi));
    let noise_power = 0.5 * (unmixed.var_cos + unmixed.var_sin);
    let scale = noise_power.abs().max(1.0);
    debug_assert!((var_cos - noise_power).abs() <= 1e-12 * scale);
    debug_assert!((var_sin - noise_power).abs() <= 1e-12 * scale);
    debug_assert!(quadrature_correlation.abs() <= 1e-12 * scale);
    Ok(PhaseMixedStats {
        noise_power,
        var_cos,
        var_sin,
        quadrature_correlation,
        unmixed,
    })
}

/// Largest violation of photocurrent stationarity over HD phases.
///
/// For each beam, maximizes `|(Δ²I_cos − Δ²I_sin, 2⟨I_cos I_sin⟩)|` over the
/// LO phase; the result is the largest value over beams. It vanishes iff
/// every beam block has the stationary pattern.
pub fn stationarity_residual(v: &CovarianceMatrix) -> Result<f64> {
    let beams = v.beams().ok_or(Error::Dimension {
        found: v.dim(),
        expected: "a multiple of 4 (paired sidebands)",
    })?;
    let mut worst: f64 = 0.0;
    for b in 0..beams {
        let block = v.beam_block(b)?;
        let f = |phi: f64| -> f64 {
            let m = demodulated_moments(&MeasurementSetting::homodyne(phi), &block).expect("HD gains are finite");
            (m.var_cos - m.var_sin).hypot(2.0 * m.cov_cos_sin)
        };
        worst = worst.max(maximize_periodic(f, PI));
    }
    Ok(worst)
}

/// Maximum of a `period`-periodic function: coarse grid, then golden-section
/// refinement around the best grid point.
fn maximize_periodic(f: impl Fn(f64) -> f64, period: f64) -> f64 {
    const GRID: usize = 360;
    let h = period / GRID as f64;
    let (mut best_x, mut best) = (0.0, f(0.0));
    for k in 1..GRID {
        let x = k as f64 * h;
        let y = f(x);
        if y > best {
            best = y;
            best_x = x;
        }
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_x - h, best_x + h);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}
