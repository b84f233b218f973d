use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{beam_indices, change_basis, CovarianceMatrix, QuadratureBasis};
use crate::error::{Error, Result};

/// Cross moments keyed by beam pair `(i, j)` with `i < j`.
pub type CrossMap = BTreeMap<(usize, usize), TwoBeamCrossMoments>;

/// The four moments of a stationary single-beam state, in the S/A basis:
/// `α = Δ²p_s = Δ²q_a`, `β = Δ²q_s = Δ²p_a`, `γ = C(p_s q_s) = −C(p_a q_a)`,
/// `δ = C(p_s p_a) = C(q_s q_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryBeamMoments {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl StationaryBeamMoments {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let m = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        m.validate()?;
        Ok(m)
    }

    pub const fn vacuum() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.0,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("beam moments"));
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if value <= 0.0 {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    range: "(0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            alpha: a[0],
            beta: a[1],
            gamma: a[2],
            delta: a[3],
        }
    }
}

/// Cross moments between beams 1 and 2 of a stationary two-beam state.
///
/// The S–S block is `C(p_s1 p_s2) = μ`, `C(p_s1 q_s2) = ξ`, `C(q_s1 p_s2) = ζ`,
/// `C(q_s1 q_s2) = ν`. The S–A block, invisible to in-phase HD correlations,
/// holds `C(p_s1 p_a2) = κ`, `C(p_s1 q_a2) = −η`, `C(q_s1 p_a2) = τ`,
/// `C(q_s1 q_a2) = −λ`, `C(p_s2 p_a1) = −λ`, `C(p_s2 q_a1) = η`,
/// `C(q_s2 p_a1) = −τ`, `C(q_s2 q_a1) = κ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoBeamCrossMoments {
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub tau: f64,
    pub eta: f64,
}

impl TwoBeamCrossMoments {
    pub const NAMES: [&'static str; 8] = ["mu", "nu", "xi", "zeta", "kappa", "lambda", "tau", "eta"];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.mu, self.nu, self.xi, self.zeta, self.kappa, self.lambda, self.tau, self.eta,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            mu: a[0],
            nu: a[1],
            xi: a[2],
            zeta: a[3],
            kappa: a[4],
            lambda: a[5],
            tau: a[6],
            eta: a[7],
        }
    }

    /// The same correlations described with beam order reversed.
    pub fn swapped(&self) -> Self {
        Self {
            mu: self.mu,
            nu: self.nu,
            xi: self.zeta,
            zeta: self.xi,
            kappa: -self.lambda,
            lambda: -self.kappa,
            tau: -self.tau,
            eta: -self.eta,
        }
    }
}

/// The 4×4 stationary covariance of one beam in `basis`.
pub fn build_stationary_covariance(m: &StationaryBeamMoments, basis: QuadratureBasis) -> CovarianceMatrix {
    let StationaryBeamMoments {
        alpha: a,
        beta: b,
        gamma: g,
        delta: d,
    } = *m;
    #[rustfmt::skip]
    let sa = DMatrix::from_row_slice(4, 4, &[
        a,   g,   d,   0.0,
        g,   b,   0.0, d,
        d,   0.0, b,   -g,
        0.0, d,   -g,  a,
    ]);
    let v = CovarianceMatrix::from_parts_unchecked(sa, QuadratureBasis::SymAsymSA);
    change_basis(&v, basis).expect("4x4 is a valid single-beam dimension")
}

/// Covariance of `n` beams in the S/A basis (sector-major, `4n × 4n`).
///
/// `crosses` must hold an entry `(i, j)`, `i < j`, for every pair of beams.
pub fn assemble_multibeam(beams: &[StationaryBeamMoments], crosses: &CrossMap) -> Result<CovarianceMatrix> {
    let n = beams.len();
    if n == 0 {
        return Err(Error::Dimension {
            found: 0,
            expected: "at least one beam",
        });
    }
    if let Some((&(i, j), _)) = crosses.iter().find(|(&(i, j), _)| i >= j || j >= n) {
        return Err(Error::Incompatible(format!(
            "cross moments keyed ({i}, {j}) do not name an ordered pair of the {n} beams"
        )));
    }
    let mut v = DMatrix::zeros(4 * n, 4 * n);
    let mut set = |r: usize, c: usize, x: f64| {
        v[(r, c)] = x;
        v[(c, r)] = x;
    };
    for (k, m) in beams.iter().enumerate() {
        let [ps, qs, pa, qa] = beam_indices(n, k);
        set(ps, ps, m.alpha);
        set(qs, qs, m.beta);
        set(ps, qs, m.gamma);
        set(pa, pa, m.beta);
        set(qa, qa, m.alpha);
        set(pa, qa, -m.gamma);
        set(ps, pa, m.delta);
        set(qs, qa, m.delta);
    }
    for i in 0..n {
        for j in i + 1..n {
            let x = crosses.get(&(i, j)).ok_or(Error::MissingPair(i, j))?;
            let [ps1, qs1, pa1, qa1] = beam_indices(n, i);
            let [ps2, qs2, pa2, qa2] = beam_indices(n, j);
            // S–S
            set(ps1, ps2, x.mu);
            set(ps1, qs2, x.xi);
            set(qs1, ps2, x.zeta);
            set(qs1, qs2, x.nu);
            // A–A: the S–S block seen through p_a = −q_a', q_a = p_a'
            set(pa1, pa2, x.nu);
            set(pa1, qa2, -x.zeta);
            set(qa1, pa2, -x.xi);
            set(qa1, qa2, x.mu);
            // S1–A2 and S2–A1
            set(ps1, pa2, x.kappa);
            set(ps1, qa2, -x.eta);
            set(qs1, pa2, x.tau);
            set(qs1, qa2, -x.lambda);
            set(ps2, pa1, -x.lambda);
            set(ps2, qa1, x.eta);
            set(qs2, pa1, -x.tau);
            set(qs2, qa1, x.kappa);
        }
    }
    Ok(CovarianceMatrix::from_parts_unchecked(v, QuadratureBasis::SymAsymSA))
}

/// Distance of `v` from the stationary pattern (any number of beams).
///
/// In the rotated S/A' basis a stationary state has the block form
/// `[[X, −Y], [Y, X]]` with `X` symmetric and `Y` antisymmetric; the residual
/// is the largest entrywise violation of that form.
pub fn stationarity_pattern_residual(v: &CovarianceMatrix) -> Result<f64> {
    let w = change_basis(v, QuadratureBasis::SymAsymPrimed)?;
    let h = w.dim() / 2;
    let m = w.matrix();
    let x1 = m.view((0, 0), (h, h));
    let x2 = m.view((h, h), (h, h));
    let y = m.view((0, h), (h, h));
    let sym = (x1 - x2).amax();
    let anti = (y + y.transpose()).amax();
    Ok(sym.max(anti))
}
