use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    change_basis, stationarity_pattern_residual, CovarianceMatrix, CrossMap, QuadratureBasis, StationaryBeamMoments,
    TwoBeamCrossMoments,
};
use crate::error::{Error, Result};

/// Hermiticity tolerance, relative to the largest entry when that exceeds 1.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Complex Hermitian matrix of spectral quadrature moments, ordered
/// `(P₀, Q₀, P₁, Q₁, …)` per beam.
///
/// Beam `k` contributes the block `[[α, γ+iδ], [γ−iδ, β]]`; the block between
/// beams `i < j` is `[[μ+iη, ξ+iκ], [ζ+iλ, ν+iτ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    matrix: DMatrix<Complex64>,
}

impl SpectralMatrix {
    /// Validates shape, Hermiticity and a real positive diagonal.
    /// Sub-tolerance anti-Hermitian parts are removed.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n == 0 || n % 2 != 0 {
            return Err(Error::Dimension {
                found: n,
                expected: "a non-empty square matrix of even dimension",
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("spectral matrix"));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        if let Some(d) = matrix.diagonal().iter().find(|z| z.re <= 0.0) {
            return Err(Error::OutOfRange {
                name: "spectral diagonal",
                value: d.re,
                range: "(0, inf)",
            });
        }
        Ok(Self { matrix })
    }

    /// Spectral matrix of a multi-beam stationary state.
    pub fn from_multibeam(beams: &[StationaryBeamMoments], crosses: &CrossMap) -> Result<Self> {
        let n = beams.len();
        for b in beams {
            b.validate()?;
        }
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for (k, m) in beams.iter().enumerate() {
            put_block(&mut s, k, k, beam_block(m));
        }
        for i in 0..n {
            for j in i + 1..n {
                let x = crosses.get(&(i, j)).ok_or(Error::MissingPair(i, j))?;
                let b = cross_block(x);
                put_block(&mut s, i, j, b);
                put_block(&mut s, j, i, b.map(|z| z.conj()).transpose());
            }
        }
        Self::new(s)
    }

    /// Spectral matrix of a stationary covariance (any basis).
    ///
    /// Fails if `v` deviates from the stationary pattern by more than `tol`.
    pub fn from_covariance(v: &CovarianceMatrix, tol: f64) -> Result<Self> {
        let residual = stationarity_pattern_residual(v)?;
        if residual > tol {
            return Err(Error::Incompatible(format!(
                "covariance is not stationary (pattern residual {residual:e})"
            )));
        }
        let w = change_basis(v, QuadratureBasis::SymAsymPrimed)?;
        let h = w.dim() / 2;
        let m = w.matrix();
        let s = DMatrix::from_fn(h, h, |i, j| Complex64::new(m[(i, j)], m[(h + i, j)]));
        // the pattern check above already bounds the anti-Hermitian part
        Self::new((&s + s.adjoint()).map(|z| z * 0.5))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn beams(&self) -> usize {
        self.dim() / 2
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    fn check_beam(&self, beam: usize) -> Result<()> {
        if beam >= self.beams() {
            return Err(Error::Incompatible(format!(
                "beam index {beam} out of range for a {}-beam spectral matrix",
                self.beams()
            )));
        }
        Ok(())
    }

    /// Single-beam moments read off the diagonal block of `beam`.
    pub fn beam_moments(&self, beam: usize) -> Result<StationaryBeamMoments> {
        self.check_beam(beam)?;
        let k = 2 * beam;
        Ok(StationaryBeamMoments {
            alpha: self.matrix[(k, k)].re,
            beta: self.matrix[(k + 1, k + 1)].re,
            gamma: self.matrix[(k, k + 1)].re,
            delta: self.matrix[(k, k + 1)].im,
        })
    }

    /// Cross moments of beams `(i, j)`; reversed order gives the swapped set.
    pub fn cross_moments(&self, i: usize, j: usize) -> Result<TwoBeamCrossMoments> {
        self.check_beam(i)?;
        self.check_beam(j)?;
        if i == j {
            return Err(Error::Incompatible(format!("cross moments need two distinct beams, got ({i}, {i})")));
        }
        let (a, b) = (2 * i, 2 * j);
        let s = |r: usize, c: usize| self.matrix[(a + r, b + c)];
        Ok(TwoBeamCrossMoments {
            mu: s(0, 0).re,
            eta: s(0, 0).im,
            xi: s(0, 1).re,
            kappa: s(0, 1).im,
            zeta: s(1, 0).re,
            lambda: s(1, 0).im,
            nu: s(1, 1).re,
            tau: s(1, 1).im,
        })
    }

    /// All beam and pair moments.
    pub fn to_moments(&self) -> (Vec<StationaryBeamMoments>, CrossMap) {
        let n = self.beams();
        let beams = (0..n).map(|k| self.beam_moments(k).expect("index in range")).collect();
        let mut crosses = CrossMap::new();
        for i in 0..n {
            for j in i + 1..n {
                crosses.insert((i, j), self.cross_moments(i, j).expect("indices in range"));
            }
        }
        (beams, crosses)
    }
}

fn beam_block(m: &StationaryBeamMoments) -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::new(
        Complex64::new(m.alpha, 0.0),
        Complex64::new(m.gamma, m.delta),
        Complex64::new(m.gamma, -m.delta),
        Complex64::new(m.beta, 0.0),
    )
}

fn cross_block(x: &TwoBeamCrossMoments) -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::new(
        Complex64::new(x.mu, x.eta),
        Complex64::new(x.xi, x.kappa),
        Complex64::new(x.zeta, x.lambda),
        Complex64::new(x.nu, x.tau),
    )
}

fn put_block(s: &mut DMatrix<Complex64>, i: usize, j: usize, b: nalgebra::Matrix2<Complex64>) {
    s.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&b);
}

/// `[[α, γ+iδ], [γ−iδ, β]]`.
pub fn spectral_from_moments(m: &StationaryBeamMoments) -> SpectralMatrix {
    let b = beam_block(m);
    SpectralMatrix {
        matrix: DMatrix::from_fn(2, 2, |i, j| b[(i, j)]),
    }
}

/// Inverse of [`spectral_from_moments`] for a single-beam (2×2) matrix.
pub fn moments_from_spectral(s: &SpectralMatrix) -> Result<StationaryBeamMoments> {
    if s.dim() != 2 {
        return Err(Error::Dimension {
            found: s.dim(),
            expected: "2 (one beam)",
        });
    }
    s.beam_moments(0)
}

/// Embeds `S` as the real covariance `[[Re S, −Im S], [Im S, Re S]]` in the
/// rotated S/A' basis (`p_a' = q_a`, `q_a' = −p_a`).
pub fn covariance_from_spectral(s: &SpectralMatrix) -> CovarianceMatrix {
    let h = s.dim();
    let re = s.matrix.map(|z| z.re);
    let im = s.matrix.map(|z| z.im);
    let mut v = DMatrix::zeros(2 * h, 2 * h);
    v.view_mut((0, 0), (h, h)).copy_from(&re);
    v.view_mut((h, h), (h, h)).copy_from(&re);
    v.view_mut((0, h), (h, h)).copy_from(&(-&im));
    v.view_mut((h, 0), (h, h)).copy_from(&im);
    CovarianceMatrix::from_parts_unchecked(v, QuadratureBasis::SymAsymPrimed)
}
