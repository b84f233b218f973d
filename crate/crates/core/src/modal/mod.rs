//! Gaussian-state representations of sideband modes.
//!
//! # Conventions
//!
//! Quadratures obey `[p, q] = 2i`, so the vacuum covariance is the identity.
//! A beam contributes two modes. In the sideband basis these are the lower and
//! upper sidebands `ℓ`, `u`; in the symmetric/anti-symmetric basis
//!
//! ```text
//! p_s = (p_u + p_ℓ)/√2    p_a = (p_u − p_ℓ)/√2      (same for q)
//! ```
//!
//! Matrices over several beams are stored *sector-major*: all beams' `(p, q)`
//! pairs of the first sector (`ℓ` or `s`) followed by all beams' pairs of the
//! second sector (`u` or `a`). For one beam this is `(p_ℓ, q_ℓ, p_u, q_u)` or
//! `(p_s, q_s, p_a, q_a)`.
//!
//! With these conventions a stationary beam with hidden moment `δ` has
//! `Δ²p_u = Δ²q_u = (α+β)/2 + δ` and `Δ²p_ℓ = Δ²q_ℓ = (α+β)/2 − δ`: a positive
//! `δ` puts more noise energy in the upper sideband.

mod basis;
mod spectral;
mod stationary;
mod symplectic;

pub use basis::{change_basis, QuadratureBasis};
pub use spectral::{covariance_from_spectral, moments_from_spectral, spectral_from_moments, SpectralMatrix};
pub use stationary::{
    assemble_multibeam, build_stationary_covariance, stationarity_pattern_residual, CrossMap,
    StationaryBeamMoments, TwoBeamCrossMoments,
};
pub use symplectic::{
    check_physicality, check_physicality_with_tol, project_physical, symplectic_eigenvalues,
    PhysicalityReport, Projection, DEFAULT_PHYSICALITY_TOL,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Absolute symmetry tolerance for covariance matrices, scaled by the largest entry when that exceeds 1.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Real symmetric quadrature covariance matrix in SQL units.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
    basis: QuadratureBasis,
}

impl CovarianceMatrix {
    /// Validates shape and symmetry. Sub-tolerance asymmetry is removed.
    pub fn new(matrix: DMatrix<f64>, basis: QuadratureBasis) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n == 0 || n % 2 != 0 {
            return Err(Error::Dimension {
                found: n,
                expected: "a non-empty square matrix of even dimension",
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariance matrix"));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix, basis })
    }

    pub fn identity(modes: usize, basis: QuadratureBasis) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
            basis,
        }
    }

    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>, basis: QuadratureBasis) -> Self {
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Self { matrix, basis }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn basis(&self) -> QuadratureBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    /// Number of beams (two sideband modes each), if the dimension allows it.
    pub fn beams(&self) -> Option<usize> {
        (self.dim() % 4 == 0).then(|| self.dim() / 4)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Row/column indices of one beam's four quadratures, in sector-major order.
    pub fn beam_indices(&self, beam: usize) -> Result<[usize; 4]> {
        let beams = self.beams().ok_or(Error::Dimension {
            found: self.dim(),
            expected: "a multiple of 4 (paired sidebands)",
        })?;
        if beam >= beams {
            return Err(Error::Incompatible(format!(
                "beam index {beam} out of range for a {beams}-beam matrix"
            )));
        }
        Ok(beam_indices(beams, beam))
    }

    /// The 4×4 single-beam block of `beam`, in this matrix's basis.
    pub fn beam_block(&self, beam: usize) -> Result<CovarianceMatrix> {
        let idx = self.beam_indices(beam)?;
        Ok(Self::from_parts_unchecked(
            DMatrix::from_fn(4, 4, |i, j| self.matrix[(idx[i], idx[j])]),
            self.basis,
        ))
    }

    /// Joint block of several beams, keeping sector-major order.
    pub fn sub_beams(&self, beams: &[usize]) -> Result<CovarianceMatrix> {
        let total = self.beams().ok_or(Error::Dimension {
            found: self.dim(),
            expected: "a multiple of 4 (paired sidebands)",
        })?;
        if let Some(&b) = beams.iter().find(|&&b| b >= total) {
            return Err(Error::Incompatible(format!("beam index {b} out of range")));
        }
        let k = beams.len();
        let mut idx = vec![0; 4 * k];
        for (slot, &b) in beams.iter().enumerate() {
            let src = beam_indices(total, b);
            idx[2 * slot] = src[0];
            idx[2 * slot + 1] = src[1];
            idx[2 * k + 2 * slot] = src[2];
            idx[2 * k + 2 * slot + 1] = src[3];
        }
        Ok(Self::from_parts_unchecked(
            DMatrix::from_fn(4 * k, 4 * k, |i, j| self.matrix[(idx[i], idx[j])]),
            self.basis,
        ))
    }

    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

/// `[p_first, q_first, p_second, q_second]` indices of `beam` among `beams`.
pub(crate) fn beam_indices(beams: usize, beam: usize) -> [usize; 4] {
    let half = 2 * beams;
    [2 * beam, 2 * beam + 1, half + 2 * beam, half + 2 * beam + 1]
}

/// Sideband entanglement witness: a noise power below the SQL in an S/A
/// combination certifies upper/lower sideband entanglement.
pub fn duan_witness(noise_power: f64) -> Result<bool> {
    if !(noise_power >= 0.0) {
        return Err(Error::OutOfRange {
            name: "noise_power",
            value: noise_power,
            range: "[0, inf)",
        });
    }
    Ok(noise_power < 1.0)
}

/// Uniform loss of transmissivity `efficiency` on every mode, with vacuum
/// filling the lost fraction: `V → ηV + (1−η)I`.
pub fn apply_loss(v: &CovarianceMatrix, efficiency: f64) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::OutOfRange {
            name: "efficiency",
            value: efficiency,
            range: "[0, 1]",
        });
    }
    let n = v.dim();
    let m = v.matrix() * efficiency + DMatrix::identity(n, n) * (1.0 - efficiency);
    Ok(CovarianceMatrix::from_parts_unchecked(m, v.basis()))
}
