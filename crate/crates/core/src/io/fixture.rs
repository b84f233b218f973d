//! Measured six-mode spectral matrix of a three-beam OPO (pump, signal,
//! idler) at 21 MHz, in SQL units. Only upper triangles are tabulated; the
//! real part is completed symmetrically and the imaginary part
//! antisymmetrically, which makes the matrix Hermitian.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::modal::{covariance_from_spectral, CovarianceMatrix, CrossMap, SpectralMatrix, StationaryBeamMoments};

pub const BEAM_NAMES: [&str; 3] = ["pump", "signal", "idler"];

/// Upper triangle of the real part, row by row.
#[rustfmt::skip]
const RE_UPPER: [&[f64]; 6] = [
    &[1.30, -0.07, -0.47, 0.00, -0.48, -0.03],
    &[1.07, 0.12, 0.16, 0.14, 0.08],
    &[1.52, -0.02, 1.00, 0.05],
    &[2.87, 0.05, -0.91],
    &[1.52, -0.05],
    &[3.64],
];

/// Strict upper triangle of the imaginary part, row by row.
#[rustfmt::skip]
const IM_UPPER: [&[f64]; 5] = [
    &[-0.04, 0.10, 0.04, 0.07, 0.14],
    &[-0.03, -0.03, -0.02, 0.38],
    &[0.34, 0.05, -0.08],
    &[0.04, 0.54],
    &[0.17],
];

/// Stated uncertainty of the single-beam `δ` entries.
pub const DELTA_UNCERTAINTY: f64 = 0.2;
/// Stated upper bound on the uncertainty of the cross-beam entries.
pub const CROSS_UNCERTAINTY: f64 = 0.05;

/// The tabulated matrix after Hermitian completion.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureMatrix {
    pub re: [[f64; 6]; 6],
    pub im: [[f64; 6]; 6],
}

impl FixtureMatrix {
    pub fn tabulated() -> Self {
        let mut re = [[0.0; 6]; 6];
        let mut im = [[0.0; 6]; 6];
        for (i, row) in RE_UPPER.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                let j = i + k;
                re[i][j] = x;
                re[j][i] = x;
            }
        }
        for (i, row) in IM_UPPER.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                let j = i + 1 + k;
                im[i][j] = x;
                im[j][i] = -x;
            }
        }
        Self { re, im }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(6, 6, |i, j| Complex64::new(self.re[i][j], self.im[i][j]))
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub matrix: FixtureMatrix,
    pub spectral: SpectralMatrix,
    /// 12×12, rotated S/A' basis.
    pub covariance: CovarianceMatrix,
    pub beams: Vec<StationaryBeamMoments>,
    pub crosses: CrossMap,
}

pub fn load_fixture() -> Fixture {
    let matrix = FixtureMatrix::tabulated();
    let spectral = SpectralMatrix::new(matrix.to_complex()).expect("fixture is Hermitian with a positive diagonal");
    let covariance = covariance_from_spectral(&spectral);
    let (beams, crosses) = spectral.to_moments();
    Fixture {
        matrix,
        spectral,
        covariance,
        beams,
        crosses,
    }
}

/// Beam and pair moments of the fixture.
pub fn fixture_moments() -> (Vec<StationaryBeamMoments>, CrossMap) {
    let f = load_fixture();
    (f.beams, f.crosses)
}
