#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sideband_core::modal::{covariance_from_spectral, project_physical, CrossMap};
use sideband_core::{Complex64, CovarianceMatrix, QuadratureBasis, SpectralMatrix, StationaryBeamMoments};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random physical stationary state of `beams` beams: a random Hermitian
/// spectral matrix, possibly below the SQL in places, projected onto the
/// physical set.
pub fn random_stationary(beams: usize, rng: &mut ChaCha8Rng) -> (CovarianceMatrix, Vec<StationaryBeamMoments>, CrossMap) {
    let n = 2 * beams;
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)));
    let diag = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(rng.random_range(0.4..1.2), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let s = SpectralMatrix::new(&a * a.adjoint() + diag).unwrap();
    let v = project_physical(&covariance_from_spectral(&s)).unwrap().matrix;
    let (beams, crosses) = SpectralMatrix::from_covariance(&v, 1e-8).unwrap().to_moments();
    (v, beams, crosses)
}

/// A random physical single-beam state without any symmetry, SA basis.
pub fn random_general(rng: &mut ChaCha8Rng) -> CovarianceMatrix {
    let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
    let m = &a * a.transpose() + DMatrix::identity(4, 4) * 0.3;
    let v = CovarianceMatrix::new(m, QuadratureBasis::SymAsymSA).unwrap();
    project_physical(&v).unwrap().matrix
}
