use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::CovarianceMatrix;
use crate::error::{Error, Result};

/// Default slack below 1 accepted for the smallest symplectic eigenvalue.
pub const DEFAULT_PHYSICALITY_TOL: f64 = 1e-9;

/// Outcome of the uncertainty-principle check `V + iΩ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalityReport {
    /// One value per mode, ascending. Empty if `V` is not positive definite.
    pub symplectic_eigenvalues: Vec<f64>,
    /// Zero when `V` is not positive definite.
    pub min_symplectic_eigenvalue: f64,
    /// Smallest ordinary eigenvalue of `V`.
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Result of [`project_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub matrix: CovarianceMatrix,
    /// Frobenius distance between input and output.
    pub distance: f64,
    pub report: PhysicalityReport,
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]` over consecutive `(p, q)` pairs.
fn omega(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    for k in (0..n).step_by(2) {
        w[(k, k + 1)] = 1.0;
        w[(k + 1, k)] = -1.0;
    }
    w
}

fn sqrt_psd(e: &SymmetricEigen<f64, nalgebra::Dyn>) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| x.max(0.0).sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// `K = V^{1/2} Ω V^{1/2}` and the eigen-decomposition of the Hermitian
/// `iK`, whose eigenvalues are `±ν` for each symplectic eigenvalue `ν`.
/// Working with `iK` rather than `K Kᵀ` keeps small `ν` accurate.
struct Decomposition {
    root: DMatrix<f64>,
    ik: SymmetricEigen<Complex64, nalgebra::Dyn>,
    min_eigenvalue: f64,
}

fn decompose(v: &CovarianceMatrix) -> Option<Decomposition> {
    let n = v.dim();
    let e = SymmetricEigen::new(v.matrix().clone());
    let min_eigenvalue = e.eigenvalues.min();
    if min_eigenvalue <= 0.0 {
        return None;
    }
    let root = sqrt_psd(&e);
    let k = &root * omega(n) * &root;
    let ik = SymmetricEigen::new(k.map(|x| Complex64::new(0.0, x)));
    Some(Decomposition {
        root,
        ik,
        min_eigenvalue,
    })
}

fn paired_values(ik: &SymmetricEigen<Complex64, nalgebra::Dyn>) -> Vec<f64> {
    let mut nu: Vec<f64> = ik.eigenvalues.iter().map(|x| x.abs()).collect();
    nu.sort_by(f64::total_cmp);
    nu.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// Symplectic eigenvalues of `V`, ascending, one per mode (vacuum: all 1).
///
/// Fails unless `V` is positive definite.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let d = decompose(v).ok_or_else(|| Error::Numerical("covariance matrix is not positive definite".into()))?;
    Ok(paired_values(&d.ik))
}

pub fn check_physicality(v: &CovarianceMatrix) -> Result<PhysicalityReport> {
    check_physicality_with_tol(v, DEFAULT_PHYSICALITY_TOL)
}

/// Passes iff the smallest symplectic eigenvalue is at least `1 − tol`.
pub fn check_physicality_with_tol(v: &CovarianceMatrix, tol: f64) -> Result<PhysicalityReport> {
    if !(tol >= 0.0) {
        return Err(Error::OutOfRange {
            name: "physicality tolerance",
            value: tol,
            range: "[0, inf)",
        });
    }
    Ok(match decompose(v) {
        Some(d) => {
            let nu = paired_values(&d.ik);
            let min = nu[0];
            PhysicalityReport {
                symplectic_eigenvalues: nu,
                min_symplectic_eigenvalue: min,
                min_eigenvalue: d.min_eigenvalue,
                tolerance: tol,
                pass: min >= 1.0 - tol,
            }
        }
        None => PhysicalityReport {
            symplectic_eigenvalues: Vec::new(),
            min_symplectic_eigenvalue: 0.0,
            min_eigenvalue: SymmetricEigen::new(v.matrix().clone()).eigenvalues.min(),
            tolerance: tol,
            pass: false,
        },
    })
}

/// Nearest physical state by clipping symplectic eigenvalues below 1.
///
/// With `K = V^{1/2} Ω V^{1/2}` and `|K| = E diag(ν) E†`, the output is
/// `V^{1/2} E diag(max(ν, 1)/ν) E† V^{1/2}`, which equals the Williamson
/// form `S max(D, 1) Sᵀ` without constructing `S`. Physical input is
/// returned unchanged. A matrix that is not positive definite first has its
/// ordinary eigenvalues raised to a small positive floor.
pub fn project_physical(v: &CovarianceMatrix) -> Result<Projection> {
    let n = v.dim();
    let floored;
    let src = if decompose(v).is_some() {
        v
    } else {
        let e = SymmetricEigen::new(v.matrix().clone());
        let floor = 1e-6 * e.eigenvalues.amax().max(1.0);
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| x.max(floor)));
        floored = CovarianceMatrix::from_parts_unchecked(&e.eigenvectors * d * e.eigenvectors.transpose(), v.basis());
        &floored
    };
    let d = decompose(src).ok_or_else(|| Error::Numerical("eigenvalue floor failed to make V positive definite".into()))?;
    let nu = paired_values(&d.ik);
    let out = if nu[0] >= 1.0 && std::ptr::eq(src, v) {
        v.clone()
    } else {
        let h = d.ik.eigenvalues.map(|x| if x.abs() >= 1.0 { 1.0 } else { 1.0 / x.abs() });
        let e = &d.ik.eigenvectors;
        let scaled = DMatrix::from_fn(n, n, |i, k| e[(i, k)] * h[k]);
        // real in exact arithmetic: the ±ν eigenvectors are complex conjugates
        let f = (scaled * e.adjoint()).map(|z| z.re);
        let m = &d.root * f * &d.root;
        let m = (&m + m.transpose()) * 0.5;
        CovarianceMatrix::from_parts_unchecked(m, v.basis())
    };
    debug_assert_eq!(out.dim(), n);
    let distance = (out.matrix() - v.matrix()).norm();
    let report = check_physicality(&out)?;
    Ok(Projection {
        matrix: out,
        distance,
        report,
    })
}
