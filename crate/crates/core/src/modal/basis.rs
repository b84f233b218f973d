use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::CovarianceMatrix;
use crate::error::{Error, Result};

/// Modal basis of a covariance matrix. See the module docs for the ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureBasis {
    /// Lower/upper sideband modes, `(p_ℓ, q_ℓ, p_u, q_u)` per beam.
    SidebandLU,
    /// Symmetric/anti-symmetric modes, `(p_s, q_s, p_a, q_a)` per beam.
    SymAsymSA,
    /// S/A with the anti-symmetric mode rotated by π/2: `p_a' = q_a`,
    /// `q_a' = −p_a`. This is the layout of a covariance built from a
    /// spectral matrix.
    SymAsymPrimed,
}

impl QuadratureBasis {
    pub fn tag(self) -> &'static str {
        match self {
            QuadratureBasis::SidebandLU => "SidebandLU",
            QuadratureBasis::SymAsymSA => "SymAsymSA",
            QuadratureBasis::SymAsymPrimed => "SymAsymPrimed",
        }
    }

    /// Quadrature labels, e.g. `p_s1`, in storage order for `beams` beams.
    pub fn labels(self, beams: usize) -> Vec<String> {
        let (first, second) = match self {
            QuadratureBasis::SidebandLU => ("l", "u"),
            QuadratureBasis::SymAsymSA => ("s", "a"),
            QuadratureBasis::SymAsymPrimed => ("s", "a'"),
        };
        let mut out = Vec::with_capacity(4 * beams);
        for sector in [first, second] {
            for b in 0..beams {
                out.push(format!("p_{sector}{b}"));
                out.push(format!("q_{sector}{b}"));
            }
        }
        out
    }

    /// Orthogonal map `T` with `X_self = T · X_sa`.
    fn from_sa(self, beams: usize) -> DMatrix<f64> {
        let half = 2 * beams;
        let n = 2 * half;
        match self {
            QuadratureBasis::SymAsymSA => DMatrix::identity(n, n),
            QuadratureBasis::SidebandLU => {
                // ℓ = (s − a)/√2, u = (s + a)/√2
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let mut t = DMatrix::zeros(n, n);
                for i in 0..half {
                    t[(i, i)] = h;
                    t[(i, half + i)] = -h;
                    t[(half + i, i)] = h;
                    t[(half + i, half + i)] = h;
                }
                t
            }
            QuadratureBasis::SymAsymPrimed => {
                let mut t = DMatrix::identity(n, n);
                for b in 0..beams {
                    let p = half + 2 * b;
                    t[(p, p)] = 0.0;
                    t[(p + 1, p + 1)] = 0.0;
                    t[(p, p + 1)] = 1.0;
                    t[(p + 1, p)] = -1.0;
                }
                t
            }
        }
    }
}

impl fmt::Display for QuadratureBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for QuadratureBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "SidebandLU" => Ok(QuadratureBasis::SidebandLU),
            "SymAsymSA" => Ok(QuadratureBasis::SymAsymSA),
            "SymAsymPrimed" => Ok(QuadratureBasis::SymAsymPrimed),
            other => Err(Error::Incompatible(format!("unknown basis tag {other:?}"))),
        }
    }
}

/// Re-expresses `v` in `target` by an orthogonal congruence `T V Tᵀ`.
///
/// The transform only mixes `p` with `p` and `q` with `q` (or is a local
/// π/2 rotation), so it is also symplectic: symplectic eigenvalues and the
/// determinant are preserved.
pub fn change_basis(v: &CovarianceMatrix, target: QuadratureBasis) -> Result<CovarianceMatrix> {
    let beams = v.beams().ok_or(Error::Dimension {
        found: v.dim(),
        expected: "a multiple of 4 (paired sidebands)",
    })?;
    if v.basis() == target {
        return Ok(v.clone());
    }
    let t = target.from_sa(beams) * v.basis().from_sa(beams).transpose();
    let m = &t * v.matrix() * t.transpose();
    Ok(CovarianceMatrix::from_parts_unchecked(m, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::{build_stationary_covariance, symplectic_eigenvalues, StationaryBeamMoments};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Sideband covariance computed element by element from the definitions
    /// `p_u = (p_s + p_a)/√2`, `p_ℓ = (p_s − p_a)/√2`.
    fn lu_oracle(sa: &DMatrix<f64>) -> DMatrix<f64> {
        // rows: p_l, q_l, p_u, q_u as coefficient vectors over (p_s, q_s, p_a, q_a)
        let rows = [
            [H, 0.0, -H, 0.0],
            [0.0, H, 0.0, -H],
            [H, 0.0, H, 0.0],
            [0.0, H, 0.0, H],
        ];
        DMatrix::from_fn(4, 4, |i, j| {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    acc += rows[i][k] * sa[(k, l)] * rows[j][l];
                }
            }
            acc
        })
    }

    #[test]
    fn identity_is_fixed() {
        let id = CovarianceMatrix::identity(4, QuadratureBasis::SymAsymSA);
        for target in [QuadratureBasis::SidebandLU, QuadratureBasis::SymAsymPrimed] {
            let out = change_basis(&id, target).unwrap();
            assert_abs_diff_eq!((out.matrix() - DMatrix::<f64>::identity(8, 8)).amax(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn delta_sign_convention_is_upper_minus_lower() {
        let m = StationaryBeamMoments::new(2.0, 1.0, 0.0, 0.5).unwrap();
        let sa = build_stationary_covariance(&m, QuadratureBasis::SymAsymSA);
        let lu = change_basis(&sa, QuadratureBasis::SidebandLU).unwrap();
        let oracle = lu_oracle(sa.matrix());
        assert_abs_diff_eq!((lu.matrix() - &oracle).amax(), 0.0, epsilon = 1e-14);
        let lower = lu.get(0, 0) + lu.get(1, 1);
        let upper = lu.get(2, 2) + lu.get(3, 3);
        assert_abs_diff_eq!((upper - lower) / 2.0, 2.0 * m.delta, epsilon = 1e-14);
    }

    #[test]
    fn odd_beam_dimension_rejected() {
        let v = CovarianceMatrix::identity(3, QuadratureBasis::SymAsymSA);
        assert!(change_basis(&v, QuadratureBasis::SidebandLU).is_err());
    }

    fn arb_physical(beams: usize) -> impl Strategy<Value = DMatrix<f64>> {
        let n = 4 * beams;
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |xs| {
            let b = DMatrix::from_vec(n, n, xs);
            DMatrix::identity(n, n) + &b * b.transpose()
        })
    }

    proptest! {
        #[test]
        fn round_trips_and_preserves_invariants(m in arb_physical(2)) {
            let v = CovarianceMatrix::new(m, QuadratureBasis::SymAsymSA).unwrap();
            let nu0 = symplectic_eigenvalues(&v).unwrap();
            let det0 = v.matrix().determinant();
            for target in [QuadratureBasis::SidebandLU, QuadratureBasis::SymAsymPrimed] {
                let w = change_basis(&v, target).unwrap();
                let back = change_basis(&w, QuadratureBasis::SymAsymSA).unwrap();
                prop_assert!(back.max_abs_diff(&v) < 1e-12);
                let det = w.matrix().determinant();
                prop_assert!((det - det0).abs() <= 1e-10 * det0.abs().max(1.0));
                let nu = symplectic_eigenvalues(&w).unwrap();
                for (a, b) in nu.iter().zip(&nu0) {
                    prop_assert!((a - b).abs() < 1e-10);
                }
            }
            let lu = change_basis(&v, QuadratureBasis::SidebandLU).unwrap();
            let primed = change_basis(&lu, QuadratureBasis::SymAsymPrimed).unwrap();
            let lu2 = change_basis(&primed, QuadratureBasis::SidebandLU).unwrap();
            prop_assert!(lu2.max_abs_diff(&lu) < 1e-12);
        }
    }
}
