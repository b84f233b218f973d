//! `check`: physicality of a state and sideband entanglement witnesses.
//!
//! Per beam the witness is the smallest homodyne noise power over the LO
//! phase. Per pair it is the Duan sum `(S_{P∓} + S_{Q±})/2` of the
//! normalized spectral quadrature combinations `(P_i ∓ P_j)/√2` and
//! `(Q_i ± Q_j)/√2`, smaller of the two sign choices. Both are in SQL units
//! and witness entanglement below 1.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use sideband_core::detection::s_hd_general;
use sideband_core::io::{load_fixture, read_matrix, MatrixFile};
use sideband_core::modal::{
    build_stationary_covariance, check_physicality_with_tol, covariance_from_spectral, duan_witness,
};
use sideband_core::{CovarianceMatrix, QuadratureBasis, SpectralMatrix, StationaryBeamMoments};

use crate::{CheckArgs, Failure};

/// Smallest of `cos²φ A + sin²φ B + sin 2φ C` over `φ`.
fn min_homodyne(block: &CovarianceMatrix) -> sideband_core::Result<f64> {
    let a = s_hd_general(0.0, block)?;
    let b = s_hd_general(2.0 * FRAC_PI_4, block)?;
    let c = s_hd_general(FRAC_PI_4, block)? - 0.5 * (a + b);
    Ok(0.5 * (a + b) - (0.25 * (a - b) * (a - b) + c * c).sqrt())
}

fn pair_duan(s: &SpectralMatrix, i: usize, j: usize) -> f64 {
    let (pi, qi, pj, qj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
    let comb = |a: usize, b: usize, sign: f64| 0.5 * (s.get(a, a).re + s.get(b, b).re + 2.0 * sign * s.get(a, b).re);
    let epr = 0.5 * (comb(pi, pj, -1.0) + comb(qi, qj, 1.0));
    let anti = 0.5 * (comb(pi, pj, 1.0) + comb(qi, qj, -1.0));
    epr.min(anti)
}

pub fn run(a: &CheckArgs) -> Result<(), Failure> {
    let mut out = String::new();
    let (v, spectral, names) = if a.fixture {
        let f = load_fixture();
        let _ = writeln!(out, "source             embedded six-mode matrix");
        let names = sideband_core::io::fixture::BEAM_NAMES.map(String::from).to_vec();
        (f.covariance, Some(f.spectral), names)
    } else if let Some(m) = &a.moments {
        if m.len() != 4 {
            return Err(Failure::Rejected(format!("--moments needs alpha,beta,gamma,delta (got {} values)", m.len())));
        }
        let m = StationaryBeamMoments::new(m[0], m[1], m[2], m[3])?;
        let _ = writeln!(out, "source             single-beam moments");
        let s = sideband_core::modal::spectral_from_moments(&m);
        (build_stationary_covariance(&m, QuadratureBasis::SymAsymSA), Some(s), vec!["beam".to_string()])
    } else {
        let path = a.matrix.as_ref().expect("clap requires one source");
        let _ = writeln!(out, "source             {}", path.display());
        match read_matrix(path)? {
            MatrixFile::Spectral(s) => {
                let names = (0..s.beams()).map(|b| format!("beam{b}")).collect();
                (covariance_from_spectral(&s), Some(s), names)
            }
            MatrixFile::Covariance(v) => {
                let s = SpectralMatrix::from_covariance(&v, 1e-9).ok();
                let names = (0..v.beams().unwrap_or(0)).map(|b| format!("beam{b}")).collect();
                (v, s, names)
            }
        }
    };
    let _ = writeln!(out, "dimension          {} ({})", v.dim(), v.basis());
    if spectral.is_some() {
        let _ = writeln!(out, "hermitian          pass");
        let _ = writeln!(out, "stationary         yes");
    } else {
        let _ = writeln!(out, "stationary         no (pair witnesses need a stationary state)");
    }
    let r = check_physicality_with_tol(&v, a.tol)?;
    let nus: Vec<String> = r.symplectic_eigenvalues.iter().map(|x| format!("{x:.6}")).collect();
    let _ = writeln!(out, "symplectic eigs    {}", nus.join(" "));
    let _ = writeln!(out, "min symplectic     {:.6}", r.min_symplectic_eigenvalue);
    let _ = writeln!(out, "min eigenvalue     {:.6}", r.min_eigenvalue);
    let _ = writeln!(
        out,
        "physical           {} (tolerance {:e})",
        if r.pass { "pass" } else { "FAIL" },
        r.tolerance
    );

    // a witness below 1 means nothing for a state that is not physical
    let mark = |w: bool| match (r.pass, w) {
        (false, _) => "n/a (unphysical)",
        (true, true) => "entangled",
        (true, false) => "-",
    };
    if let Some(beams) = v.beams() {
        let _ = writeln!(out, "\nsideband entanglement (noise power below 1 witnesses)");
        for (b, name) in names.iter().enumerate().take(beams) {
            let s = min_homodyne(&v.beam_block(b)?)?;
            let w = duan_witness(s.max(0.0))?;
            let _ = writeln!(out, "{name:<12}  min S_HD {s:>9.4}  {}", mark(w));
        }
        if let Some(s) = &spectral {
            for i in 0..beams {
                for j in i + 1..beams {
                    let d = pair_duan(s, i, j);
                    let w = duan_witness(d.max(0.0))?;
                    let label = format!("{}:{}", names[i], names[j]);
                    let _ = writeln!(out, "{label:<12}  duan sum {d:>9.4}  {}", mark(w));
                }
            }
        }
    }
    crate::emit(&out);
    if r.pass {
        Ok(())
    } else {
        Err(Failure::Rejected(format!(
            "state is unphysical: minimum symplectic eigenvalue {:.6} < 1 - {:e}",
            r.min_symplectic_eigenvalue, a.tol
        )))
    }
}
