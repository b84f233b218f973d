//! Monte-Carlo photocurrent oracle.
//!
//! Works directly from the sideband amplitudes: the demodulated photocurrent
//! of a beam is `J = A a_u + B a_ℓ* + C b_u + D b_ℓ*`, where `a_u`, `a_ℓ` are
//! the reflected upper/lower sidebands (`a = (p + i q)/2`), `b` are the
//! vacuum modes transmitted into the detection path, and for a cavity
//!
//! ```text
//! A = u* r(Δ+Ω), B = u r*(Δ−Ω), C = u* t(Δ+Ω), D = u t(Δ−Ω)
//! ```
//!
//! with `u = r(Δ)/|r(Δ)|` and `t = √(1−|r|²)`. Homodyne detection is
//! `A = e^{−iφ}`, `B = e^{iφ}`, `C = D = 0`. None of the analytic
//! coefficient machinery is used here.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{CrossEstimate, Estimate, MeasurementSetting, PhotocurrentStats};
use crate::cavity::reflection;
use crate::error::{Error, Result};
use crate::modal::{change_basis, check_physicality, CovarianceMatrix, QuadratureBasis};

/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;

/// Samples per RNG stream. Block `k` draws from stream `k` of the seeded
/// generator, so results do not depend on the number of worker threads.
pub const BLOCK_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy)]
struct Amplitudes {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

fn amplitudes(setting: &MeasurementSetting) -> Result<Amplitudes> {
    match *setting {
        MeasurementSetting::Homodyne { lo_phase } => {
            if !lo_phase.is_finite() {
                return Err(Error::NonFinite("LO phase"));
            }
            let zero = Complex64::new(0.0, 0.0);
            Ok(Amplitudes {
                a: Complex64::from_polar(1.0, -lo_phase),
                b: Complex64::from_polar(1.0, lo_phase),
                c: zero,
                d: zero,
            })
        }
        MeasurementSetting::Resonator { cavity, detuning } => {
            cavity.validate()?;
            let r0 = reflection(cavity.d, detuning)?;
            if r0.norm() == 0.0 {
                return Err(Error::SingularReflection);
            }
            let u = r0 / r0.norm();
            let rp = reflection(cavity.d, detuning + cavity.omega_ratio)?;
            let rm = reflection(cavity.d, detuning - cavity.omega_ratio)?;
            let t = |r: Complex64| (1.0 - r.norm_sqr()).max(0.0).sqrt();
            Ok(Amplitudes {
                a: u.conj() * rp,
                b: u * rm.conj(),
                c: u.conj() * t(rp),
                d: u * t(rm),
            })
        }
    }
}

/// Running sums of one block.
#[derive(Debug, Clone)]
struct Sums {
    power: Vec<[f64; 2]>,
    cross: Vec<[f64; 4]>,
}

impl Sums {
    fn new(beams: usize) -> Self {
        Self {
            power: vec![[0.0; 2]; beams],
            cross: vec![[0.0; 4]; beams * beams.saturating_sub(1) / 2],
        }
    }

    fn add(&mut self, other: &Sums) {
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            a[0] += b[0];
            a[1] += b[1];
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            for k in 0..4 {
                a[k] += b[k];
            }
        }
    }
}

/// Sample mean and standard error from `Σx` and `Σx²`.
fn estimate(sum: f64, sum_sq: f64, n: usize) -> Estimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Estimate {
        value: mean,
        std_error: (var / nf).sqrt(),
    }
}

/// Estimates noise powers and pairwise correlations from `n` joint Gaussian
/// draws of the state `v` (any basis, `4·beams` square) with one detection
/// setting per beam. Deterministic in `seed`.
pub fn mc_sample(v: &CovarianceMatrix, settings: &[MeasurementSetting], n: usize, seed: u64) -> Result<PhotocurrentStats> {
    if n < MIN_SAMPLES {
        return Err(Error::OutOfRange {
            name: "sample count",
            value: n as f64,
            range: "[1000, inf)",
        });
    }
    let beams = v.beams().filter(|&b| b == settings.len()).ok_or_else(|| {
        Error::Incompatible(format!(
            "{} settings for a covariance of dimension {}",
            settings.len(),
            v.dim()
        ))
    })?;
    let lu = change_basis(v, QuadratureBasis::SidebandLU)?;
    let chol = Cholesky::new(lu.matrix().clone()).ok_or_else(|| {
        let min = check_physicality(&lu).map(|r| r.min_symplectic_eigenvalue).unwrap_or(0.0);
        Error::Unphysical {
            min_symplectic_eigenvalue: min,
        }
    })?;
    let l = chol.l();
    let amps = settings.iter().map(amplitudes).collect::<Result<Vec<_>>>()?;

    let blocks = n.div_ceil(BLOCK_SAMPLES);
    let partial: Vec<Sums> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let len = BLOCK_SAMPLES.min(n - k * BLOCK_SAMPLES);
            run_block(&l, &amps, beams, len, seed, k as u64)
        })
        .collect();
    let mut total = Sums::new(beams);
    for s in &partial {
        total.add(s);
    }

    let mut stats = PhotocurrentStats {
        samples: n,
        ..Default::default()
    };
    for p in &total.power {
        stats.noise_power.push(estimate(p[0], p[1], n));
    }
    let mut k = 0;
    for i in 0..beams {
        for j in i + 1..beams {
            let c = total.cross[k];
            stats.cross.insert(
                (i, j),
                CrossEstimate {
                    re: estimate(c[0], c[1], n),
                    im: estimate(c[2], c[3], n),
                },
            );
            k += 1;
        }
    }
    Ok(stats)
}

fn run_block(l: &DMatrix<f64>, amps: &[Amplitudes], beams: usize, len: usize, seed: u64, stream: u64) -> Sums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dim = l.nrows();
    let half = 2 * beams;
    let mut sums = Sums::new(beams);
    let mut z = DVector::<f64>::zeros(dim);
    let mut x = DVector::<f64>::zeros(dim);
    let mut j = vec![Complex64::new(0.0, 0.0); beams];
    for _ in 0..len {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        x.gemv(1.0, l, &z, 0.0);
        for (b, amp) in amps.iter().enumerate() {
            let a_l = Complex64::new(x[2 * b], x[2 * b + 1]) * 0.5;
            let a_u = Complex64::new(x[half + 2 * b], x[half + 2 * b + 1]) * 0.5;
            // vacuum ancillas: a fresh standard normal per quadrature
            let mut vac = [0.0; 4];
            for q in vac.iter_mut() {
                *q = StandardNormal.sample(&mut rng);
            }
            let b_u = Complex64::new(vac[0], vac[1]) * 0.5;
            let b_l = Complex64::new(vac[2], vac[3]) * 0.5;
            j[b] = amp.a * a_u + amp.b * a_l.conj() + amp.c * b_u + amp.d * b_l.conj();
        }
        for (b, p) in sums.power.iter_mut().enumerate() {
            let s = j[b].norm_sqr();
            p[0] += s;
            p[1] += s * s;
        }
        let mut k = 0;
        for a in 0..beams {
            for b in a + 1..beams {
                let c = j[a] * j[b].conj();
                let e = &mut sums.cross[k];
                e[0] += c.re;
                e[1] += c.re * c.re;
                e[2] += c.im;
                e[3] += c.im * c.im;
                k += 1;
            }
        }
    }
    sums
}
