//! Spectral homodyne (HD) and resonator (RD) detection of Gaussian sideband states.
//!
//! A beam analysed at frequency Ω carries two longitudinal modes, the upper and
//! lower sidebands at ω₀ ± Ω. Their symmetric/anti-symmetric combinations (S/A)
//! are the natural modes of homodyne detection. A stationary single-beam state
//! is fixed by four moments `α, β, γ, δ`; HD is blind to `δ` (the sideband
//! energy imbalance) while RD, which reflects the beam off a detuned cavity
//! before detection, sees all four.
//!
//! The crate is organised as
//!
//! * [`modal`]: covariance and spectral matrices, basis changes, physicality.
//! * [`cavity`]: reflection response and detuning-dependent noise coefficients.
//! * [`detection`]: forward models for noise power and two-beam correlations,
//!   phase mixing, and a Monte-Carlo sampling oracle.
//! * [`reconstruction`]: weighted least squares, identifiability and nested
//!   model comparison.
//! * [`io`]: experiment configuration, scan CSV files, synthetic scans and the
//!   embedded six-mode OPO fixture.
//!
//! All second moments are in units of the standard quantum level (SQL): the
//! vacuum quadrature variance is 1 (`[p, q] = 2i`).

pub mod cavity;
pub mod detection;
pub mod error;
pub mod io;
pub mod modal;
pub mod reconstruction;

pub use cavity::{CavityParams, CoefficientSet, SidebandGains, TwoBeamCoefficientSet};
pub use detection::{MeasurementSetting, PhotocurrentStats};
pub use error::{Error, Result};
pub use modal::{
    CovarianceMatrix, PhysicalityReport, QuadratureBasis, SpectralMatrix, StationaryBeamMoments,
    TwoBeamCrossMoments,
};
pub use num_complex::Complex64;
pub use reconstruction::{FitResult, ModelSpec, Parameter};
