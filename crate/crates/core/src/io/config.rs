//! Experiment configuration (JSON).
//!
//! Physical units appear only here: cavity bandwidths and the analysis
//! frequency are given in MHz and converted once to `Ω/γ`. Detuning grids
//! are already in units of the cavity bandwidth.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fixture;
use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::modal::{CrossMap, StationaryBeamMoments, TwoBeamCrossMoments};
use crate::reconstruction::ObservableKind;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Hd,
    Rd,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Hd => "hd",
            Scheme::Rd => "rd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub d: f64,
    pub bandwidth_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub name: String,
    pub cavity: CavityConfig,
    pub scheme: Scheme,
    /// Ground truth for synthesis; not needed for fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<StationaryBeamMoments>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossConfig {
    pub beams: [String; 2],
    #[serde(default)]
    pub moments: TwoBeamCrossMoments,
}

/// `count` equally spaced points from `min` to `max`, with `max` itself
/// included iff `endpoint`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "yes")]
    pub endpoint: bool,
}

fn yes() -> bool {
    true
}

impl GridSpec {
    pub fn detuning_default() -> Self {
        Self {
            min: -5.0,
            max: 5.0,
            count: 450,
            endpoint: true,
        }
    }

    pub fn phase_default() -> Self {
        Self {
            min: 0.0,
            max: PI,
            count: 450,
            endpoint: false,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let steps = if self.endpoint { self.count - 1 } else { self.count } as f64;
        (0..self.count)
            .map(|k| self.min + (self.max - self.min) * k as f64 / steps)
            .collect()
    }

    fn check(&self, what: &str, errors: &mut Vec<String>) {
        if self.count < 2 {
            errors.push(format!("{what}.count must be at least 2 (got {})", self.count));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            errors.push(format!("{what} needs finite min < max (got {} .. {})", self.min, self.max));
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::detuning_default()
    }
}

/// `x₂ = a·x₁ + b`: how the second beam of a pair follows the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap {
    pub a: f64,
    pub b: f64,
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    /// Phase map default: `φ₂ = 2φ₁`. Equal phases would leave `ξ` and `ζ`
    /// entering every in-phase correlation only through their sum.
    pub fn phase_default() -> Self {
        Self { a: 2.0, b: 0.0 }
    }
}

fn default_analysis() -> f64 {
    21.0
}
fn default_sigma() -> f64 {
    0.01
}
fn default_tol() -> f64 {
    crate::modal::DEFAULT_PHYSICALITY_TOL
}
fn default_kinds() -> Vec<ObservableKind> {
    vec![ObservableKind::CrossRe, ObservableKind::CrossIm]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_analysis")]
    pub analysis_frequency_mhz: f64,
    pub beams: Vec<BeamConfig>,
    #[serde(default)]
    pub crosses: Vec<CrossConfig>,
    /// Detuning grid for RD scans, units of the cavity bandwidth.
    #[serde(default = "GridSpec::detuning_default")]
    pub grid: GridSpec,
    /// LO phase grid for HD scans, radians.
    #[serde(default = "GridSpec::phase_default")]
    pub phase_grid: GridSpec,
    #[serde(default = "AffineMap::identity")]
    pub detuning_map: AffineMap,
    #[serde(default = "AffineMap::phase_default")]
    pub phase_map: AffineMap,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Slack below 1 accepted for the smallest symplectic eigenvalue of the
    /// ground truth.
    #[serde(default = "default_tol")]
    pub physicality_tolerance: f64,
    /// Correlation observables recorded for each pair.
    #[serde(default = "default_kinds")]
    pub pair_kinds: Vec<ObservableKind>,
}

impl ExperimentConfig {
    /// The three-beam OPO experiment: fixture moments as ground truth,
    /// 12 MHz cavities with `d = 0.85`, analysis at 21 MHz.
    pub fn reference_default() -> Self {
        let (beams, crosses) = fixture::fixture_moments();
        let names = fixture::BEAM_NAMES;
        Self {
            schema_version: SCHEMA_VERSION,
            analysis_frequency_mhz: 21.0,
            beams: names
                .iter()
                .zip(beams)
                .map(|(n, m)| BeamConfig {
                    name: n.to_string(),
                    cavity: CavityConfig {
                        d: 0.85,
                        bandwidth_mhz: 12.0,
                    },
                    scheme: Scheme::Rd,
                    moments: Some(m),
                })
                .collect(),
            crosses: crosses
                .iter()
                .map(|(&(i, j), x)| CrossConfig {
                    beams: [names[i].to_string(), names[j].to_string()],
                    moments: *x,
                })
                .collect(),
            grid: GridSpec::detuning_default(),
            phase_grid: GridSpec::phase_default(),
            detuning_map: AffineMap::identity(),
            phase_map: AffineMap::phase_default(),
            noise_sigma: 0.01,
            seed: 1,
            // the tabulated matrix sits slightly outside the physical set
            physicality_tolerance: 0.01,
            pair_kinds: default_kinds(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything and reports every violation at once.
    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            e.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.analysis_frequency_mhz > 0.0) || !self.analysis_frequency_mhz.is_finite() {
            e.push(format!(
                "analysis_frequency_mhz must be positive (got {})",
                self.analysis_frequency_mhz
            ));
        }
        if self.beams.is_empty() {
            e.push("beams: at least one beam is required".into());
        }
        let mut names = BTreeSet::new();
        for (k, b) in self.beams.iter().enumerate() {
            let at = format!("beams[{k}]");
            if b.name.is_empty() || b.name.contains([',', ':', '.', '"']) || b.name.trim() != b.name {
                e.push(format!("{at}.name {:?} must be non-empty without , : . or surrounding spaces", b.name));
            }
            if !names.insert(b.name.as_str()) {
                e.push(format!("{at}.name {:?} is used twice", b.name));
            }
            if !(0.0..=1.0).contains(&b.cavity.d) {
                e.push(format!("{at}.cavity.d must lie in [0, 1] (got {})", b.cavity.d));
            }
            if !(b.cavity.bandwidth_mhz > 0.0) || !b.cavity.bandwidth_mhz.is_finite() {
                e.push(format!("{at}.cavity.bandwidth_mhz must be positive (got {})", b.cavity.bandwidth_mhz));
            }
            if let Some(m) = &b.moments {
                if let Err(err) = m.validate() {
                    e.push(format!("{at}.moments: {err}"));
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for (k, c) in self.crosses.iter().enumerate() {
            let at = format!("crosses[{k}]");
            let idx: Vec<Option<usize>> = c.beams.iter().map(|n| self.beam_index(n)).collect();
            for (n, i) in c.beams.iter().zip(&idx) {
                if i.is_none() {
                    e.push(format!("{at}: unknown beam {n:?}"));
                }
            }
            if let [Some(i), Some(j)] = idx[..] {
                if i == j {
                    e.push(format!("{at}: pairs beam {:?} with itself", c.beams[0]));
                } else {
                    if !pairs.insert((i.min(j), i.max(j))) {
                        e.push(format!("{at}: pair {:?} declared twice", c.beams));
                    }
                    if self.beams[i].scheme != self.beams[j].scheme {
                        e.push(format!("{at}: beams of a pair must share a detection scheme"));
                    }
                }
            }
            if c.moments.to_array().iter().any(|x| !x.is_finite()) {
                e.push(format!("{at}.moments must be finite"));
            }
        }
        self.grid.check("grid", &mut e);
        self.phase_grid.check("phase_grid", &mut e);
        for (what, m) in [("detuning_map", self.detuning_map), ("phase_map", self.phase_map)] {
            if !m.a.is_finite() || !m.b.is_finite() {
                e.push(format!("{what} coefficients must be finite"));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            e.push(format!("noise_sigma must be >= 0 (got {})", self.noise_sigma));
        }
        if !(self.physicality_tolerance >= 0.0) {
            e.push(format!(
                "physicality_tolerance must be >= 0 (got {})",
                self.physicality_tolerance
            ));
        }
        if self.pair_kinds.is_empty() && !self.crosses.is_empty() {
            e.push("pair_kinds must list at least one of cross_re, cross_im".into());
        }
        if self.pair_kinds.contains(&ObservableKind::NoisePower) {
            e.push("pair_kinds may only contain cross_re and cross_im".into());
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(e))
        }
    }

    pub fn beam_names(&self) -> Vec<String> {
        self.beams.iter().map(|b| b.name.clone()).collect()
    }

    pub fn beam_index(&self, name: &str) -> Option<usize> {
        self.beams.iter().position(|b| b.name == name)
    }

    /// `d` and `Ω/γ` of beam `k`'s cavity.
    pub fn cavity_params(&self, k: usize) -> CavityParams {
        let c = self.beams[k].cavity;
        CavityParams {
            d: c.d,
            omega_ratio: self.analysis_frequency_mhz / c.bandwidth_mhz,
        }
    }

    /// Cavities by beam name, for resolving RD records of scan files.
    pub fn cavity_map(&self) -> BTreeMap<String, CavityParams> {
        (0..self.beams.len())
            .map(|k| (self.beams[k].name.clone(), self.cavity_params(k)))
            .collect()
    }

    /// Ground-truth moments; undeclared pairs are uncorrelated.
    pub fn truth(&self) -> Result<(Vec<StationaryBeamMoments>, CrossMap)> {
        let mut missing = Vec::new();
        let beams: Vec<StationaryBeamMoments> = self
            .beams
            .iter()
            .map(|b| {
                b.moments.unwrap_or_else(|| {
                    missing.push(format!("beam {:?} has no moments (needed for synthesis)", b.name));
                    StationaryBeamMoments::vacuum()
                })
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(missing));
        }
        let n = beams.len();
        let mut crosses: CrossMap = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| ((i, j), TwoBeamCrossMoments::default())))
            .collect();
        for c in &self.crosses {
            let i = self.beam_index(&c.beams[0]).expect("validated");
            let j = self.beam_index(&c.beams[1]).expect("validated");
            let x = if i < j { c.moments } else { c.moments.swapped() };
            crosses.insert((i.min(j), i.max(j)), x);
        }
        Ok((beams, crosses))
    }

    /// Declared pairs as ordered `(i < j)` indices, in declaration order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.crosses
            .iter()
            .map(|c| {
                let i = self.beam_index(&c.beams[0]).expect("validated");
                let j = self.beam_index(&c.beams[1]).expect("validated");
                (i.min(j), i.max(j))
            })
            .collect()
    }
}
