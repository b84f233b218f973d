//! Linear inversion of scan data into state moments.
//!
//! Every observable is linear in the moments: single-beam noise power in
//! `(α, β, γ, δ)` plus a known vacuum offset, two-beam correlations in the
//! eight cross moments with no offset. A scan therefore defines a design
//! matrix, and what the scan can and cannot reveal is its rank.

mod dataset;
mod fit;

pub use dataset::{ObservableKind, ScanDataset, ScanRecord};
pub use fit::{
    compare_models, fit_wls, fit_wls_with, identifiability, identifiability_with, project_fit, project_moments,
    Comparison, FitOptions, FitResult, Identifiability, Preferred, ProjectedMoments, DEFAULT_COMPARE_THRESHOLD,
};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::detection::{hd_cross, rd_cross, s_hd, MeasurementSetting};
use crate::cavity::TwoBeamCoefficientSet;
use crate::error::{Error, Result};
use crate::modal::{CrossMap, StationaryBeamMoments, TwoBeamCrossMoments};

/// Single-beam moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Moment {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl Moment {
    pub const ALL: [Moment; 4] = [Moment::Alpha, Moment::Beta, Moment::Gamma, Moment::Delta];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["alpha", "beta", "gamma", "delta"][self.index()]
    }

    /// The moment HD cannot see.
    pub fn is_hidden(self) -> bool {
        self == Moment::Delta
    }
}

/// Two-beam cross moment, in [`TwoBeamCrossMoments::to_array`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CrossMoment {
    Mu,
    Nu,
    Xi,
    Zeta,
    Kappa,
    Lambda,
    Tau,
    Eta,
}

impl CrossMoment {
    pub const ALL: [CrossMoment; 8] = [
        CrossMoment::Mu,
        CrossMoment::Nu,
        CrossMoment::Xi,
        CrossMoment::Zeta,
        CrossMoment::Kappa,
        CrossMoment::Lambda,
        CrossMoment::Tau,
        CrossMoment::Eta,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        TwoBeamCrossMoments::NAMES[self.index()]
    }

    /// Moments of the S–A cross sector, absent from in-phase HD correlations.
    pub fn is_hidden(self) -> bool {
        self.index() >= 4
    }
}

/// One unknown of the inverse problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Parameter {
    Beam { beam: usize, moment: Moment },
    Cross { pair: (usize, usize), moment: CrossMoment },
}

impl Parameter {
    pub fn beam(beam: usize, moment: Moment) -> Self {
        Parameter::Beam { beam, moment }
    }

    /// Cross parameter of the unordered pair `{i, j}`.
    pub fn cross(i: usize, j: usize, moment: CrossMoment) -> Self {
        Parameter::Cross {
            pair: (i.min(j), i.max(j)),
            moment,
        }
    }

    pub fn is_hidden(&self) -> bool {
        match self {
            Parameter::Beam { moment, .. } => moment.is_hidden(),
            Parameter::Cross { moment, .. } => moment.is_hidden(),
        }
    }

    /// `"pump.alpha"` or `"pump:signal.kappa"`; falls back to beam indices.
    pub fn name(&self, beams: &[String]) -> String {
        let label = |b: usize| beams.get(b).cloned().unwrap_or_else(|| b.to_string());
        match *self {
            Parameter::Beam { beam, moment } => format!("{}.{}", label(beam), moment.name()),
            Parameter::Cross { pair: (i, j), moment } => format!("{}:{}.{}", label(i), label(j), moment.name()),
        }
    }

    /// Value of this parameter in a set of moments (0 for missing pairs).
    pub fn value_in(&self, beams: &[StationaryBeamMoments], crosses: &CrossMap) -> Option<f64> {
        match *self {
            Parameter::Beam { beam, moment } => beams.get(beam).map(|m| m.to_array()[moment.index()]),
            Parameter::Cross { pair, moment } => {
                if pair.1 >= beams.len() {
                    return None;
                }
                Some(crosses.get(&pair).map_or(0.0, |x| x.to_array()[moment.index()]))
            }
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name(&[]))
    }
}

/// Free parameters of a fit; everything else, and the `fixed` set
/// explicitly, is held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    parameters: Vec<Parameter>,
    fixed: BTreeSet<Parameter>,
}

impl ModelSpec {
    pub fn new(parameters: Vec<Parameter>, fixed: BTreeSet<Parameter>) -> Result<Self> {
        if parameters.is_empty() {
            return Err(Error::Model("model has no free parameters".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &parameters {
            if !seen.insert(*p) {
                return Err(Error::Model(format!("parameter {p} listed twice")));
            }
            if fixed.contains(p) {
                return Err(Error::Model(format!("parameter {p} is both free and fixed")));
            }
            if let Parameter::Cross { pair: (i, j), .. } = p {
                if i == j {
                    return Err(Error::Model(format!("cross parameter {p} pairs a beam with itself")));
                }
            }
        }
        Ok(Self { parameters, fixed })
    }

    /// All four moments of every beam and all eight of every pair.
    pub fn full(beams: usize) -> Self {
        Self::build(beams, true)
    }

    /// Hidden moments (`δ`; `κ, λ, τ, η`) fixed at zero.
    pub fn no_hidden(beams: usize) -> Self {
        Self::build(beams, false)
    }

    fn build(beams: usize, hidden: bool) -> Self {
        let mut parameters = Vec::new();
        let mut fixed = BTreeSet::new();
        for b in 0..beams {
            for m in Moment::ALL {
                let p = Parameter::beam(b, m);
                if hidden || !m.is_hidden() {
                    parameters.push(p);
                } else {
                    fixed.insert(p);
                }
            }
        }
        for i in 0..beams {
            for j in i + 1..beams {
                for m in CrossMoment::ALL {
                    let p = Parameter::cross(i, j, m);
                    if hidden || !m.is_hidden() {
                        parameters.push(p);
                    } else {
                        fixed.insert(p);
                    }
                }
            }
        }
        Self { parameters, fixed }
    }

    /// Restricts a full or hidden-free model to the beams and pairs that
    /// `data` actually touches.
    pub fn for_dataset(data: &ScanDataset, hidden: bool) -> Result<Self> {
        let beams = data.beams_used();
        let pairs = data.pairs_used();
        let base = Self::build(data.beam_names.len(), hidden);
        let keep = |p: &Parameter| match p {
            Parameter::Beam { beam, .. } => beams.contains(beam),
            Parameter::Cross { pair, .. } => pairs.contains(pair),
        };
        let parameters = base.parameters.into_iter().filter(keep).collect();
        let fixed = base.fixed.into_iter().filter(keep).collect();
        Self::new(parameters, fixed)
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn fixed(&self) -> &BTreeSet<Parameter> {
        &self.fixed
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn position(&self, p: &Parameter) -> Option<usize> {
        self.parameters.iter().position(|q| q == p)
    }

    /// A nested model with `remove` moved to the fixed set.
    pub fn without(&self, remove: &[Parameter]) -> Result<Self> {
        let mut fixed = self.fixed.clone();
        for p in remove {
            if !self.parameters.contains(p) {
                return Err(Error::Model(format!("cannot fix {p}: not a free parameter")));
            }
            fixed.insert(*p);
        }
        let parameters = self.parameters.iter().copied().filter(|p| !remove.contains(p)).collect();
        Self::new(parameters, fixed)
    }

    /// True if every free parameter of `self` is free in `other`.
    pub fn is_nested_in(&self, other: &ModelSpec) -> bool {
        self.parameters.iter().all(|p| other.parameters.contains(p))
    }
}

/// Linear form of one record over the full moment set:
/// `value = beam_row · (α, β, γ, δ) + cross_row · (μ … η) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordForm {
    pub beam: Option<(usize, [f64; 4])>,
    pub cross: Option<((usize, usize), [f64; 8])>,
    pub offset: f64,
}

fn unit<const N: usize>(k: usize) -> [f64; N] {
    let mut e = [0.0; N];
    e[k] = 1.0;
    e
}

/// Linear form of a cross observable of settings `s1` (beam 1) and `s2`.
fn cross_form(s1: &MeasurementSetting, s2: &MeasurementSetting, kind: ObservableKind) -> Result<[f64; 8]> {
    let eval: Box<dyn Fn(&TwoBeamCrossMoments) -> (f64, f64)> = match (s1, s2) {
        (MeasurementSetting::Homodyne { lo_phase: p1 }, MeasurementSetting::Homodyne { lo_phase: p2 }) => {
            let (p1, p2) = (*p1, *p2);
            Box::new(move |x| hd_cross(p1, p2, x))
        }
        _ => {
            let t = TwoBeamCoefficientSet::from_gains(&s1.gains()?, &s2.gains()?);
            Box::new(move |x| rd_cross(&t, x))
        }
    };
    let mut row = [0.0; 8];
    for (k, r) in row.iter_mut().enumerate() {
        let (re, im) = eval(&TwoBeamCrossMoments::from_array(unit(k)));
        *r = if kind == ObservableKind::CrossIm { im } else { re };
    }
    Ok(row)
}

/// Linear form of `record`, with the vacuum offset separated.
pub fn record_form(record: &ScanRecord) -> Result<RecordForm> {
    match (record.kind, record.beam2) {
        (ObservableKind::NoisePower, None) => {
            let (row, offset) = match record.setting1 {
                MeasurementSetting::Homodyne { lo_phase } => {
                    let mut row = [0.0; 4];
                    for (k, r) in row.iter_mut().enumerate() {
                        *r = s_hd(lo_phase, &StationaryBeamMoments::from_array(unit(k)));
                    }
                    (row, 0.0)
                }
                MeasurementSetting::Resonator { .. } => {
                    let c = record.setting1.noise_coefficients()?;
                    (c.moment_row(), c.c_v)
                }
            };
            Ok(RecordForm {
                beam: Some((record.beam1, row)),
                cross: None,
                offset,
            })
        }
        (ObservableKind::CrossRe | ObservableKind::CrossIm, Some((b2, s2))) => {
            if b2 == record.beam1 {
                return Err(Error::Incompatible(format!("cross record pairs beam {b2} with itself")));
            }
            // ⟨J₂ J₁*⟩ = ⟨J₁ J₂*⟩*, so a reversed pair flips the imaginary part
            let (pair, row) = if record.beam1 < b2 {
                ((record.beam1, b2), cross_form(&record.setting1, &s2, record.kind)?)
            } else {
                let mut row = cross_form(&s2, &record.setting1, record.kind)?;
                if record.kind == ObservableKind::CrossIm {
                    row.iter_mut().for_each(|r| *r = -*r);
                }
                ((b2, record.beam1), row)
            };
            Ok(RecordForm {
                beam: None,
                cross: Some((pair, row)),
                offset: 0.0,
            })
        }
        (kind, _) => Err(Error::Incompatible(format!(
            "{kind} record needs {} beam(s)",
            if kind == ObservableKind::NoisePower { 1 } else { 2 }
        ))),
    }
}

/// Row over `model`'s parameters and the known offset, so that
/// `prediction = row · θ + offset`.
pub fn design_row(record: &ScanRecord, model: &ModelSpec) -> Result<(Vec<f64>, f64)> {
    let form = record_form(record)?;
    let row = model
        .parameters()
        .iter()
        .map(|p| match (*p, form.beam, form.cross) {
            (Parameter::Beam { beam, moment }, Some((b, r)), _) if beam == b => r[moment.index()],
            (Parameter::Cross { pair, moment }, _, Some((q, r))) if pair == q => r[moment.index()],
            _ => 0.0,
        })
        .collect();
    Ok((row, form.offset))
}

/// Noise-free prediction of `record` for a multi-beam state.
pub fn predict_record(record: &ScanRecord, beams: &[StationaryBeamMoments], crosses: &CrossMap) -> Result<f64> {
    let form = record_form(record)?;
    let mut value = form.offset;
    if let Some((b, row)) = form.beam {
        let m = beams.get(b).ok_or_else(|| Error::Incompatible(format!("no moments for beam {b}")))?;
        value += row.iter().zip(m.to_array()).map(|(r, x)| r * x).sum::<f64>();
    }
    if let Some((pair, row)) = form.cross {
        let x = crosses.get(&pair).ok_or(Error::MissingPair(pair.0, pair.1))?;
        value += row.iter().zip(x.to_array()).map(|(r, x)| r * x).sum::<f64>();
    }
    Ok(value)
}
