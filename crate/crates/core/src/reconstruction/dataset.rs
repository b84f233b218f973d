use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detection::MeasurementSetting;
use crate::error::{Error, Result};

/// What a scan record measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    /// Single-beam noise power `⟨|J|²⟩`.
    #[serde(rename = "noise")]
    NoisePower,
    /// `Re ⟨J₁ J₂*⟩`.
    #[serde(rename = "cross_re")]
    CrossRe,
    /// `Im ⟨J₁ J₂*⟩`.
    #[serde(rename = "cross_im")]
    CrossIm,
}

impl ObservableKind {
    pub fn tag(self) -> &'static str {
        match self {
            ObservableKind::NoisePower => "noise",
            ObservableKind::CrossRe => "cross_re",
            ObservableKind::CrossIm => "cross_im",
        }
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "noise" => Ok(ObservableKind::NoisePower),
            "cross_re" => Ok(ObservableKind::CrossRe),
            "cross_im" => Ok(ObservableKind::CrossIm),
            other => Err(Error::Incompatible(format!(
                "unknown observable kind {other:?} (expected noise, cross_re or cross_im)"
            ))),
        }
    }
}

/// One measured value with its settings. Beams are indices into
/// [`ScanDataset::beam_names`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    pub beam1: usize,
    pub setting1: MeasurementSetting,
    pub beam2: Option<(usize, MeasurementSetting)>,
    pub kind: ObservableKind,
    pub value: f64,
    pub sigma: f64,
}

impl ScanRecord {
    pub fn noise(beam: usize, setting: MeasurementSetting, value: f64, sigma: f64) -> Self {
        Self {
            beam1: beam,
            setting1: setting,
            beam2: None,
            kind: ObservableKind::NoisePower,
            value,
            sigma,
        }
    }

    pub fn cross(
        beam1: usize,
        setting1: MeasurementSetting,
        beam2: usize,
        setting2: MeasurementSetting,
        kind: ObservableKind,
        value: f64,
        sigma: f64,
    ) -> Self {
        Self {
            beam1,
            setting1,
            beam2: Some((beam2, setting2)),
            kind,
            value,
            sigma,
        }
    }

    fn validate(&self, beams: usize) -> std::result::Result<(), String> {
        if !self.value.is_finite() {
            return Err(format!("value {} is not finite", self.value));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(format!("sigma {} must be positive and finite", self.sigma));
        }
        let check_beam = |b: usize| {
            if b >= beams {
                Err(format!("beam index {b} out of range ({beams} beams)"))
            } else {
                Ok(())
            }
        };
        check_beam(self.beam1)?;
        match (self.kind, self.beam2) {
            (ObservableKind::NoisePower, None) => Ok(()),
            (ObservableKind::NoisePower, Some(_)) => Err("noise record must name a single beam".into()),
            (_, None) => Err(format!("{} record needs a second beam", self.kind)),
            (_, Some((b2, s2))) => {
                check_beam(b2)?;
                if b2 == self.beam1 {
                    return Err(format!("{} record pairs beam {b2} with itself", self.kind));
                }
                if s2.is_homodyne() != self.setting1.is_homodyne() {
                    return Err("both beams of a cross record must use the same scheme".into());
                }
                Ok(())
            }
        }
    }
}

/// Records of one experiment, plus the names of its beams.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanDataset {
    pub beam_names: Vec<String>,
    pub records: Vec<ScanRecord>,
}

impl ScanDataset {
    pub fn new(beam_names: Vec<String>, records: Vec<ScanRecord>) -> Result<Self> {
        let d = Self { beam_names, records };
        d.validate()?;
        Ok(d)
    }

    /// Every violation, one message per offending record.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.records.is_empty() {
            errors.push("dataset has no records".to_string());
        }
        let mut names = BTreeSet::new();
        for n in &self.beam_names {
            if !names.insert(n) {
                errors.push(format!("duplicate beam name {n:?}"));
            }
        }
        for (k, r) in self.records.iter().enumerate() {
            if let Err(e) = r.validate(self.beam_names.len()) {
                errors.push(format!("record {k}: {e}"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn beam_index(&self, name: &str) -> Option<usize> {
        self.beam_names.iter().position(|n| n == name)
    }

    /// Beams with a noise-power record.
    pub fn beams_used(&self) -> BTreeSet<usize> {
        self.records
            .iter()
            .filter(|r| r.kind == ObservableKind::NoisePower)
            .map(|r| r.beam1)
            .collect()
    }

    /// Ordered pairs `(i < j)` with a correlation record.
    pub fn pairs_used(&self) -> BTreeSet<(usize, usize)> {
        self.records
            .iter()
            .filter_map(|r| r.beam2.map(|(b, _)| (r.beam1.min(b), r.beam1.max(b))))
            .collect()
    }

    /// Concatenates datasets, merging beam lists by name.
    pub fn merge(parts: &[ScanDataset]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut records = Vec::new();
        for part in parts {
            let map: Vec<usize> = part
                .beam_names
                .iter()
                .map(|n| match names.iter().position(|m| m == n) {
                    Some(k) => k,
                    None => {
                        names.push(n.clone());
                        names.len() - 1
                    }
                })
                .collect();
            for r in &part.records {
                let mut r = *r;
                r.beam1 = map[r.beam1];
                if let Some((b, s)) = r.beam2 {
                    r.beam2 = Some((map[b], s));
                }
                records.push(r);
            }
        }
        Self::new(names, records)
    }

    /// Records that pass `keep`, with the same beam list.
    /// The same records with beams listed in `order` first, in that order.
    pub fn with_beam_order(&self, order: &[String]) -> Result<Self> {
        let mut names: Vec<String> = order.iter().filter(|n| self.beam_names.contains(n)).cloned().collect();
        for n in &self.beam_names {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        let map: Vec<usize> = self
            .beam_names
            .iter()
            .map(|n| names.iter().position(|m| m == n).expect("kept"))
            .collect();
        let records = self
            .records
            .iter()
            .map(|r| ScanRecord {
                beam1: map[r.beam1],
                beam2: r.beam2.map(|(b, s)| (map[b], s)),
                ..*r
            })
            .collect();
        Self::new(names, records)
    }

    pub fn filtered(&self, keep: impl Fn(&ScanRecord) -> bool) -> Result<Self> {
        Self::new(self.beam_names.clone(), self.records.iter().copied().filter(|r| keep(r)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validation_lists_every_problem() {
        let hd = MeasurementSetting::homodyne(0.0);
        let records = vec![
            ScanRecord::noise(0, hd, 1.0, 0.0),
            ScanRecord::noise(3, hd, 1.0, 0.1),
            ScanRecord::cross(0, hd, 0, hd, ObservableKind::CrossRe, 0.0, 0.1),
        ];
        match ScanDataset::new(names(&["a", "b"]), records) {
            Err(Error::Config(errs)) => assert_eq!(errs.len(), 3, "{errs:?}"),
            other => panic!("{other:?}"),
        }
        assert!(ScanDataset::new(names(&["a"]), vec![]).is_err());
    }

    #[test]
    fn merge_maps_beams_by_name() {
        let hd = MeasurementSetting::homodyne(0.0);
        let a = ScanDataset::new(names(&["pump"]), vec![ScanRecord::noise(0, hd, 1.0, 0.1)]).unwrap();
        let b = ScanDataset::new(
            names(&["signal", "pump"]),
            vec![ScanRecord::cross(0, hd, 1, hd, ObservableKind::CrossIm, 0.2, 0.1)],
        )
        .unwrap();
        let m = ScanDataset::merge(&[a, b]).unwrap();
        assert_eq!(m.beam_names, names(&["pump", "signal"]));
        assert_eq!(m.records[1].beam1, 1);
        assert_eq!(m.records[1].beam2.unwrap().0, 0);
        assert_eq!(m.pairs_used().into_iter().collect::<Vec<_>>(), vec![(0, 1)]);
        let r = m.with_beam_order(&names(&["idler", "signal"])).unwrap();
        assert_eq!(r.beam_names, names(&["signal", "pump"]));
        assert_eq!((r.records[0].beam1, r.records[1].beam1), (1, 0));
        assert_eq!(r.records[1].beam2.unwrap().0, 1);
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in [ObservableKind::NoisePower, ObservableKind::CrossRe, ObservableKind::CrossIm] {
            assert_eq!(k.tag().parse::<ObservableKind>().unwrap(), k);
        }
        assert!("power".parse::<ObservableKind>().is_err());
    }
}
