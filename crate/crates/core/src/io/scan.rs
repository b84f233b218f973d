//! Scan CSV files.
//!
//! ```text
//! beam1,beam2,scheme,phi_or_delta1,phi_or_delta2,kind,value,sigma
//! signal,,rd,-5.0000000000000000e0,,noise,1.2345678901234567e0,1.0000000000000000e-2
//! signal,idler,rd,-5.0000000000000000e0,-5.0000000000000000e0,cross_im,...
//! ```
//!
//! `beam2` and `phi_or_delta2` are empty for noise records. HD rows carry
//! the LO phase in radians, RD rows the detuning in units of the cavity
//! bandwidth; the cavity of an RD beam is not stored in the file and is
//! supplied by the caller. Numbers are written with 17 significant digits,
//! which round-trips every `f64`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::cavity::CavityParams;
use crate::detection::MeasurementSetting;
use crate::error::{Error, Result};
use crate::reconstruction::{ObservableKind, ScanDataset, ScanRecord};

pub const SCAN_HEADER: [&str; 8] = [
    "beam1",
    "beam2",
    "scheme",
    "phi_or_delta1",
    "phi_or_delta2",
    "kind",
    "value",
    "sigma",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn scheme_tag(s: &MeasurementSetting) -> &'static str {
    if s.is_homodyne() {
        "hd"
    } else {
        "rd"
    }
}

pub fn write_scan_to<W: Write>(data: &ScanDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCAN_HEADER)?;
    for r in &data.records {
        let (b2, x2) = match r.beam2 {
            Some((b, s)) => (data.beam_names[b].as_str(), num(s.scan_value())),
            None => ("", String::new()),
        };
        w.write_record([
            data.beam_names[r.beam1].as_str(),
            b2,
            scheme_tag(&r.setting1),
            &num(r.setting1.scan_value()),
            &x2,
            r.kind.tag(),
            &num(r.value),
            &num(r.sigma),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scan output>", e))?;
    Ok(())
}

pub fn write_scan(path: &Path, data: &ScanDataset) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_scan_to(data, std::io::BufWriter::new(file))
}

/// Reads a scan file; RD beams are resolved through `cavities` by name.
pub fn read_scan(path: &Path, cavities: &BTreeMap<String, CavityParams>) -> Result<ScanDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_scan_from(std::io::BufReader::new(file), path, cavities)
}

pub fn read_scan_from<R: Read>(
    input: R,
    source: &Path,
    cavities: &BTreeMap<String, CavityParams>,
) -> Result<ScanDataset> {
    let schema = |line: u64, message: String| Error::Schema {
        path: PathBuf::from(source),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    if header.iter().ne(SCAN_HEADER) {
        return Err(schema(
            1,
            format!("header must be {:?}, found {:?}", SCAN_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut names: Vec<String> = Vec::new();
    let mut records = Vec::new();
    let mut unit_sigma = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            schema(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(k).unwrap_or("");
        let number = |k: usize| -> Result<f64> {
            let text = field(k);
            let x: f64 = text
                .parse()
                .map_err(|_| schema(line, format!("{}: {text:?} is not a number", SCAN_HEADER[k])))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(schema(line, format!("{}: {text:?} is not finite", SCAN_HEADER[k])))
            }
        };
        let mut beam = |name: &str| -> Result<usize> {
            if name.is_empty() {
                return Err(schema(line, "beam1 is empty".into()));
            }
            Ok(match names.iter().position(|n| n == name) {
                Some(k) => k,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            })
        };
        let hd = match field(2) {
            "hd" => true,
            "rd" => false,
            other => return Err(schema(line, format!("scheme {other:?} must be hd or rd"))),
        };
        let setting = |name: &str, x: f64| -> Result<MeasurementSetting> {
            if hd {
                return Ok(MeasurementSetting::homodyne(x));
            }
            let cavity = cavities
                .get(name)
                .ok_or_else(|| schema(line, format!("no cavity configured for RD beam {name:?}")))?;
            Ok(MeasurementSetting::resonator(*cavity, x))
        };
        let kind: ObservableKind = field(5).parse().map_err(|e: Error| schema(line, e.to_string()))?;
        let value = number(6)?;
        let sigma = if field(7).is_empty() {
            unit_sigma += 1;
            1.0
        } else {
            number(7)?
        };
        if sigma <= 0.0 {
            return Err(schema(line, format!("sigma must be positive (got {sigma})")));
        }
        let b1 = beam(field(0))?;
        let s1 = setting(field(0), number(3)?)?;
        let record = match (kind, field(1)) {
            (ObservableKind::NoisePower, "") => {
                if !field(4).is_empty() {
                    return Err(schema(line, "noise record must leave phi_or_delta2 empty".into()));
                }
                ScanRecord::noise(b1, s1, value, sigma)
            }
            (ObservableKind::NoisePower, _) => {
                return Err(schema(line, "noise record must leave beam2 empty".into()));
            }
            (_, "") => return Err(schema(line, format!("{kind} record needs beam2"))),
            (_, name2) => {
                if name2 == field(0) {
                    return Err(schema(line, format!("{kind} record pairs {name2:?} with itself")));
                }
                let b2 = beam(name2)?;
                let s2 = setting(name2, number(4)?)?;
                ScanRecord::cross(b1, s1, b2, s2, kind, value, sigma)
            }
        };
        records.push(record);
    }
    if unit_sigma > 0 {
        log::warn!(
            "{}: {unit_sigma} record(s) without sigma, using unit weights",
            source.display()
        );
    }
    if records.is_empty() {
        return Err(schema(1, "file has no records".into()));
    }
    ScanDataset::new(names, records)
}
