//! Matrix CSV files, row-major with a labelled header.
//!
//! ```text
//! SymAsymSA,p_s0,q_s0,p_a0,q_a0        spectral,P0,Q0
//! p_s0,1.3,-0.07,0,0                   P0,1.3,-0.07-0.04i
//! ...                                  Q0,-0.07+0.04i,1.07
//! ```
//!
//! The first header cell is a [`QuadratureBasis`] tag for a real covariance
//! matrix or `spectral` for a complex spectral matrix. Each row starts with
//! the label of the matching column.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modal::{CovarianceMatrix, QuadratureBasis, SpectralMatrix};

pub const SPECTRAL_TAG: &str = "spectral";

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Covariance(CovarianceMatrix),
    Spectral(SpectralMatrix),
}

pub fn spectral_labels(beams: usize) -> Vec<String> {
    (0..beams).flat_map(|b| [format!("P{b}"), format!("Q{b}")]).collect()
}

fn covariance_labels(v: &CovarianceMatrix) -> Vec<String> {
    match v.beams() {
        Some(b) => v.basis().labels(b),
        None => (0..v.dim()).map(|k| format!("x{k}")).collect(),
    }
}

fn write_rows<W: Write, T>(
    out: W,
    tag: &str,
    labels: &[String],
    get: impl Fn(usize, usize) -> T,
    fmt: impl Fn(T) -> String,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(tag.to_string()).chain(labels.iter().cloned()))?;
    for (i, label) in labels.iter().enumerate() {
        let row = (0..labels.len()).map(|j| fmt(get(i, j)));
        w.write_record(std::iter::once(label.clone()).chain(row))?;
    }
    w.flush().map_err(|e| Error::io("<matrix output>", e))?;
    Ok(())
}

pub fn write_covariance<W: Write>(v: &CovarianceMatrix, out: W) -> Result<()> {
    write_rows(out, v.basis().tag(), &covariance_labels(v), |i, j| v.get(i, j), |x| format!("{x:.16e}"))
}

pub fn write_spectral<W: Write>(s: &SpectralMatrix, out: W) -> Result<()> {
    write_rows(out, SPECTRAL_TAG, &spectral_labels(s.beams()), |i, j| s.get(i, j), |z| {
        format!("{:.16e}{:+.16e}i", z.re, z.im)
    })
}

pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_from(std::io::BufReader::new(file), path)
}

pub fn read_matrix_from<R: Read>(input: R, source: &Path) -> Result<MatrixFile> {
    let schema = |line: u64, message: String| Error::Schema {
        path: PathBuf::from(source),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| schema(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        rows.push((line, row));
    }
    let Some(((_, header), body)) = rows.split_first() else {
        return Err(schema(1, "empty file".into()));
    };
    let tag = header.get(0).unwrap_or("");
    let labels: Vec<&str> = header.iter().skip(1).collect();
    let n = labels.len();
    if n == 0 || n % 2 != 0 {
        return Err(schema(1, format!("expected an even, nonzero number of columns, found {n}")));
    }
    if body.len() != n {
        return Err(schema(1, format!("{n} columns but {} rows", body.len())));
    }
    for (line, row) in body {
        if row.len() != n + 1 {
            return Err(schema(*line, format!("expected {} fields, found {}", n + 1, row.len())));
        }
    }
    let cells = |parse: &dyn Fn(&str) -> Option<Complex64>| -> Result<DMatrix<Complex64>> {
        let mut m = DMatrix::zeros(n, n);
        for (i, (line, row)) in body.iter().enumerate() {
            if row.get(0) != Some(labels[i]) {
                return Err(schema(
                    *line,
                    format!("row label {:?} does not match column {:?}", row.get(0).unwrap_or(""), labels[i]),
                ));
            }
            for j in 0..n {
                let text = row.get(j + 1).unwrap_or("");
                let z = parse(text)
                    .filter(|z| z.re.is_finite() && z.im.is_finite())
                    .ok_or_else(|| schema(*line, format!("column {}: cannot parse {text:?}", labels[j])))?;
                m[(i, j)] = z;
            }
        }
        Ok(m)
    };
    if tag == SPECTRAL_TAG {
        let m = cells(&|t| t.parse::<Complex64>().ok())?;
        return SpectralMatrix::new(m).map(MatrixFile::Spectral);
    }
    let basis: QuadratureBasis = tag
        .parse()
        .map_err(|_| schema(1, format!("first header cell {tag:?} must be a basis tag or {SPECTRAL_TAG:?}")))?;
    let m = cells(&|t| t.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0)))?;
    CovarianceMatrix::new(m.map(|z| z.re), basis).map(MatrixFile::Covariance)
}
