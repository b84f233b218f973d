//! Synthetic scans from an [`ExperimentConfig`]: the analytic forward model
//! plus seeded Gaussian noise.
//!
//! Each output file gets its own RNG stream (`seed`, stream = file index),
//! so files are reproducible independently of each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ExperimentConfig, Scheme};
use crate::detection::MeasurementSetting;
use crate::error::{Error, Result};
use crate::modal::{assemble_multibeam, check_physicality_with_tol, CrossMap, StationaryBeamMoments};
use crate::reconstruction::{predict_record, ObservableKind, ScanDataset, ScanRecord};

/// One scan file: a single beam (`"<beam>"`) or a pair (`"<b1>_<b2>"`).
#[derive(Debug, Clone, PartialEq)]
pub struct NamedScan {
    pub name: String,
    pub dataset: ScanDataset,
}

/// One dataset per beam, then one per declared pair.
pub fn generate_scan(cfg: &ExperimentConfig) -> Result<Vec<NamedScan>> {
    cfg.validate()?;
    let (beams, crosses) = cfg.truth()?;
    let v = assemble_multibeam(&beams, &crosses)?;
    let report = check_physicality_with_tol(&v, cfg.physicality_tolerance)?;
    if !report.pass {
        return Err(Error::Unphysical {
            min_symplectic_eigenvalue: report.min_symplectic_eigenvalue,
        });
    }
    let names = cfg.beam_names();
    let mut out = Vec::new();
    for k in 0..cfg.beams.len() {
        let records = scan_points(cfg, k)
            .into_iter()
            .map(|x| ScanRecord::noise(k, setting(cfg, k, x), 0.0, 1.0))
            .collect();
        out.push((names[k].clone(), records));
    }
    for (i, j) in cfg.pairs() {
        let map = match cfg.beams[i].scheme {
            Scheme::Hd => cfg.phase_map,
            Scheme::Rd => cfg.detuning_map,
        };
        let mut records = Vec::new();
        for x in scan_points(cfg, i) {
            let (s1, s2) = (setting(cfg, i, x), setting(cfg, j, map.apply(x)));
            for &kind in &cfg.pair_kinds {
                records.push(ScanRecord::cross(i, s1, j, s2, kind, 0.0, 1.0));
            }
        }
        out.push((format!("{}_{}", names[i], names[j]), records));
    }
    out.into_iter()
        .enumerate()
        .map(|(stream, (name, records))| {
            let dataset = synthesize(cfg, &names, records, &beams, &crosses, stream as u64)?;
            Ok(NamedScan { name, dataset })
        })
        .collect()
}

/// All files of [`generate_scan`] merged into one dataset.
pub fn generate_combined(cfg: &ExperimentConfig) -> Result<ScanDataset> {
    let parts: Vec<ScanDataset> = generate_scan(cfg)?.into_iter().map(|s| s.dataset).collect();
    ScanDataset::merge(&parts)
}

fn scan_points(cfg: &ExperimentConfig, beam: usize) -> Vec<f64> {
    match cfg.beams[beam].scheme {
        Scheme::Hd => cfg.phase_grid.points(),
        Scheme::Rd => cfg.grid.points(),
    }
}

fn setting(cfg: &ExperimentConfig, beam: usize, x: f64) -> MeasurementSetting {
    match cfg.beams[beam].scheme {
        Scheme::Hd => MeasurementSetting::homodyne(x),
        Scheme::Rd => {
            let cavity = cfg.cavity_params(beam);
            // the impedance-matched resonance itself has no defined phase reference
            let x = if cavity.d == 0.0 && x == 0.0 { f64::EPSILON } else { x };
            MeasurementSetting::resonator(cavity, x)
        }
    }
}

fn synthesize(
    cfg: &ExperimentConfig,
    names: &[String],
    mut records: Vec<ScanRecord>,
    beams: &[StationaryBeamMoments],
    crosses: &CrossMap,
    stream: u64,
) -> Result<ScanDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Numerical(e.to_string()))?;
    let sigma = if cfg.noise_sigma > 0.0 { cfg.noise_sigma } else { 1.0 };
    for r in &mut records {
        let exact = predict_record(r, beams, crosses)?;
        r.value = if cfg.noise_sigma > 0.0 { exact + noise.sample(&mut rng) } else { exact };
        r.sigma = sigma;
        debug_assert!(r.kind != ObservableKind::NoisePower || r.beam2.is_none());
    }
    ScanDataset::new(names.to_vec(), records)
}
