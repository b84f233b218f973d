use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sideband_core::cavity::coefficient_curve;
use sideband_core::io::{
    generate_scan, load_fixture, read_scan, write_covariance, write_scan, write_spectral, ExperimentConfig, GridSpec,
};
use sideband_core::reconstruction::{compare_models, fit_wls, project_fit, Preferred, ScanDataset};
use sideband_core::{CavityParams, Error, ModelSpec};

use crate::{CoeffsArgs, ExportArgs, Failure, FitArgs, ModelKind, SimulateArgs};

type Outcome = Result<(), Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Rejected(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(io_err(path))
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, Failure> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::reference_default(),
    })
}

pub fn coeffs(a: &CoeffsArgs) -> Outcome {
    let cavity = CavityParams::new(a.d, a.omega_ratio)?;
    let grid = GridSpec {
        min: a.dmin,
        max: a.dmax,
        count: a.count,
        endpoint: true,
    };
    if a.count < 2 || !(a.dmin < a.dmax) || !a.dmin.is_finite() || !a.dmax.is_finite() {
        return Err(Error::Config(vec![format!(
            "need finite dmin < dmax and count >= 2 (got {} .. {}, {})",
            a.dmin, a.dmax, a.count
        )])
        .into());
    }
    let detunings: Vec<f64> = grid
        .points()
        .into_iter()
        .map(|x| if a.d == 0.0 && x == 0.0 { f64::EPSILON } else { x })
        .collect();
    let curve = coefficient_curve(&cavity, &detunings)?;
    let mut out = String::from("delta,c_alpha,c_beta,c_gamma,c_delta,c_v\n");
    for (x, c) in detunings.iter().zip(&curve) {
        let _ = writeln!(
            out,
            "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.c_alpha, c.c_beta, c.c_gamma, c.c_delta, c.c_v
        );
    }
    match &a.out {
        Some(p) => write_text(p, &out)?,
        None => crate::emit(&out),
    }
    let max_delta = curve.iter().map(|c| c.c_delta.abs()).fold(0.0, f64::max);
    eprintln!("max |c_delta| = {max_delta:.6e} (d = {}, omega_ratio = {})", a.d, a.omega_ratio);
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Outcome {
    let mut cfg = load_config(a.config.as_ref())?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let scans = generate_scan(&cfg)?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    for s in &scans {
        let path = a.out.join(format!("{}.csv", s.name));
        write_scan(&path, &s.dataset)?;
        crate::emit(&format!("{}\t{} records\n", path.display(), s.dataset.len()));
    }
    Ok(())
}

pub fn fit(a: &FitArgs) -> Outcome {
    let cfg = load_config(a.config.as_ref())?;
    let cavities = cfg.cavity_map();
    let parts = a
        .scans
        .iter()
        .map(|p| read_scan(p, &cavities))
        .collect::<Result<Vec<_>, _>>()?;
    let data = ScanDataset::merge(&parts)?.with_beam_order(&cfg.beam_names())?;
    let full = ModelSpec::for_dataset(&data, true)?;
    let reduced = ModelSpec::for_dataset(&data, false)?;
    let chosen = match a.model {
        ModelKind::Full => &full,
        ModelKind::NoHidden => &reduced,
    };
    let result = fit_wls(&data, chosen)?;
    let mut report = String::new();
    let _ = writeln!(report, "beams              {}", data.beam_names.join(", "));
    let _ = writeln!(
        report,
        "model              {}",
        match a.model {
            ModelKind::Full => "full",
            ModelKind::NoHidden => "no-hidden",
        }
    );
    report.push_str(&result.report());

    let cmp = compare_models(&data, &full, &reduced, a.threshold)?;
    let _ = writeln!(report, "\nmodel comparison");
    let _ = writeln!(report, "{:<10}  {:>6}  {:>6}  {:>14}", "model", "params", "dof", "chi2");
    for (name, f) in [("full", &cmp.full), ("no-hidden", &cmp.constrained)] {
        let _ = writeln!(report, "{:<10}  {:>6}  {:>6}  {:>14.6}", name, f.parameters.len(), f.dof, f.chi2);
    }
    let _ = writeln!(report, "delta chi2         {:.6}", cmp.delta_chi2);
    let _ = writeln!(report, "threshold          {:.3} ({} removed parameters)", cmp.threshold, cmp.removed);
    let _ = writeln!(
        report,
        "preferred          {}",
        match cmp.preferred {
            Preferred::Full => "full (hidden moments are resolved)",
            Preferred::Constrained => "no-hidden",
        }
    );

    if a.project {
        let p = project_fit(&result, data.beam_names.len())?;
        let _ = writeln!(report, "\nnearest physical state (distance {:.6})", p.distance);
        for (name, m) in data.beam_names.iter().zip(&p.beams) {
            let _ = writeln!(
                report,
                "{name}: alpha {:.6} beta {:.6} gamma {:.6} delta {:.6}",
                m.alpha, m.beta, m.gamma, m.delta
            );
        }
    }

    crate::emit(&report);
    if let Some(p) = &a.report {
        write_text(p, &report)?;
    }
    if let Some(p) = &a.csv {
        write_text(p, &result.to_csv())?;
    }
    Ok(())
}

pub fn export_fixture(a: &ExportArgs) -> Outcome {
    let f = load_fixture();
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let spectral = a.out.join("fixture_spectral.csv");
    let covariance = a.out.join("fixture_covariance.csv");
    write_spectral(&f.spectral, fs::File::create(&spectral).map_err(io_err(&spectral))?)?;
    write_covariance(&f.covariance, fs::File::create(&covariance).map_err(io_err(&covariance))?)?;
    crate::emit(&format!("{}\n{}\n", spectral.display(), covariance.display()));
    Ok(())
}
