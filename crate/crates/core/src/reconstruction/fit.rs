use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::Serialize;

use super::{design_row, CrossMoment, Moment, ModelSpec, Parameter, ScanDataset};
use crate::error::{Error, Result};
use crate::modal::{
    assemble_multibeam, project_physical, CrossMap, PhysicalityReport, SpectralMatrix, StationaryBeamMoments,
    TwoBeamCrossMoments,
};

/// Δχ² per removed parameter above which the larger model is preferred.
pub const DEFAULT_COMPARE_THRESHOLD: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
    /// A parameter is unidentifiable when the squared norm of its projection
    /// onto the null space exceeds this.
    pub null_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            null_tol: 1e-6,
        }
    }
}

/// Rank diagnostics of a weighted design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identifiability {
    pub parameters: Vec<Parameter>,
    pub rank: usize,
    /// `σ_max/σ_min`; infinite when rank-deficient.
    pub condition_number: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub unidentifiable: Vec<Parameter>,
    /// Orthonormal basis of the null space, one vector over `parameters` each.
    pub null_space: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: Vec<Parameter>,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// Infinite for unidentifiable parameters.
    pub std_errors: Vec<f64>,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub records: usize,
    pub dof: usize,
    pub identifiability: Identifiability,
}

impl FitResult {
    pub fn rank(&self) -> usize {
        self.identifiability.rank
    }

    pub fn condition_number(&self) -> f64 {
        self.identifiability.condition_number
    }

    /// `(estimate, std_error)` of `p`, if it was free.
    pub fn get(&self, p: &Parameter) -> Option<(f64, f64)> {
        let k = self.parameters.iter().position(|q| q == p)?;
        Some((self.estimates[k], self.std_errors[k]))
    }

    pub fn by_name(&self, name: &str) -> Option<(f64, f64)> {
        let k = self.names.iter().position(|n| n == name)?;
        Some((self.estimates[k], self.std_errors[k]))
    }

    pub fn is_identifiable(&self, p: &Parameter) -> bool {
        !self.identifiability.unidentifiable.contains(p)
    }

    /// `parameter,estimate,stderr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,estimate,stderr\n");
        for k in 0..self.parameters.len() {
            let _ = writeln!(out, "{},{:.17e},{:.17e}", self.names[k], self.estimates[k], self.std_errors[k]);
        }
        out
    }

    pub fn report(&self) -> String {
        let id = &self.identifiability;
        let mut out = String::new();
        let _ = writeln!(out, "records            {}", self.records);
        let _ = writeln!(out, "parameters         {}", self.parameters.len());
        let _ = writeln!(out, "design rank        {}", id.rank);
        let _ = writeln!(out, "condition number   {:.6e}", id.condition_number);
        let _ = writeln!(out, "chi2               {:.6}", self.chi2);
        let _ = writeln!(out, "dof                {}", self.dof);
        if self.dof > 0 {
            let _ = writeln!(out, "chi2/dof           {:.6}", self.chi2 / self.dof as f64);
        }
        if id.unidentifiable.is_empty() {
            let _ = writeln!(out, "unidentifiable     none");
        } else {
            let names: Vec<String> = id
                .unidentifiable
                .iter()
                .map(|p| self.names[self.parameters.iter().position(|q| q == p).expect("listed")].clone())
                .collect();
            let _ = writeln!(out, "unidentifiable     {}", names.join(", "));
            for v in &id.null_space {
                let terms: Vec<String> = v
                    .iter()
                    .zip(&self.names)
                    .filter(|(c, _)| c.abs() > 1e-6)
                    .map(|(c, n)| format!("{c:+.4}*{n}"))
                    .collect();
                let _ = writeln!(out, "null direction     {}", terms.join(" "));
            }
        }
        let width = self.names.iter().map(String::len).max().unwrap_or(0).max(9);
        let _ = writeln!(out, "\n{:<width$}  {:>12}  {:>12}", "parameter", "estimate", "stderr");
        for k in 0..self.parameters.len() {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.6}  {:>12.6}",
                self.names[k], self.estimates[k], self.std_errors[k]
            );
        }
        out
    }
}

/// Whitened design `A/σ` and data `(y − offset)/σ`, rows in a canonical
/// order so the solution does not depend on how records were listed.
fn whitened(data: &ScanDataset, model: &ModelSpec) -> Result<(DMatrix<f64>, DVector<f64>)> {
    data.validate()?;
    let mut rows: Vec<(Vec<f64>, f64)> = data
        .records
        .par_iter()
        .map(|r| {
            let (row, offset) = design_row(r, model)?;
            Ok((row.iter().map(|x| x / r.sigma).collect(), (r.value - offset) / r.sigma))
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|(ra, ya), (rb, yb)| {
        ra.iter()
            .zip(rb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| ya.total_cmp(yb))
    });
    let n = rows.len();
    let p = model.len();
    let mut a = DMatrix::zeros(n, p);
    let mut b = DVector::zeros(n);
    for (i, (row, y)) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            a[(i, j)] = *x;
        }
        b[i] = *y;
    }
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("design or data"));
    }
    Ok((a, b))
}

struct Decomposition {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    /// Columns are right singular vectors, ordered like `sigma`.
    v: DMatrix<f64>,
    rank: usize,
}

fn decompose(a: &DMatrix<f64>, opts: &FitOptions) -> Result<Decomposition> {
    let (n, p) = a.shape();
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDesign);
    }
    // pad to at least p rows so the full right singular basis is returned
    let padded = if n < p { a.clone().resize_vertically(p, 0.0) } else { a.clone() };
    let svd = SVD::try_new(padded, true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v = DMatrix::from_fn(p, order.len(), |i, k| vt[(order[k], i)]);
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]);
    let cutoff = opts.rank_tol * sigma[0];
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    Ok(Decomposition { u, sigma, v, rank })
}

fn diagnose(model: &ModelSpec, d: &Decomposition, opts: &FitOptions) -> Identifiability {
    let p = model.len();
    let null_space: Vec<Vec<f64>> = (d.rank..p).map(|k| d.v.column(k).iter().copied().collect()).collect();
    let unidentifiable = (0..p)
        .filter(|&j| null_space.iter().map(|v| v[j] * v[j]).sum::<f64>() > opts.null_tol)
        .map(|j| model.parameters()[j])
        .collect();
    let condition_number = if d.rank == p {
        d.sigma[0] / d.sigma[p - 1]
    } else {
        f64::INFINITY
    };
    Identifiability {
        parameters: model.parameters().to_vec(),
        rank: d.rank,
        condition_number,
        singular_values: d.sigma[..p.min(d.sigma.len())].to_vec(),
        unidentifiable,
        null_space,
    }
}

pub fn identifiability(data: &ScanDataset, model: &ModelSpec) -> Result<Identifiability> {
    identifiability_with(data, model, &FitOptions::default())
}

/// Rank, conditioning and null space of the weighted design. Uses only the
/// settings and sigmas of `data`, not the measured values.
pub fn identifiability_with(data: &ScanDataset, model: &ModelSpec, opts: &FitOptions) -> Result<Identifiability> {
    let (a, _) = whitened(data, model)?;
    Ok(diagnose(model, &decompose(&a, opts)?, opts))
}

pub fn fit_wls(data: &ScanDataset, model: &ModelSpec) -> Result<FitResult> {
    fit_wls_with(data, model, &FitOptions::default())
}

/// Weighted least squares by SVD. On rank-deficient designs returns the
/// minimum-norm solution, reports the null space and gives unidentifiable
/// parameters an infinite standard error.
pub fn fit_wls_with(data: &ScanDataset, model: &ModelSpec, opts: &FitOptions) -> Result<FitResult> {
    let (a, b) = whitened(data, model)?;
    let d = decompose(&a, opts)?;
    let id = diagnose(model, &d, opts);
    let p = model.len();
    let n = data.len();
    let mut b_padded = b.clone();
    if n < p {
        b_padded = b_padded.resize_vertically(p, 0.0);
    }
    let mut theta = DVector::zeros(p);
    let mut cov = DMatrix::zeros(p, p);
    for k in 0..d.rank {
        let v = d.v.column(k);
        let coef = d.u.column(k).dot(&b_padded) / d.sigma[k];
        theta += v * coef;
        cov += v * v.transpose() / (d.sigma[k] * d.sigma[k]);
    }
    let resid = &a * &theta - &b;
    let chi2 = resid.norm_squared();
    let std_errors = (0..p)
        .map(|j| {
            if id.unidentifiable.contains(&model.parameters()[j]) {
                f64::INFINITY
            } else {
                cov[(j, j)].max(0.0).sqrt()
            }
        })
        .collect();
    Ok(FitResult {
        parameters: model.parameters().to_vec(),
        names: model.parameters().iter().map(|q| q.name(&data.beam_names)).collect(),
        estimates: theta.iter().copied().collect(),
        std_errors,
        covariance: cov,
        chi2,
        records: n,
        dof: n - d.rank,
        identifiability: id,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preferred {
    Full,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub delta_chi2: f64,
    pub delta_dof: usize,
    pub removed: usize,
    pub threshold: f64,
    pub preferred: Preferred,
    pub full: FitResult,
    pub constrained: FitResult,
}

/// Nested comparison: the full model is preferred iff its χ² improvement
/// exceeds `threshold_per_parameter` times the number of parameters the
/// constrained model removes.
pub fn compare_models(
    data: &ScanDataset,
    full: &ModelSpec,
    constrained: &ModelSpec,
    threshold_per_parameter: f64,
) -> Result<Comparison> {
    if !constrained.is_nested_in(full) {
        return Err(Error::Model("constrained model is not nested in the full model".into()));
    }
    let f = fit_wls(data, full)?;
    let c = fit_wls(data, constrained)?;
    let removed = full.len() - constrained.len();
    let threshold = threshold_per_parameter * removed as f64;
    let delta_chi2 = (c.chi2 - f.chi2).max(0.0);
    Ok(Comparison {
        delta_chi2,
        delta_dof: c.dof.saturating_sub(f.dof),
        removed,
        threshold,
        preferred: if delta_chi2 > threshold {
            Preferred::Full
        } else {
            Preferred::Constrained
        },
        full: f,
        constrained: c,
    })
}

/// Moments moved to the nearest physical state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedMoments {
    pub beams: Vec<StationaryBeamMoments>,
    pub crosses: CrossMap,
    /// Frobenius distance between the input and output covariances.
    pub distance: f64,
    pub report: PhysicalityReport,
}

/// Projects a multi-beam stationary state onto the physical set.
/// Physical input comes back unchanged.
pub fn project_moments(beams: &[StationaryBeamMoments], crosses: &CrossMap) -> Result<ProjectedMoments> {
    let v = assemble_multibeam(beams, crosses)?;
    let p = project_physical(&v)?;
    let (out_beams, out_crosses) = if p.distance == 0.0 {
        (beams.to_vec(), crosses.clone())
    } else {
        let tol = 1e-8 * p.matrix.matrix().amax().max(1.0);
        SpectralMatrix::from_covariance(&p.matrix, tol)?.to_moments()
    };
    Ok(ProjectedMoments {
        beams: out_beams,
        crosses: out_crosses,
        distance: p.distance,
        report: p.report,
    })
}

/// Projects the state estimated by `fit` over beams `0..beams`. Each beam
/// needs fitted `α` and `β`; other missing moments are taken as zero.
pub fn project_fit(fit: &FitResult, beams: usize) -> Result<ProjectedMoments> {
    let value = |p: Parameter| fit.get(&p).map(|(v, _)| v);
    let mut moments = Vec::with_capacity(beams);
    for b in 0..beams {
        let need = |m: Moment| {
            value(Parameter::beam(b, m))
                .ok_or_else(|| Error::Model(format!("fit has no estimate of {}", Parameter::beam(b, m).name(&fit_names(fit, beams)))))
        };
        moments.push(StationaryBeamMoments {
            alpha: need(Moment::Alpha)?,
            beta: need(Moment::Beta)?,
            gamma: value(Parameter::beam(b, Moment::Gamma)).unwrap_or(0.0),
            delta: value(Parameter::beam(b, Moment::Delta)).unwrap_or(0.0),
        });
    }
    let mut crosses = CrossMap::new();
    for i in 0..beams {
        for j in i + 1..beams {
            let mut x = [0.0; 8];
            for m in CrossMoment::ALL {
                x[m.index()] = value(Parameter::cross(i, j, m)).unwrap_or(0.0);
            }
            crosses.insert((i, j), TwoBeamCrossMoments::from_array(x));
        }
    }
    project_moments(&moments, &crosses)
}

fn fit_names(fit: &FitResult, beams: usize) -> Vec<String> {
    (0..beams)
        .map(|b| {
            fit.parameters
                .iter()
                .zip(&fit.names)
                .find_map(|(p, n)| match p {
                    Parameter::Beam { beam, .. } if *beam == b => n.split('.').next().map(str::to_string),
                    _ => None,
                })
                .unwrap_or_else(|| b.to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavityParams;
    use crate::detection::MeasurementSetting;
    use crate::reconstruction::{predict_record, ObservableKind, ScanRecord};
    use approx::assert_abs_diff_eq;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const PUMP: StationaryBeamMoments = StationaryBeamMoments {
        alpha: 1.30,
        beta: 1.07,
        gamma: -0.07,
        delta: -0.04,
    };

    fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
        (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
    }

    fn single_beam(settings: impl Iterator<Item = MeasurementSetting>, m: &StationaryBeamMoments, sigma: f64, seed: u64) -> ScanDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let records = settings
            .map(|s| {
                let mut r = ScanRecord::noise(0, s, 0.0, if sigma > 0.0 { sigma } else { 1.0 });
                r.value = predict_record(&r, &[*m], &CrossMap::new()).unwrap();
                if sigma > 0.0 {
                    r.value += noise.sample(&mut rng);
                }
                r
            })
            .collect();
        ScanDataset::new(vec!["pump".into()], records).unwrap()
    }

    fn rd_scan(m: &StationaryBeamMoments, d: f64, sigma: f64, seed: u64) -> ScanDataset {
        let cav = CavityParams::new(d, 1.75).unwrap();
        single_beam(grid(450, -5.0, 5.0).map(|x| MeasurementSetting::resonator(cav, x + 1e-9)), m, sigma, seed)
    }

    fn hd_scan(m: &StationaryBeamMoments) -> ScanDataset {
        single_beam(grid(90, 0.0, 3.1).map(MeasurementSetting::homodyne), m, 0.0, 0)
    }

    #[test]
    fn noiseless_rd_recovers_exactly() {
        let fit = fit_wls(&rd_scan(&PUMP, 0.85, 0.0, 0), &ModelSpec::full(1)).unwrap();
        assert_eq!(fit.rank(), 4);
        for (e, t) in fit.estimates.iter().zip(PUMP.to_array()) {
            assert_abs_diff_eq!(*e, t, epsilon = 1e-10);
        }
        assert!(fit.condition_number().is_finite());
        assert!(fit.chi2 < 1e-18);
    }

    #[test]
    fn hd_is_rank_three_with_delta_null_space() {
        let fit = fit_wls(&hd_scan(&PUMP), &ModelSpec::full(1)).unwrap();
        assert_eq!(fit.rank(), 3);
        let delta = Parameter::beam(0, Moment::Delta);
        assert_eq!(fit.identifiability.unidentifiable, vec![delta]);
        assert_eq!(fit.identifiability.null_space.len(), 1);
        assert_abs_diff_eq!(fit.identifiability.null_space[0][3].abs(), 1.0, epsilon = 1e-12);
        assert!(fit.get(&delta).unwrap().1.is_infinite());
        // minimum norm: the invisible δ comes back as zero
        assert_eq!(fit.get(&delta).unwrap().0, 0.0);
        assert!(fit.condition_number().is_infinite());
        for m in [Moment::Alpha, Moment::Beta, Moment::Gamma] {
            let (v, e) = fit.get(&Parameter::beam(0, m)).unwrap();
            assert_abs_diff_eq!(v, PUMP.to_array()[m.index()], epsilon = 1e-10);
            assert!(e.is_finite());
        }
    }

    #[test]
    fn lossless_rd_cannot_see_delta() {
        let id = identifiability(&rd_scan(&PUMP, 1.0, 0.0, 0), &ModelSpec::full(1)).unwrap();
        assert_eq!(id.rank, 3);
        assert_eq!(id.unidentifiable, vec![Parameter::beam(0, Moment::Delta)]);
    }

    #[test]
    fn errors_scale_with_sigma() {
        let model = ModelSpec::full(1);
        let mut prev: Option<f64> = None;
        for sigma in [0.1, 0.01, 0.001] {
            let fit = fit_wls(&rd_scan(&PUMP, 0.85, sigma, 5), &model).unwrap();
            let se = fit.std_errors[3];
            if let Some(p) = prev {
                assert_abs_diff_eq!(p / se, 10.0, epsilon = 1e-9);
            }
            prev = Some(se);
            for (k, (e, t)) in fit.estimates.iter().zip(PUMP.to_array()).enumerate() {
                assert!((e - t).abs() < 5.0 * fit.std_errors[k]);
            }
        }
    }

    #[test]
    fn record_order_does_not_matter() {
        let data = rd_scan(&PUMP, 0.85, 0.01, 9);
        let mut shuffled = data.clone();
        shuffled.records.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        let model = ModelSpec::full(1);
        let a = fit_wls(&data, &model).unwrap();
        let b = fit_wls(&shuffled, &model).unwrap();
        assert_eq!(a, b);
        let hd = hd_scan(&PUMP);
        let mut hd2 = hd.clone();
        hd2.records.reverse();
        let a = fit_wls(&hd, &model).unwrap();
        let b = fit_wls(&hd2, &model).unwrap();
        for (x, y) in a.estimates.iter().zip(&b.estimates) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert_eq!(fit_wls(&hd, &model).unwrap(), a);
    }

    #[test]
    fn zero_design_is_an_error() {
        // HD at φ = 0 measures only α; a model with only β sees nothing
        let data = single_beam(std::iter::repeat(MeasurementSetting::homodyne(0.0)).take(5), &PUMP, 0.0, 0);
        let model = ModelSpec::new(vec![Parameter::beam(0, Moment::Beta)], Default::default()).unwrap();
        assert!(matches!(fit_wls(&data, &model), Err(Error::ZeroDesign)));
    }

    #[test]
    fn underdetermined_design_reports_null_space() {
        let data = single_beam([0.0, 0.7].into_iter().map(MeasurementSetting::homodyne), &PUMP, 0.0, 0);
        let fit = fit_wls(&data, &ModelSpec::full(1)).unwrap();
        assert_eq!(fit.rank(), 2);
        assert_eq!(fit.dof, 0);
        assert_eq!(fit.identifiability.null_space.len(), 2);
    }

    #[test]
    fn compare_prefers_constrained_without_delta() {
        let m = StationaryBeamMoments { delta: 0.0, ..PUMP };
        let data = rd_scan(&m, 0.85, 0.01, 3);
        let c = compare_models(&data, &ModelSpec::full(1), &ModelSpec::no_hidden(1), DEFAULT_COMPARE_THRESHOLD).unwrap();
        assert_eq!(c.preferred, Preferred::Constrained);
        assert_eq!(c.removed, 1);
        assert_eq!(c.delta_dof, 1);

        let m = StationaryBeamMoments { delta: 0.3, ..PUMP };
        let data = rd_scan(&m, 0.85, 0.01, 3);
        let c = compare_models(&data, &ModelSpec::full(1), &ModelSpec::no_hidden(1), DEFAULT_COMPARE_THRESHOLD).unwrap();
        assert_eq!(c.preferred, Preferred::Full);

        assert!(compare_models(&data, &ModelSpec::no_hidden(1), &ModelSpec::full(1), 9.0).is_err());
    }

    #[test]
    fn projection_of_fits() {
        let fit = fit_wls(&rd_scan(&PUMP, 0.85, 0.0, 0), &ModelSpec::full(1)).unwrap();
        let p = project_fit(&fit, 1).unwrap();
        assert_eq!(p.distance, 0.0);
        assert_eq!(p.beams[0], StationaryBeamMoments::from_array(fit.estimates.clone().try_into().unwrap()));

        let m = StationaryBeamMoments::new(0.9, 0.9, 0.0, 0.0).unwrap();
        let p = project_moments(&[m], &CrossMap::new()).unwrap();
        assert!(p.report.pass);
        assert_abs_diff_eq!(p.beams[0].alpha, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.beams[0].beta, 1.0, epsilon = 1e-10);

        let fit = fit_wls(&hd_scan(&PUMP), &ModelSpec::new(vec![Parameter::beam(0, Moment::Alpha)], Default::default()).unwrap()).unwrap();
        assert!(project_fit(&fit, 1).is_err());
    }

    #[test]
    fn cross_records_fit() {
        let beams = [PUMP, StationaryBeamMoments::new(1.52, 2.87, -0.02, 0.34).unwrap()];
        let x = TwoBeamCrossMoments::from_array([-0.47, 0.16, 0.0, 0.12, 0.04, -0.03, -0.03, 0.10]);
        let crosses: CrossMap = [((0, 1), x)].into_iter().collect();
        let cav = CavityParams::new(0.85, 1.75).unwrap();
        let mut records = Vec::new();
        for d in grid(200, -5.0, 5.0) {
            let s = MeasurementSetting::resonator(cav, d + 1e-9);
            for kind in [ObservableKind::CrossRe, ObservableKind::CrossIm] {
                let mut r = ScanRecord::cross(1, s, 0, s, kind, 0.0, 0.01);
                r.value = predict_record(&r, &beams, &crosses).unwrap();
                records.push(r);
            }
        }
        let data = ScanDataset::new(vec!["pump".into(), "signal".into()], records).unwrap();
        let model = ModelSpec::for_dataset(&data, true).unwrap();
        assert_eq!(model.len(), 8);
        let fit = fit_wls(&data, &model).unwrap();
        assert_eq!(fit.rank(), 8);
        for (e, t) in fit.estimates.iter().zip(x.to_array()) {
            assert_abs_diff_eq!(*e, t, epsilon = 1e-9);
        }
        assert!(fit.names[4].starts_with("pump:signal."));
    }
}
