//! Campaign orchestration: a fixed-order job list run on a worker pool, with
//! results collected back in job order.

use crate::config::{CampaignConfig, CheckKind, FamilyBlock, SpectrumVariant};
use gkvcs::assembly::{FrameKind, build_cm_diag, build_diag, build_extradiag, build_general, cm_diag_sector, diag_sector, numeric_eigenvalues};
use gkvcs::fock::TruncationSpec;
use gkvcs::model::{degeneracy, FormulaVariant, ModelParams, SectorId, SpectrumFormula};
use gkvcs::quadrature::QuadratureRule;
use gkvcs::vcs::{FamilySpec, FamilyTag, Generator, GkParams, SectorLabels};
use gkvcs::verify::{
    check_action_identity, check_continuity, check_degeneracy, check_degenerate_measure, check_degeneration_limits,
    check_hermiticity, check_moments, check_normalization, check_resolution, check_temporal_stability, compare_labelled,
    compare_spectra, exponential_targets, Density, Direction, Dynamics, ShiftRule, VerificationReport,
};
use gkvcs::{Error, Result};
use rayon::prelude::*;

/// Largest space on which the dynamical checks diagonalize H'.
pub const MAX_DYNAMIC_DIM: usize = 5000;

/// One coherent-state label point.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelPoint {
    pub j: f64,
    pub gamma: f64,
    pub theta: Option<f64>,
    pub j_prime: Option<f64>,
    pub gamma_prime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Spectrum { variant: SpectrumVariant, sector: Option<SectorId> },
    Degeneracy { sector: SectorId, levels: usize },
    Structure,
    Moments,
    Resolution { family: usize },
    Labels { family: usize, sector: SectorId, point: LabelPoint },
}

impl Job {
    fn describe(&self) -> (String, String) {
        match self {
            Job::Spectrum { variant, .. } => ("spectrum".into(), format!("{variant:?}").to_lowercase()),
            Job::Degeneracy { .. } => ("degeneracy".into(), "diag".into()),
            Job::Structure => ("structure".into(), "general".into()),
            Job::Moments => ("moments".into(), "measures".into()),
            Job::Resolution { .. } => ("resolution".into(), "family".into()),
            Job::Labels { .. } => ("labels".into(), "family".into()),
        }
    }
}

/// Which parts of a configuration to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub spectrum: bool,
    pub families: bool,
    pub moments: bool,
}

impl Selection {
    pub const ALL: Selection = Selection { spectrum: true, families: true, moments: true };
}

pub fn sectors(cfg: &CampaignConfig) -> Result<Vec<SectorId>> {
    match &cfg.sectors {
        Some(s) => Ok(s.clone()),
        None => SectorId::all(cfg.model.levels),
    }
}

fn label_points(cfg: &CampaignConfig, fam: &FamilySpec) -> Vec<LabelPoint> {
    let g = &cfg.grids;
    let thetas: Vec<Option<f64>> = if fam.degenerate { g.theta.iter().map(|&t| Some(t)).collect() } else { vec![None] };
    let cms: Vec<(Option<f64>, Option<f64>)> = if fam.has_cm() {
        g.j_prime
            .iter()
            .flat_map(|&j| g.gamma_prime.iter().map(move |&gp| (Some(j), Some(gp))))
            .collect()
    } else {
        vec![(None, None)]
    };
    let mut out = Vec::new();
    for &j in &g.j {
        for &gamma in &g.gamma {
            for &theta in &thetas {
                for &(j_prime, gamma_prime) in &cms {
                    out.push(LabelPoint { j, gamma, theta, j_prime, gamma_prime });
                }
            }
        }
    }
    out
}

/// The ordered job list of a configuration.
pub fn plan(cfg: &CampaignConfig, sel: Selection) -> Result<Vec<Job>> {
    let secs = sectors(cfg)?;
    let mut jobs = Vec::new();
    if sel.spectrum {
        if let Some(sp) = &cfg.spectrum {
            let mut variants = sp.variants.clone();
            variants.sort();
            variants.dedup();
            for v in variants {
                match v {
                    SpectrumVariant::Diag | SpectrumVariant::CmDiag => {
                        for &k in &secs {
                            jobs.push(Job::Spectrum { variant: v, sector: Some(k) });
                        }
                    }
                    _ => jobs.push(Job::Spectrum { variant: v, sector: None }),
                }
            }
            if let Some(levels) = sp.degeneracy_levels {
                for &k in &secs {
                    jobs.push(Job::Degeneracy { sector: k, levels });
                }
            }
        }
        if cfg.structure.is_some() {
            jobs.push(Job::Structure);
        }
    }
    if sel.moments && cfg.moments.is_some() {
        jobs.push(Job::Moments);
    }
    if sel.families {
        for (i, f) in cfg.families.iter().enumerate() {
            let fam = f.spec();
            let checks = f.checks();
            if checks.iter().any(|c| *c != CheckKind::Resolution) {
                for &k in &secs {
                    for point in label_points(cfg, &fam) {
                        jobs.push(Job::Labels { family: i, sector: k, point });
                    }
                }
            }
            if checks.contains(&CheckKind::Resolution) {
                jobs.push(Job::Resolution { family: i });
            }
        }
    }
    Ok(jobs)
}

/// A failed record standing in for a check that could not run.
pub fn error_report(property: &str, variant: &str, err: &Error) -> VerificationReport {
    match err {
        Error::Tail { bound, tolerance, required } => VerificationReport::new(property, variant, *bound, *tolerance, *bound)
            .with_note(format!("tail-bound refusal: cutoff {required} or more is needed")),
        other => VerificationReport::new(property, variant, 1.0, 0.0, 0.0).with_note(format!("error: {other}")),
    }
}

fn flatten(property: &str, variant: &str, r: Result<Vec<VerificationReport>>) -> Vec<VerificationReport> {
    r.unwrap_or_else(|e| vec![error_report(property, variant, &e)])
}

/// ⌈J + 10√J⌉ + 10
pub fn auto_cutoff(j: f64) -> usize {
    (j + 10.0 * j.sqrt()).ceil() as usize + 10
}

fn default_times(model: &ModelParams) -> Vec<f64> {
    let w = model.omega.iter().copied().fold(f64::INFINITY, f64::min);
    let end = 2.0 * std::f64::consts::PI / w;
    (0..10).map(|i| end * i as f64 / 9.0).collect()
}

fn labels_for(model: &ModelParams, fam: &FamilySpec, k: SectorId, pt: &LabelPoint) -> GkParams {
    let n = if fam.degenerate { 1 } else { model.modes };
    let mut l = SectorLabels::new(vec![pt.j; n], vec![pt.gamma; n]);
    if let (Some(j), Some(g)) = (pt.j_prime, pt.gamma_prime) {
        l = l.with_cm(j, g);
    }
    let mut p = GkParams::single(k, l);
    p.theta = pt.theta;
    p
}

fn label_spec(cfg: &CampaignConfig, f: &FamilyBlock, fam: &FamilySpec, pt: &LabelPoint) -> Result<TruncationSpec> {
    let boson = f.cutoff.unwrap_or_else(|| auto_cutoff(pt.j));
    let cm = (fam.has_cm() || fam.frame != FrameKind::Diag)
        .then(|| f.cutoff.unwrap_or_else(|| auto_cutoff(pt.j_prime.unwrap_or(0.0))));
    TruncationSpec::new(vec![boson; cfg.model.modes], cm, cfg.model.levels)
}

fn run_labels(cfg: &CampaignConfig, fi: usize, k: SectorId, pt: &LabelPoint) -> Vec<VerificationReport> {
    let f = &cfg.families[fi];
    let fam = f.spec();
    let name = fam.name();
    let tol = cfg.truncation.tail_tolerance;
    let setup = label_spec(cfg, f, &fam, pt).and_then(|spec| Generator::new(&cfg.model, &spec, k, fam));
    let gen = match setup {
        Ok(g) => g,
        Err(e) => return vec![error_report("labels", &name, &e)],
    };
    let p = labels_for(&cfg.model, &fam, k, pt);
    let checks = f.checks();
    let mut out = Vec::new();
    if checks.contains(&CheckKind::Normalization) {
        out.extend(flatten("normalization", &name, check_normalization(&gen, &p, tol).map(|r| vec![r])));
    }
    if checks.contains(&CheckKind::Continuity) {
        let mut dirs = vec![Direction::Action(0), Direction::Angle(0)];
        if fam.has_cm() {
            dirs.extend([Direction::CmAction, Direction::CmAngle]);
        }
        if fam.degenerate {
            dirs.push(Direction::Theta);
        }
        for d in dirs {
            out.extend(flatten("continuity", &name, check_continuity(&gen, &p, d, &cfg.grids.h, tol).map(|r| vec![r])));
        }
    }
    let dynamic = checks.contains(&CheckKind::TemporalStability) || checks.contains(&CheckKind::ActionIdentity);
    if dynamic {
        let dim = match fam.tag {
            FamilyTag::VcsVector => gen.spec.full_tag().map(|t| t.dim()).unwrap_or(usize::MAX),
            _ => gen.frame.tag.dim(),
        };
        let dynamics = if dim > MAX_DYNAMIC_DIM {
            Err(Error::Parameter(format!("space of dimension {dim} is too large for the dynamical checks")))
        } else {
            Dynamics::new(&gen)
        };
        match dynamics {
            Err(e) => out.push(error_report("dynamics", &name, &e)),
            Ok(dy) => {
                if checks.contains(&CheckKind::TemporalStability) {
                    let times = cfg.grids.t.clone().unwrap_or_else(|| default_times(&cfg.model));
                    let mut rules = vec![ShiftRule::Consistent, ShiftRule::Doubled];
                    if fam.has_cm() {
                        rules.push(ShiftRule::Literal);
                    }
                    for rule in rules {
                        out.extend(flatten(
                            "temporal-stability",
                            &name,
                            check_temporal_stability(&gen, &dy, &p, &times, rule, tol).map(|r| vec![r]),
                        ));
                    }
                }
                if checks.contains(&CheckKind::ActionIdentity) {
                    out.extend(flatten("action-identity", &name, check_action_identity(&gen, &dy, &p, tol).map(|r| vec![r])));
                }
            }
        }
    }
    out
}

fn run_resolution(cfg: &CampaignConfig, fi: usize) -> Result<Vec<VerificationReport>> {
    let q = cfg.quadrature.as_ref().ok_or_else(|| Error::Parameter("no quadrature block".into()))?;
    let fam = cfg.families[fi].spec();
    let cm = (fam.has_cm() || fam.frame != FrameKind::Diag).then(|| q.cm_cutoff.unwrap_or(q.cutoff));
    let spec = TruncationSpec::new(vec![q.cutoff; cfg.model.modes], cm, cfg.model.levels)?;
    let n_max = q.cutoff.max(cm.unwrap_or(0));
    let mut rule = QuadratureRule::gauss(q.q, q.k.unwrap_or(2 * n_max + 1))?;
    if fam.degenerate {
        let d = degeneracy(q.cutoff, cfg.model.modes)? as usize;
        rule = rule.with_theta(q.k_theta.unwrap_or(2 * d + 1))?;
    }
    let secs = if fam.tag == FamilyTag::VcsVector { SectorId::all(cfg.model.levels)? } else { sectors(cfg)? };
    let gens = secs
        .into_iter()
        .map(|k| Generator::new(&cfg.model, &spec, k, fam))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    if fam.degenerate {
        let literal = check_resolution(&gens, &rule.clone().with_point_mass(-1.0)?, q.tolerance)?
            .report_only()
            .with_note("measure with the −δ(J) point mass: the n = 0 weight vanishes");
        out.push(check_resolution(&gens, &rule, q.tolerance)?.with_note("measure without the point mass"));
        out.push(literal);
    } else {
        out.push(check_resolution(&gens, &rule, q.tolerance)?);
    }
    Ok(out)
}

fn run_spectrum(cfg: &CampaignConfig, variant: SpectrumVariant, sector: Option<SectorId>) -> Result<Vec<VerificationReport>> {
    let sp = cfg.spectrum.as_ref().ok_or_else(|| Error::Parameter("no spectrum block".into()))?;
    let m = &cfg.model;
    let spec = TruncationSpec::new(cfg.truncation.boson_cutoffs.clone(), cfg.truncation.cm_cutoff, m.levels)?;
    let cuts = &spec.boson_cutoffs;
    let cm_cut = spec.cm_cutoff.unwrap_or(0);
    let name = format!("{variant:?}").to_lowercase().replace("cmdiag", "cm-diag");
    match (variant, sector) {
        (SpectrumVariant::Diag, Some(k)) => {
            let ev = numeric_eigenvalues(&diag_sector(m, &spec, k)?.h)?;
            let levels = SpectrumFormula::new(FormulaVariant::Diag, m, k)?.levels(m, 0, cuts)?;
            Ok(vec![compare_spectra(&levels, &ev, sp.window, sp.tolerance, &name)?.with_param("sector", k)])
        }
        (SpectrumVariant::CmDiag, Some(k)) => {
            let ev = numeric_eigenvalues(&cm_diag_sector(m, &spec, k)?.h)?;
            let levels = SpectrumFormula::new(FormulaVariant::CmDiag, m, k)?.levels(m, cm_cut, cuts)?;
            Ok(vec![compare_spectra(&levels, &ev, sp.window, sp.tolerance, &name)?.with_param("sector", k)])
        }
        (SpectrumVariant::Extradiag | SpectrumVariant::General, _) => {
            let (bundle, fv) = if variant == SpectrumVariant::Extradiag {
                (build_extradiag(m, &spec)?, FormulaVariant::Extradiag)
            } else {
                (build_general(m, &spec)?, FormulaVariant::General)
            };
            let ev = numeric_eigenvalues(&bundle.full)?;
            let mut labelled = Vec::new();
            for k in SectorId::all(m.levels)? {
                for l in SpectrumFormula::new(fv, m, k)?.levels(m, cm_cut, cuts)? {
                    labelled.push((format!("k={k};{}", l.label), l.energy));
                }
            }
            let cmp = compare_labelled(&labelled, &ev, sp.window, sp.tolerance, &name)?
                .report_only()
                .with_param("sector", "all")
                .with_note("closed forms compared for information only");
            Ok(vec![check_hermiticity(&bundle, 1e-12), cmp])
        }
        _ => Err(Error::Parameter("sector-diagonal spectrum needs a sector".into())),
    }
}

fn run_structure(cfg: &CampaignConfig) -> Result<Vec<VerificationReport>> {
    let st = cfg.structure.as_ref().ok_or_else(|| Error::Parameter("no structure block".into()))?;
    let m = &cfg.model;
    let spec = TruncationSpec::new(cfg.truncation.boson_cutoffs.clone(), cfg.truncation.cm_cutoff, m.levels)?;
    let mut out = vec![check_hermiticity(&build_diag(m, &spec)?, st.tolerance)];
    if m.cm.is_some() {
        out.push(check_hermiticity(&build_cm_diag(m, &spec)?, st.tolerance));
    }
    if m.cm.is_some() && m.has_extra() {
        out.push(check_hermiticity(&build_extradiag(m, &spec)?, st.tolerance));
        out.push(check_hermiticity(&build_general(m, &spec)?, st.tolerance));
        if st.limits {
            out.push(check_degeneration_limits(m, &spec, st.tolerance)?);
        }
    }
    Ok(out)
}

fn run_moments(cfg: &CampaignConfig) -> Result<Vec<VerificationReport>> {
    let mo = cfg.moments.as_ref().ok_or_else(|| Error::Parameter("no moments block".into()))?;
    moment_reports(mo.q, mo.degenerate_orders, mo.degenerate_modes.unwrap_or(cfg.model.modes), mo.tolerance, mo.corrected)
}

/// Exponential and c.m. measures on all exact orders, the degenerate measure
/// on 1..=`orders`, and its n = 0 record.
pub fn moment_reports(q: usize, orders: usize, modes: usize, tol: f64, corrected: bool) -> Result<Vec<VerificationReport>> {
    let rule = QuadratureRule::gauss(q, 1)?;
    let all: Vec<usize> = (0..2 * q).collect();
    let targets = exponential_targets(&all);
    let mut out = vec![
        check_moments(&rule, Density::Exponential, &targets, tol, "exponential")?,
        check_moments(&rule, Density::Exponential, &targets, tol, "cm-measure")?,
        check_degenerate_measure(q, modes, &(1..=orders).collect::<Vec<_>>(), false, tol)?,
        check_degenerate_measure(q, modes, &[0], false, tol)?,
    ];
    if corrected {
        out.push(check_degenerate_measure(q, modes, &(0..=orders).collect::<Vec<_>>(), true, tol)?);
    }
    Ok(out)
}

pub fn run_job(cfg: &CampaignConfig, job: &Job) -> Vec<VerificationReport> {
    let (prop, variant) = job.describe();
    log::debug!("job {job:?}");
    match job {
        Job::Spectrum { variant, sector } => flatten(&prop, &format!("{variant:?}").to_lowercase(), run_spectrum(cfg, *variant, *sector)),
        Job::Degeneracy { sector, levels } => {
            let spec = TruncationSpec::new(cfg.truncation.boson_cutoffs.clone(), None, cfg.model.levels);
            flatten(&prop, &variant, spec.and_then(|s| check_degeneracy(&cfg.model, &s, *sector, *levels)).map(|r| vec![r]))
        }
        Job::Structure => flatten(&prop, &variant, run_structure(cfg)),
        Job::Moments => flatten(&prop, &variant, run_moments(cfg)),
        Job::Resolution { family } => flatten(&prop, &cfg.families[*family].spec().name(), run_resolution(cfg, *family)),
        Job::Labels { family, sector, point } => run_labels(cfg, *family, *sector, point),
    }
}

/// Runs every job on `workers` threads; output order is the job order.
pub fn execute(cfg: &CampaignConfig, jobs: &[Job], workers: usize) -> Result<Vec<VerificationReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    let nested: Vec<Vec<VerificationReport>> = pool.install(|| jobs.par_iter().map(|j| run_job(cfg, j)).collect());
    Ok(nested.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn desk() -> CampaignConfig {
        parse(
            r#"{
            "model": {"modes": 1, "levels": 1, "omega": [1.0], "epsilon": [0.5], "g_diag": [0.2]},
            "truncation": {"boson_cutoffs": [20]},
            "spectrum": {"variants": ["diag"]},
            "families": [{"family": "single-mode", "checks": ["normalization", "continuity"]}],
            "grids": {"J": [0.5, 1.0]}
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn auto_cutoff_values() {
        assert_eq!(auto_cutoff(0.0), 10);
        assert_eq!(auto_cutoff(1.0), 21);
        assert_eq!(auto_cutoff(4.0), 34);
    }

    #[test]
    fn plan_is_ordered_and_complete() {
        let cfg = desk();
        let jobs = plan(&cfg, Selection::ALL).unwrap();
        assert_eq!(jobs.len(), 2 + 4);
        assert!(matches!(jobs[0], Job::Spectrum { .. }));
    }

    #[test]
    fn parallel_matches_serial() {
        let cfg = desk();
        let jobs = plan(&cfg, Selection::ALL).unwrap();
        let a = execute(&cfg, &jobs, 1).unwrap();
        let b = execute(&cfg, &jobs, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.passed), "{a:?}");
    }

    #[test]
    fn fixed_small_cutoff_is_refused() {
        let mut cfg = desk();
        cfg.families[0].cutoff = Some(3);
        cfg.grids.j = vec![4.0];
        let reports = run_job(&cfg, &plan(&cfg, Selection { spectrum: false, families: true, moments: false }).unwrap()[0]);
        assert!(reports.iter().all(|r| !r.passed));
        assert!(reports[0].notes[0].contains("tail-bound refusal"));
    }
}
