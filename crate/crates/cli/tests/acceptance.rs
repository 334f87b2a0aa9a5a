//! Acceptance criteria at desk scale. Prints one PASS/FAIL line per
//! criterion and exits non-zero when any criterion fails.

use gkvcs::assembly::{build_extradiag, build_general, cm_diag_sector, diag_sector, numeric_eigenvalues};
use gkvcs::fock::TruncationSpec;
use gkvcs::model::{compositions, degeneracy, FormulaVariant, ModelParams, SectorId, SpectrumFormula};
use gkvcs::quadrature::QuadratureRule;
use gkvcs::vcs::{FamilySpec, FamilyTag, Generator};
use gkvcs::verify::{
    check_degeneracy, check_degeneration_limits, check_hermiticity, check_resolution, compare_spectra, VerificationReport,
};
use gkvcs_cli::campaign::{self, Selection};
use gkvcs_cli::config::{self, CampaignConfig, Format};
use gkvcs_cli::report::{self, Meta};
use serde_json::json;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sector(bits: &str) -> SectorId {
    bits.parse().unwrap()
}

fn cfg(v: serde_json::Value) -> CampaignConfig {
    let c = config::parse(&v.to_string()).unwrap();
    let errors = config::validate(&c);
    assert!(errors.is_empty(), "{errors:?}");
    c
}

fn run_all(c: &CampaignConfig) -> Vec<VerificationReport> {
    let jobs = campaign::plan(c, Selection::ALL).unwrap();
    campaign::execute(c, &jobs, 1).unwrap()
}

fn first_failure(reports: &[VerificationReport]) -> String {
    reports
        .iter()
        .find(|r| r.asserted_failure())
        .map(|r| format!("; first failure {} {} metric {:.3e} {:?} {:?}", r.property, r.variant, r.metric, r.parameters, r.notes))
        .unwrap_or_default()
}

fn c1_spectrum_diag() -> Outcome {
    let t0 = Instant::now();
    let eps = [0.5, 1.1, 0.8];
    let g = [0.4, 0.25, 0.1];
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut pass = true;
    for (omega, cutoff) in [(vec![1.0], 60), (vec![1.0, 1.7], 40)] {
        for levels in 1..=3 {
            let p = ModelParams::diagonal(omega.clone(), eps[..levels].to_vec(), g[..levels].to_vec()).unwrap();
            let spec = TruncationSpec::uniform(omega.len(), cutoff, None, levels).unwrap();
            for k in SectorId::all(levels).unwrap() {
                let ev = numeric_eigenvalues(&diag_sector(&p, &spec, k).unwrap().h).unwrap();
                let lv = SpectrumFormula::new(FormulaVariant::Diag, &p, k).unwrap().levels(&p, 0, &spec.boson_cutoffs).unwrap();
                let r = compare_spectra(&lv, &ev, 15, 1e-6, "diag").unwrap();
                pass &= r.passed && r.samples.len() == 15;
                worst = worst.max(r.metric);
                count += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(pass && secs <= 30.0, format!("{count} sectors, max abs error {worst:.2e} (tol 1e-6), {secs:.1} s (limit 30 s)"))
}

fn c2_spectrum_cm_diag() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut pass = true;
    for (om, gp) in [(1.0, 0.4), (2.0, 0.3)] {
        for levels in 1..=2 {
            let p = ModelParams::diagonal(vec![1.0], vec![0.5, 0.9][..levels].to_vec(), vec![0.3, 0.15][..levels].to_vec())
                .unwrap()
                .with_cm(om, gp)
                .unwrap();
            let spec = TruncationSpec::uniform(1, 40, Some(40), levels).unwrap();
            for k in SectorId::all(levels).unwrap() {
                let ev = numeric_eigenvalues(&cm_diag_sector(&p, &spec, k).unwrap().h).unwrap();
                let lv = SpectrumFormula::new(FormulaVariant::CmDiag, &p, k).unwrap().levels(&p, 40, &spec.boson_cutoffs).unwrap();
                let r = compare_spectra(&lv, &ev, 15, 1e-6, "cm-diag").unwrap();
                pass &= r.passed && r.samples.len() == 15;
                worst = worst.max(r.metric);
                count += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(pass && secs <= 60.0, format!("N=1, {count} sectors, max abs error {worst:.2e} (tol 1e-6), {secs:.1} s (limit 60 s)"))
}

/// C(n + N − 1, n) by exact multiplicative recurrence.
fn binomial_count(n: usize, modes: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..modes {
        c = c * (n + i) as u128 / i as u128;
    }
    c
}

fn c3_degeneracy() -> Outcome {
    let mut pass = true;
    for modes in 1..=5 {
        for n in 0..=20 {
            let enumerated = compositions(n, modes).len() as u128;
            let d = degeneracy(n, modes).unwrap() as u128;
            pass &= enumerated == d && d == binomial_count(n, modes);
        }
    }
    let mut detail = String::from("d(n,N) = #compositions = C(n+N-1,n) for N<=5, n<=20");
    for (modes, cutoff, n_check) in [(2usize, 20usize, 8usize), (3, 12, 5)] {
        let p = ModelParams::diagonal(vec![1.0; modes], vec![0.5], vec![0.3]).unwrap();
        let spec = TruncationSpec::uniform(modes, cutoff, None, 1).unwrap();
        for k in SectorId::all(1).unwrap() {
            let r = check_degeneracy(&p, &spec, k, n_check).unwrap();
            pass &= r.passed;
        }
        detail.push_str(&format!("; equal-omega N={modes} multiplicities n<={n_check}"));
    }
    outcome(pass, detail)
}

const SINGLE: [&str; 4] = ["single-mode", "multimode", "vcs-vector", "degenerate-theta"];
const CM: [(&str, bool); 6] = [
    ("two-sector-n", false),
    ("two-sector-m", false),
    ("multidim", false),
    ("two-sector-n", true),
    ("two-sector-m", true),
    ("multidim", true),
];

fn families(checks: &[&str], cutoff: Option<usize>, boson_only: bool) -> Vec<serde_json::Value> {
    let mut out = Vec::new();
    if boson_only {
        for f in SINGLE {
            out.push(json!({"family": f, "checks": checks, "cutoff": cutoff}));
        }
    } else {
        for f in ["multimode", "vcs-vector", "degenerate-theta"] {
            out.push(json!({"family": f, "checks": checks, "cutoff": cutoff}));
        }
        for (f, deg) in CM {
            out.push(json!({"family": f, "degenerate": deg, "checks": checks, "cutoff": cutoff}));
        }
    }
    out
}

fn model_n1() -> serde_json::Value {
    json!({"modes": 1, "levels": 1, "omega": [1.0], "epsilon": [0.5], "g_diag": [0.3]})
}

fn model_n2_cm() -> serde_json::Value {
    json!({"modes": 2, "levels": 1, "omega": [1.0, 1.0], "epsilon": [0.5], "g_diag": [0.3],
           "cm": {"omega": 1.3, "g_prime": 0.25}})
}

fn model_extradiag() -> serde_json::Value {
    json!({"modes": 1, "levels": 2, "omega": [1.0], "epsilon": [0.5, 0.9], "g_diag": [0.3, 0.15],
           "g_extra": [[[0.0, 0.1], [0.1, 0.0]]], "cm": {"omega": 1.3, "g_prime": 0.25}})
}

fn tally(reports: &[VerificationReport], property: &str) -> (usize, usize) {
    let sel: Vec<&VerificationReport> = reports.iter().filter(|r| r.property == property && !r.report_only).collect();
    (sel.iter().filter(|r| r.passed).count(), sel.len())
}

fn c4_normalization_continuity() -> Outcome {
    let js = [0.5, 1.0, 2.0, 4.0];
    let checks = ["normalization", "continuity"];
    let mut reports = Vec::new();
    let grids = json!({"J": js, "J_prime": js, "gamma": [0.3], "theta": [0.7], "gamma_prime": [0.4], "h": [1e-2, 1e-3, 1e-4]});
    reports.extend(run_all(&cfg(json!({
        "model": model_n1(), "truncation": {"boson_cutoffs": [40]},
        "families": families(&checks, None, true), "grids": grids
    }))));
    reports.extend(run_all(&cfg(json!({
        "model": model_n2_cm(), "truncation": {"boson_cutoffs": [40, 40], "cm_cutoff": 40},
        "families": families(&checks, None, false), "grids": grids
    }))));
    let extradiag: Vec<serde_json::Value> = ["two-sector-n", "two-sector-m"]
        .iter()
        .map(|f| json!({"family": f, "frame": "extradiag", "checks": checks}))
        .collect();
    reports.extend(run_all(&cfg(json!({
        "model": model_extradiag(), "truncation": {"boson_cutoffs": [40], "cm_cutoff": 40},
        "families": extradiag, "grids": grids
    }))));
    let (np, nt) = tally(&reports, "normalization");
    let (cp, ct) = tally(&reports, "continuity");
    let others = reports.iter().filter(|r| r.asserted_failure()).count();
    let mut names: Vec<String> = reports.iter().map(|r| r.variant.clone()).collect();
    names.sort();
    names.dedup();
    outcome(
        np == nt && cp == ct && others == 0 && nt > 0,
        format!(
            "{} families, normalization {np}/{nt}, continuity {cp}/{ct} at J, J' in {{0.5,1,2,4}}{}",
            names.len(),
            first_failure(&reports)
        ),
    )
}

fn dynamics_reports() -> Vec<VerificationReport> {
    let checks = ["temporal-stability", "action-identity"];
    let mut reports = run_all(&cfg(json!({
        "model": model_n1(), "truncation": {"boson_cutoffs": [40]},
        "families": families(&checks, None, true),
        "grids": {"J": [0.5, 1.0, 2.0, 4.0], "gamma": [0.3], "theta": [0.7]}
    })));
    reports.extend(run_all(&cfg(json!({
        "model": model_n2_cm(), "truncation": {"boson_cutoffs": [10, 10], "cm_cutoff": 10},
        "families": families(&checks, Some(10), false),
        "grids": {"J": [0.5], "J_prime": [0.5], "gamma": [0.3], "theta": [0.7], "gamma_prime": [0.4]}
    }))));
    reports
}

fn c5_temporal_stability(reports: &[VerificationReport]) -> Outcome {
    let (sp, st) = tally(reports, "temporal-stability");
    let (np, nt) = tally(reports, "temporal-stability-negative-control");
    let worst = reports
        .iter()
        .filter(|r| r.property == "temporal-stability")
        .map(|r| r.metric)
        .fold(0.0, f64::max);
    let literal = reports.iter().filter(|r| r.property == "temporal-stability-literal" && !r.passed).count();
    outcome(
        sp == st && np == nt && st > 0 && nt == st,
        format!(
            "consistent shift {sp}/{st} (worst 1-F {worst:.1e}), negative control below 0.999 {np}/{nt}; \
             literal c.m. shift fails (report-only) in {literal} records{}",
            first_failure(reports)
        ),
    )
}

fn c6_action_identity(reports: &[VerificationReport]) -> Outcome {
    let (ap, at) = tally(reports, "action-identity");
    let worst = reports.iter().filter(|r| r.property == "action-identity").map(|r| r.metric).fold(0.0, f64::max);
    outcome(ap == at && at > 0, format!("{ap}/{at} families and label points, worst |<H'> - rhs| {worst:.1e}"))
}

fn resolve(p: &ModelParams, spec: &TruncationSpec, sectors: &[&str], fam: FamilySpec, rule: &QuadratureRule, tol: f64) -> VerificationReport {
    let gens: Vec<Generator> = sectors.iter().map(|s| Generator::new(p, spec, sector(s), fam).unwrap()).collect();
    check_resolution(&gens, rule, tol).unwrap()
}

fn c7_resolution() -> Outcome {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, r: &VerificationReport, want: bool| {
        pass &= r.passed == want;
        lines.push(format!("{name} {:.1e}", r.metric));
    };
    let q = 40;
    let n1 = ModelParams::diagonal(vec![1.0], vec![0.5], vec![0.3]).unwrap();
    let spec = TruncationSpec::uniform(1, 10, None, 1).unwrap();
    let rule10 = QuadratureRule::gauss(q, 21).unwrap();
    record("single-mode", &resolve(&n1, &spec, &["0"], FamilySpec::of(FamilyTag::SingleMode), &rule10, 1e-8), true);
    let n2 = ModelParams::diagonal(vec![1.0, 1.7], vec![0.5], vec![0.3]).unwrap();
    let spec2 = TruncationSpec::uniform(2, 10, None, 1).unwrap();
    record("multimode", &resolve(&n2, &spec2, &["0"], FamilySpec::of(FamilyTag::Multimode), &rule10, 1e-8), true);
    let m2 = ModelParams::diagonal(vec![1.0], vec![0.5, 0.9], vec![0.3, 0.15]).unwrap();
    let spec_v = TruncationSpec::uniform(1, 10, None, 2).unwrap();
    let all = ["00", "01", "10", "11"];
    record("vcs-vector", &resolve(&m2, &spec_v, &all, FamilySpec::of(FamilyTag::VcsVector), &rule10, 1e-8), true);

    let cm = n1.clone().with_cm(1.3, 0.25).unwrap();
    let spec_cm = TruncationSpec::uniform(1, 8, Some(8), 1).unwrap();
    let rule8 = QuadratureRule::gauss(q, 17).unwrap();
    for tag in [FamilyTag::TwoSectorN, FamilyTag::TwoSectorM, FamilyTag::Multidim] {
        let fam = FamilySpec::of(tag);
        record(&fam.name(), &resolve(&cm, &spec_cm, &["0"], fam, &rule8, 1e-7), true);
    }
    // θ-families: degenerate measure without the −δ(J) point mass, then
    // with it, where the n = 0 projector is lost.
    let eq = ModelParams::diagonal(vec![1.0, 1.0], vec![0.5], vec![0.3]).unwrap();
    let spec_eq = TruncationSpec::uniform(2, 8, None, 1).unwrap();
    let d8 = degeneracy(8, 2).unwrap() as usize;
    let rule_t = QuadratureRule::gauss(q, 17).unwrap().with_theta(2 * d8 + 1).unwrap();
    let fam = FamilySpec::of(FamilyTag::DegenerateTheta);
    record("degenerate-theta", &resolve(&eq, &spec_eq, &["0"], fam, &rule_t, 1e-7), true);
    let literal = resolve(&eq, &spec_eq, &["0"], fam, &rule_t.clone().with_point_mass(-1.0).unwrap(), 1e-7);
    record("degenerate-theta(with -delta)", &literal, false);
    let cm1 = cm.clone();
    let rule_t1 = QuadratureRule::gauss(q, 17).unwrap().with_theta(3).unwrap();
    for tag in [FamilyTag::TwoSectorN, FamilyTag::Multidim] {
        let fam = FamilySpec::of(tag).degenerate();
        record(&fam.name(), &resolve(&cm1, &spec_cm, &["0"], fam, &rule_t1, 1e-7), true);
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(pass && secs <= 300.0, format!("{}; {secs:.0} s (limit 300 s)", lines.join(", ")))
}

fn c8_moments() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [10, 20, 40] {
        let rs = campaign::moment_reports(q, 15, 2, 1e-10, false).unwrap();
        let exp = &rs[0];
        let cm = &rs[1];
        let deg = &rs[2];
        let zero = &rs[3];
        let measured0 = zero.samples.first().map_or(f64::NAN, |s| s.value);
        let target0 = zero.samples.first().and_then(|s| s.target).unwrap_or(f64::NAN);
        let documented = !zero.passed && zero.report_only && measured0.abs() < 1e-12 && (target0 - 1.0).abs() < 1e-15;
        pass &= exp.passed && cm.passed && deg.passed && documented;
        if q == 40 {
            detail.push(format!(
                "Q=40: e^-J moments n<=79 rel err {:.1e}, c.m. measure {:.1e}, n!d(n) n=1..15 {:.1e}; \
                 n=0 record FAIL as documented (measured {measured0:.1e} vs required {target0})",
                exp.metric, cm.metric, deg.metric
            ));
        }
    }
    outcome(pass, format!("Q in {{10,20,40}}; {}", detail.join("")))
}

fn c9_extradiag_general() -> Outcome {
    let p: ModelParams = serde_json::from_value(model_extradiag()).unwrap();
    let spec = TruncationSpec::uniform(1, 12, Some(12), 2).unwrap();
    let ex = check_hermiticity(&build_extradiag(&p, &spec).unwrap(), 1e-12);
    let ge = check_hermiticity(&build_general(&p, &spec).unwrap(), 1e-12);
    let lim = check_degeneration_limits(&p, &spec, 1e-12).unwrap();
    let c = cfg(json!({
        "model": model_extradiag(), "truncation": {"boson_cutoffs": [12], "cm_cutoff": 12},
        "spectrum": {"variants": ["extradiag", "general"]}
    }));
    let reports = run_all(&c);
    let tables: Vec<&VerificationReport> = reports.iter().filter(|r| r.property == "spectrum").collect();
    let emitted = tables.len() == 2 && tables.iter().all(|r| r.report_only && r.samples.len() == 15);
    let dir = tempfile::tempdir().unwrap();
    report::write_outputs(dir.path(), &Meta::of(&c), &reports, Format::Both).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let csv_ok = csv.starts_with("variant,sector,label,analytic,numeric,abs_error") && csv.lines().count() == 31;
    let max_dev = tables.iter().map(|r| r.metric).fold(0.0, f64::max);
    outcome(
        ex.passed && ge.passed && lim.passed && emitted && csv_ok,
        format!(
            "hermiticity extradiag {:.1e}, general {:.1e}; limits {:.1e}; tables emitted report-only \
             (largest closed-form deviation {max_dev:.2e})",
            ex.metric, ge.metric, lim.metric
        ),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bundle(c: &CampaignConfig, dir: &Path, workers: usize) -> Vec<(String, Vec<u8>)> {
    let jobs = campaign::plan(c, Selection::ALL).unwrap();
    let reports = campaign::execute(c, &jobs, workers).unwrap();
    let files = report::write_outputs(dir, &Meta::of(c), &reports, Format::Both).unwrap();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn c10_determinism() -> Outcome {
    let mut names = Vec::new();
    let mut pass = true;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    for path in entries {
        let c = config::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = bundle(&c, a.path(), 1);
        let second = bundle(&c, b.path(), 2);
        pass &= !first.is_empty() && first == second;
        names.push(path.file_stem().unwrap().to_string_lossy().into_owned());
    }
    outcome(pass && !names.is_empty(), format!("byte-identical bundles across two runs (1 and 2 workers): {}", names.join(", ")))
}

fn main() {
    let start = Instant::now();
    let guarded = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        })
    };
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 spectrum fidelity, diagonal", guarded(&c1_spectrum_diag)));
    results.push(("2 spectrum fidelity, c.m. diagonal", guarded(&c2_spectrum_cm_diag)));
    results.push(("3 degeneracy", guarded(&c3_degeneracy)));
    results.push(("4 normalization and continuity", guarded(&c4_normalization_continuity)));
    let dynamics = catch_unwind(dynamics_reports);
    match &dynamics {
        Ok(rs) => {
            results.push(("5 temporal stability", c5_temporal_stability(rs)));
            results.push(("6 action identity", c6_action_identity(rs)));
        }
        Err(_) => {
            results.push(("5 temporal stability", outcome(false, "panicked")));
            results.push(("6 action identity", outcome(false, "panicked")));
        }
    }
    results.push(("7 resolution of identity", guarded(&c7_resolution)));
    results.push(("8 moment problems", guarded(&c8_moments)));
    results.push(("9 extradiagonal and general", guarded(&c9_extradiag_general)));
    results.push(("10 determinism", guarded(&c10_determinism)));
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria pass ({:.0} s)",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
