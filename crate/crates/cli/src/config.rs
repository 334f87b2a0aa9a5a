//! Campaign configuration: parsing with field paths and semantic validation.

use gkvcs::assembly::FrameKind;
use gkvcs::model::{ModelParams, SectorId};
use gkvcs::vcs::{FamilySpec, FamilyTag};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelParams,
    pub truncation: TruncationBlock,
    /// Sectors as bit strings; all sectors when absent.
    #[serde(default)]
    pub sectors: Option<Vec<SectorId>>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub families: Vec<FamilyBlock>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub quadrature: Option<QuadratureBlock>,
    #[serde(default)]
    pub moments: Option<MomentsBlock>,
    #[serde(default)]
    pub structure: Option<StructureBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

fn default_tail() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationBlock {
    pub boson_cutoffs: Vec<usize>,
    #[serde(default)]
    pub cm_cutoff: Option<usize>,
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumVariant {
    Diag,
    CmDiag,
    Extradiag,
    General,
}

fn default_window() -> usize {
    15
}

fn default_spectrum_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub variants: Vec<SpectrumVariant>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_spectrum_tol")]
    pub tolerance: f64,
    /// Highest total quanta for the equal-frequency multiplicity check.
    #[serde(default)]
    pub degeneracy_levels: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Normalization,
    Continuity,
    TemporalStability,
    ActionIdentity,
    Resolution,
}

impl CheckKind {
    pub fn all() -> Vec<CheckKind> {
        vec![
            CheckKind::Normalization,
            CheckKind::Continuity,
            CheckKind::TemporalStability,
            CheckKind::ActionIdentity,
            CheckKind::Resolution,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    pub family: FamilyTag,
    #[serde(default)]
    pub degenerate: bool,
    /// Eigenvectors to build on; the family default when absent.
    #[serde(default)]
    pub frame: Option<FrameKind>,
    /// All checks when absent.
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    /// Fixed boson and c.m. cutoff for the label checks; ⌈J + 10√J⌉ + 10
    /// per label point when absent.
    #[serde(default)]
    pub cutoff: Option<usize>,
}

impl FamilyBlock {
    pub fn spec(&self) -> FamilySpec {
        let mut f = FamilySpec::of(self.family);
        f.degenerate |= self.degenerate;
        if let Some(frame) = self.frame {
            f.frame = frame;
        }
        f
    }

    pub fn checks(&self) -> Vec<CheckKind> {
        self.checks.clone().unwrap_or_else(CheckKind::all)
    }
}

fn default_j() -> Vec<f64> {
    vec![1.0]
}
fn default_gamma() -> Vec<f64> {
    vec![0.3]
}
fn default_theta() -> Vec<f64> {
    vec![0.7]
}
fn default_gamma_prime() -> Vec<f64> {
    vec![0.4]
}
fn default_h() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(rename = "J", default = "default_j")]
    pub j: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
    #[serde(rename = "J_prime", default = "default_j")]
    pub j_prime: Vec<f64>,
    #[serde(default = "default_gamma_prime")]
    pub gamma_prime: Vec<f64>,
    /// Evolution times; ten points on [0, 2π/min ω] when absent.
    #[serde(default)]
    pub t: Option<Vec<f64>>,
    /// Continuity step sizes.
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            j: default_j(),
            gamma: default_gamma(),
            theta: default_theta(),
            j_prime: default_j(),
            gamma_prime: default_gamma_prime(),
            t: None,
            h: default_h(),
        }
    }
}

fn default_resolution_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    #[serde(rename = "Q")]
    pub q: usize,
    /// Phase points; 2·n_max + 1 when absent.
    #[serde(rename = "K", default)]
    pub k: Option<usize>,
    /// θ points; 2·d(n_max) + 1 when absent.
    #[serde(rename = "K_theta", default)]
    pub k_theta: Option<usize>,
    /// Boson cutoff n_max of the resolution checks.
    pub cutoff: usize,
    /// c.m. cutoff of the resolution checks; `cutoff` when absent.
    #[serde(default)]
    pub cm_cutoff: Option<usize>,
    #[serde(default = "default_resolution_tol")]
    pub tolerance: f64,
}

fn default_degenerate_orders() -> usize {
    15
}
fn default_moment_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsBlock {
    #[serde(rename = "Q")]
    pub q: usize,
    /// Highest order n for the degenerate-measure moments n!·d(n).
    #[serde(default = "default_degenerate_orders")]
    pub degenerate_orders: usize,
    /// Mode count entering d(n); the model's N when absent.
    #[serde(default)]
    pub degenerate_modes: Option<usize>,
    #[serde(default = "default_moment_tol")]
    pub tolerance: f64,
    /// Also run the measure with the point mass omitted.
    #[serde(default)]
    pub corrected: bool,
}

fn default_herm_tol() -> f64 {
    1e-12
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureBlock {
    #[serde(default = "default_herm_tol")]
    pub tolerance: f64,
    #[serde(default = "yes")]
    pub limits: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ndjson,
    Csv,
    #[default]
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A parse or validation failure; each message starts with the field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for m in &self.0 {
            writeln!(f, "config error: {m}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

pub fn parse(text: &str) -> Result<CampaignConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: CampaignConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError(vec![format!("{}: {}", if path == "." { "<root>".into() } else { path }, e.inner())])
    })?;
    let errors = validate(&cfg);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError(errors))
    }
}

fn check_values(errors: &mut Vec<String>, path: &str, xs: &[f64], nonneg: bool) {
    if xs.is_empty() {
        errors.push(format!("{path}: must not be empty"));
    }
    for (i, x) in xs.iter().enumerate() {
        if !x.is_finite() || (nonneg && *x < 0.0) {
            let what = if nonneg { "finite and nonnegative" } else { "finite" };
            errors.push(format!("{path}[{i}]: must be {what}, got {x}"));
        }
    }
}

/// Every semantic problem, each prefixed with its field path.
pub fn validate(cfg: &CampaignConfig) -> Vec<String> {
    let mut e = Vec::new();
    let m = &cfg.model;
    if let Err(err) = m.validate() {
        e.push(format!("model: {err}"));
    }
    let t = &cfg.truncation;
    if t.boson_cutoffs.len() != m.modes {
        e.push(format!("truncation.boson_cutoffs: {} entries for {} modes", t.boson_cutoffs.len(), m.modes));
    }
    if t.boson_cutoffs.contains(&0) {
        e.push("truncation.boson_cutoffs: cutoffs must be positive".into());
    }
    match (m.cm.is_some(), t.cm_cutoff.is_some()) {
        (true, false) => e.push("truncation.cm_cutoff: required when model.cm is given".into()),
        (false, true) => e.push("truncation.cm_cutoff: given without model.cm".into()),
        _ => {}
    }
    if !(t.tail_tolerance > 0.0 && t.tail_tolerance.is_finite()) {
        e.push("truncation.tail_tolerance: must be positive".into());
    }
    if let Some(ss) = &cfg.sectors {
        for (i, s) in ss.iter().enumerate() {
            if s.levels() != m.levels {
                e.push(format!("sectors[{i}]: {s} has {} bits, model has {} levels", s.levels(), m.levels));
            }
        }
    }
    if let Some(sp) = &cfg.spectrum {
        if sp.window == 0 {
            e.push("spectrum.window: must be positive".into());
        }
        for (i, v) in sp.variants.iter().enumerate() {
            if *v != SpectrumVariant::Diag && m.cm.is_none() {
                e.push(format!("spectrum.variants[{i}]: {v:?} requires model.cm"));
            }
            if matches!(v, SpectrumVariant::Extradiag | SpectrumVariant::General) && !m.has_extra() {
                e.push(format!("spectrum.variants[{i}]: {v:?} requires nonzero model.g_extra"));
            }
        }
        if sp.degeneracy_levels.is_some() && m.equal_frequency().is_none() {
            e.push("spectrum.degeneracy_levels: requires equal boson frequencies".into());
        }
    }
    let g = &cfg.grids;
    check_values(&mut e, "grids.J", &g.j, true);
    check_values(&mut e, "grids.gamma", &g.gamma, false);
    check_values(&mut e, "grids.theta", &g.theta, false);
    check_values(&mut e, "grids.J_prime", &g.j_prime, true);
    check_values(&mut e, "grids.gamma_prime", &g.gamma_prime, false);
    check_values(&mut e, "grids.h", &g.h, true);
    if g.h.len() < 2 || g.h.contains(&0.0) {
        e.push("grids.h: needs at least two positive step sizes".into());
    }
    if let Some(ts) = &g.t {
        check_values(&mut e, "grids.t", ts, false);
    }
    for (i, f) in cfg.families.iter().enumerate() {
        let spec = f.spec();
        if let Err(err) = spec.validate() {
            e.push(format!("families[{i}]: {err}"));
        }
        if spec.degenerate && m.equal_frequency().is_none() {
            e.push(format!("families[{i}].degenerate: requires equal boson frequencies"));
        }
        if spec.frame == FrameKind::Extradiag && !m.has_extra() {
            e.push(format!("families[{i}].frame: extradiag requires nonzero model.g_extra"));
        }
        if spec.has_cm() && m.cm.is_none() {
            e.push(format!("families[{i}].family: requires model.cm"));
        }
        if f.family == FamilyTag::SingleMode && m.modes != 1 {
            e.push(format!("families[{i}].family: single-mode needs a one-mode model"));
        }
        if f.checks().contains(&CheckKind::Resolution) && cfg.quadrature.is_none() {
            e.push(format!("families[{i}].checks: resolution needs a quadrature block"));
        }
        if f.cutoff == Some(0) {
            e.push(format!("families[{i}].cutoff: must be positive"));
        }
    }
    if let Some(q) = &cfg.quadrature {
        if q.q == 0 || q.q > 300 {
            e.push("quadrature.Q: must be in 1..=300".into());
        }
        if q.cutoff == 0 {
            e.push("quadrature.cutoff: must be positive".into());
        }
        if q.k == Some(0) || q.k_theta == Some(0) {
            e.push("quadrature: grid sizes must be positive".into());
        }
    }
    if let Some(mo) = &cfg.moments {
        if mo.q == 0 || mo.q > 300 {
            e.push("moments.Q: must be in 1..=300".into());
        }
        if mo.degenerate_orders > 2 * mo.q.max(1) - 1 {
            e.push("moments.degenerate_orders: exceeds the exactness degree 2Q − 1".into());
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"modes": 1, "levels": 1, "omega": [1.0], "epsilon": [0.5], "g_diag": [0.2]},
        "truncation": {"boson_cutoffs": [10]}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert!(c.families.is_empty());
        assert_eq!(c.truncation.tail_tolerance, 1e-10);
        assert_eq!(c.grids.h, vec![1e-2, 1e-3, 1e-4]);
    }

    #[test]
    fn parse_errors_carry_paths() {
        let bad = MINIMAL.replace("\"omega\": [1.0]", "\"omega\": [\"x\"]");
        let err = parse(&bad).unwrap_err();
        assert!(err.0[0].starts_with("model.omega[0]"), "{err}");
        let unknown = MINIMAL.replace("\"levels\": 1,", "\"levels\": 1, \"bogus\": 3,");
        assert!(parse(&unknown).unwrap_err().0[0].contains("bogus"));
    }

    #[test]
    fn validation_reports_every_problem() {
        let bad = MINIMAL
            .replace("\"boson_cutoffs\": [10]", "\"boson_cutoffs\": [10, 3], \"cm_cutoff\": 4")
            .replace("\"epsilon\": [0.5]", "\"epsilon\": [0.5, 0.1]");
        let err = parse(&bad).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("model:"), "{text}");
        assert!(text.contains("truncation.boson_cutoffs"), "{text}");
        assert!(text.contains("truncation.cm_cutoff"), "{text}");
    }

    #[test]
    fn sector_bit_strings() {
        let c = parse(&MINIMAL.replace("\"truncation\"", "\"sectors\": [\"1\", \"0\"], \"truncation\"")).unwrap();
        assert_eq!(c.sectors.unwrap().len(), 2);
    }
}
