//! Gazeau-Klauder coherent-state families on the truncated space.
//!
//! Amplitudes are built on the undisplaced label basis |m, [n]⟩ of an
//! [`EigenFrame`] and materialized by applying the frame's displacements.
//! Since the truncated displacements are exactly orthogonal, overlaps and
//! norms computed on labels equal the physical ones.

use crate::assembly::{eigen_frame, EigenFrame, FrameKind};
use crate::fock::{Factor, StateVector, TruncationSpec};
use crate::model::{compositions, degeneracy, ModelParams, SectorId};
use crate::{param, Error, Result, C64};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// 𝒩(J) = e^J, shared by every family here.
pub fn normalization(j: f64) -> Result<f64> {
    if !(j >= 0.0 && j.is_finite()) {
        return param(format!("action must be finite and nonnegative, got {j}"));
    }
    Ok(j.exp())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// e^{-J} Jⁿ / n!
pub fn poisson_weight(j: f64, n: usize) -> f64 {
    if j == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * j.ln() - j - ln_factorial(n)).exp()
}

/// Upper bound on e^{-J} Σ_{n > n_max} Jⁿ/n!: the first omitted term over
/// 1 − J/(n_max + 2), capped at 1.
pub fn tail_bound(j: f64, n_max: usize) -> f64 {
    if j == 0.0 {
        return 0.0;
    }
    let r = j / (n_max as f64 + 2.0);
    if r >= 1.0 {
        return 1.0;
    }
    (poisson_weight(j, n_max + 1) / (1.0 - r)).min(1.0)
}

/// Smallest cutoff whose tail bound is at most `tol`.
pub fn required_cutoff(j: f64, tol: f64) -> usize {
    let mut n = 0;
    while tail_bound(j, n) > tol && n < 1_000_000 {
        n += 1;
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    SingleMode,
    Multimode,
    VcsVector,
    DegenerateTheta,
    /// Components labelled by the boson quanta, summed over m.
    TwoSectorN,
    /// Components labelled by m, summed over the boson quanta.
    TwoSectorM,
    Multidim,
}

/// Labels of one fermionic sector. Degenerate families use a single action
/// and angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorLabels {
    /// J_[k]_l
    pub action: Vec<f64>,
    /// γ_[k]_l
    pub angle: Vec<f64>,
    /// J'_[k]
    #[serde(default)]
    pub cm_action: Option<f64>,
    /// γ'
    #[serde(default)]
    pub cm_angle: Option<f64>,
}

impl SectorLabels {
    pub fn new(action: Vec<f64>, angle: Vec<f64>) -> Self {
        SectorLabels { action, angle, cm_action: None, cm_angle: None }
    }

    pub fn with_cm(mut self, action: f64, angle: f64) -> Self {
        self.cm_action = Some(action);
        self.cm_angle = Some(angle);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.action.len() != self.angle.len() || self.action.is_empty() {
            return param("actions and angles must be nonempty lists of equal length");
        }
        for &j in self.action.iter().chain(self.cm_action.iter()) {
            normalization(j)?;
        }
        if self.angle.iter().chain(self.cm_angle.iter()).any(|a| !a.is_finite()) {
            return param("angles must be finite");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkParams {
    pub sectors: BTreeMap<SectorId, SectorLabels>,
    /// θ of the degenerate families.
    #[serde(default)]
    pub theta: Option<f64>,
}

impl GkParams {
    pub fn single(k: SectorId, labels: SectorLabels) -> Self {
        GkParams { sectors: BTreeMap::from([(k, labels)]), theta: None }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for l in self.sectors.values() {
            l.validate()?;
        }
        if let Some(t) = self.theta {
            if !t.is_finite() {
                return param("θ must be finite");
            }
        }
        Ok(())
    }

    pub fn labels(&self, k: SectorId) -> Result<&SectorLabels> {
        self.sectors
            .get(&k)
            .ok_or_else(|| Error::Parameter(format!("no labels for sector {k}")))
    }
}

/// Label shift that temporal stability predicts after time t on sector k:
/// γ_l → γ_l + ω_l t when `omega` is given, γ' → γ' + Ωt when `cm_omega` is
/// given. A single-angle (degenerate) sector shifts by the first frequency.
pub fn shift(
    p: &GkParams,
    t: f64,
    k: SectorId,
    omega: Option<&[f64]>,
    cm_omega: Option<f64>,
) -> Result<GkParams> {
    let mut out = p.clone();
    let labels = out
        .sectors
        .get_mut(&k)
        .ok_or_else(|| Error::Parameter(format!("no labels for sector {k}")))?;
    if let Some(w) = omega {
        if labels.angle.len() == 1 {
            labels.angle[0] += w[0] * t;
        } else if labels.angle.len() == w.len() {
            for (a, wl) in labels.angle.iter_mut().zip(w) {
                *a += wl * t;
            }
        } else {
            return param("frequency list does not match the angle list");
        }
    }
    if let (Some(om), Some(a)) = (cm_omega, labels.cm_angle.as_mut()) {
        *a += om * t;
    }
    Ok(out)
}

/// One component of a (possibly multi-component) coherent state, stored as
/// sparse amplitudes on the frame's label basis, ascending in index.
///
/// `key` is the fixed label of the component: the flat boson index (or the
/// total quanta for degenerate families) when the bosons are fixed, m when
/// the c.m. label is fixed, and 0 for single-component families.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub key: usize,
    pub entries: Vec<(usize, C64)>,
}

#[derive(Clone, Debug)]
pub struct CoherentState {
    pub family: FamilySpec,
    pub frame: EigenFrame,
    pub components: Vec<Component>,
    /// Upper bound on the squared amplitude mass cut off by the truncation.
    pub tail: f64,
}

fn sparse_dot(a: &[(usize, C64)], b: &[(usize, C64)]) -> C64 {
    let (mut i, mut j) = (0, 0);
    let mut s = C64::new(0.0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1.conj() * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

impl CoherentState {
    /// Σ over components of ⟨c|c⟩.
    pub fn norm_sqr(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.entries.iter())
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Σ over matching components of ⟨self_c|other_c⟩.
    pub fn overlap(&self, other: &CoherentState) -> Result<C64> {
        self.frame.base.check_same(&other.frame.base)?;
        let theirs: HashMap<usize, &Component> = other.components.iter().map(|c| (c.key, c)).collect();
        Ok(self
            .components
            .iter()
            .filter_map(|c| theirs.get(&c.key).map(|o| sparse_dot(&c.entries, &o.entries)))
            .sum())
    }

    /// (Σ_c ‖self_c − other_c‖²)^{1/2}.
    pub fn distance(&self, other: &CoherentState) -> Result<f64> {
        let d2 = self.norm_sqr() + other.norm_sqr() - 2.0 * self.overlap(other)?.re;
        Ok(d2.max(0.0).sqrt())
    }

    /// Label-basis coefficient vector of one component.
    pub fn coefficients(&self, c: &Component) -> DVector<C64> {
        let mut v = DVector::zeros(self.frame.base.dim());
        for &(i, a) in &c.entries {
            v[i] = a;
        }
        v
    }

    /// Physical vectors of all components, keyed like the components.
    pub fn materialize(&self) -> Result<Vec<(usize, StateVector)>> {
        self.components
            .iter()
            .map(|c| Ok((c.key, self.frame.materialize(&self.coefficients(c))?)))
            .collect()
    }

    /// The physical vector of a single-component family.
    pub fn state(&self) -> Result<StateVector> {
        match self.components.len() {
            1 => self.frame.materialize(&self.coefficients(&self.components[0])),
            0 => Ok(StateVector::zeros(&self.frame.tag)),
            _ => Err(Error::Contract("family has several components".into())),
        }
    }
}

/// Which label is held fixed in a two-sector family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixed {
    /// Components labelled by the boson quanta; the c.m. series is summed.
    Bosons,
    /// Components labelled by m; the boson series is summed.
    CenterOfMass,
}

/// A family together with the eigenvectors it is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub degenerate: bool,
    pub frame: FrameKind,
}

impl FamilySpec {
    /// The family on its default eigenvectors: Φ for the boson-only
    /// families, the c.m.-diagonal ξ for the two-sector and multidimensional
    /// ones.
    pub fn of(tag: FamilyTag) -> Self {
        let frame = match tag {
            FamilyTag::SingleMode | FamilyTag::Multimode | FamilyTag::VcsVector | FamilyTag::DegenerateTheta => {
                FrameKind::Diag
            }
            _ => FrameKind::CmDiag,
        };
        FamilySpec { tag, degenerate: tag == FamilyTag::DegenerateTheta, frame }
    }

    pub fn degenerate(mut self) -> Self {
        self.degenerate = true;
        self
    }

    pub fn on(mut self, frame: FrameKind) -> Self {
        self.frame = frame;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.tag {
            FamilyTag::SingleMode | FamilyTag::Multimode | FamilyTag::VcsVector => {
                self.frame == FrameKind::Diag && !self.degenerate
            }
            FamilyTag::DegenerateTheta => self.frame == FrameKind::Diag && self.degenerate,
            FamilyTag::TwoSectorN | FamilyTag::TwoSectorM => {
                matches!(self.frame, FrameKind::CmDiag | FrameKind::Extradiag)
            }
            FamilyTag::Multidim => self.frame == FrameKind::CmDiag,
        };
        if ok {
            Ok(())
        } else {
            param(format!("family {:?} is not defined on {:?} eigenvectors", self.tag, self.frame))
        }
    }

    pub fn has_cm(&self) -> bool {
        matches!(self.tag, FamilyTag::TwoSectorN | FamilyTag::TwoSectorM | FamilyTag::Multidim)
    }

    /// Sign s of the c.m. phase e^{i s m γ'} as printed for the family.
    pub fn cm_phase_sign(&self) -> Option<f64> {
        match self.tag {
            FamilyTag::TwoSectorN | FamilyTag::TwoSectorM => Some(1.0),
            FamilyTag::Multidim => Some(-1.0),
            _ => None,
        }
    }

    pub fn sector_diagonal(&self) -> bool {
        matches!(self.frame, FrameKind::Diag | FrameKind::CmDiag)
    }

    /// Short stable name used in reports.
    pub fn name(&self) -> String {
        let tag = match self.tag {
            FamilyTag::SingleMode => "single-mode",
            FamilyTag::Multimode => "multimode",
            FamilyTag::VcsVector => "vcs-vector",
            FamilyTag::DegenerateTheta => "degenerate-theta",
            FamilyTag::TwoSectorN => "two-sector-n",
            FamilyTag::TwoSectorM => "two-sector-m",
            FamilyTag::Multidim => "multidim",
        };
        let mut s = tag.to_string();
        if self.degenerate && self.tag != FamilyTag::DegenerateTheta {
            s.push_str("-degenerate");
        }
        if self.frame == FrameKind::Extradiag {
            s.push_str("-extradiag");
        }
        s
    }
}

/// Label data of one basis index of the frame.
#[derive(Clone, Debug)]
struct Site {
    flat: usize,
    m: usize,
    n: Vec<usize>,
    total: usize,
    /// 1-based rank of n among the compositions of its total (degenerate only).
    rank: usize,
    boson_key: usize,
}

/// Builds coherent states of one family and sector for arbitrary labels,
/// reusing the frame and the label bookkeeping.
#[derive(Clone, Debug)]
pub struct Generator {
    pub family: FamilySpec,
    pub sector: SectorId,
    pub frame: EigenFrame,
    pub params: ModelParams,
    pub spec: TruncationSpec,
    pub omega: Vec<f64>,
    pub cm_omega: Option<f64>,
    pub boson_cutoffs: Vec<usize>,
    pub cm_cutoff: Option<usize>,
    /// Largest total quanta covered by a degenerate family.
    pub n_max: usize,
    sites: Vec<Site>,
}

impl Generator {
    pub fn new(params: &ModelParams, spec: &TruncationSpec, k: SectorId, family: FamilySpec) -> Result<Self> {
        family.validate()?;
        if family.degenerate && params.equal_frequency().is_none() {
            return Err(Error::Contract("degenerate family requires equal boson frequencies".into()));
        }
        let cm_omega = if family.has_cm() {
            if spec.cm_cutoff.is_none() {
                return param("family needs a c.m. cutoff");
            }
            Some(params.cm_or_err()?.omega)
        } else {
            None
        };
        let mut frame = eigen_frame(family.frame, params, spec, k)?;
        if family.tag == FamilyTag::VcsVector {
            frame = frame.with_sector_slot()?;
        }
        let n_max = *spec.boson_cutoffs.iter().min().expect("at least one mode");
        let mut ranks = HashMap::new();
        if family.degenerate {
            for n in 0..=n_max {
                for (r, occ) in compositions(n, params.modes).into_iter().enumerate() {
                    ranks.insert(occ, r + 1);
                }
            }
        }
        let mut cm_factor = None;
        let mut mode_factors = Vec::new();
        for (f, factor) in frame.base.factors().iter().enumerate() {
            match factor {
                Factor::CenterOfMass { .. } => cm_factor = Some(f),
                Factor::Boson { .. } => mode_factors.push(f),
                _ => {}
            }
        }
        let boson_radix: Vec<usize> = spec.boson_cutoffs.iter().map(|c| c + 1).collect();
        let mut sites = Vec::with_capacity(frame.base.dim());
        for flat in 0..frame.base.dim() {
            let d = frame.base.digits(flat);
            let n: Vec<usize> = mode_factors.iter().map(|&f| d[f]).collect();
            let total = n.iter().sum();
            let boson_key = n.iter().zip(&boson_radix).fold(0, |acc, (x, r)| acc * r + x);
            let rank = if family.degenerate { ranks.get(&n).copied().unwrap_or(0) } else { 0 };
            sites.push(Site { flat, m: cm_factor.map_or(0, |f| d[f]), n, total, rank, boson_key });
        }
        Ok(Generator {
            family,
            sector: k,
            frame,
            params: params.clone(),
            spec: spec.clone(),
            omega: params.omega.clone(),
            cm_omega,
            boson_cutoffs: spec.boson_cutoffs.clone(),
            cm_cutoff: spec.cm_cutoff,
            n_max,
            sites,
        })
    }

    fn check_labels(&self, labels: &SectorLabels, theta: Option<f64>) -> Result<()> {
        labels.validate()?;
        if self.family.degenerate {
            if labels.action.len() != 1 {
                return param("degenerate family takes one action and one angle per sector");
            }
            if theta.is_none() {
                return param("degenerate family requires θ");
            }
        } else if labels.action.len() != self.omega.len() {
            return param(format!("{} actions given for {} modes", labels.action.len(), self.omega.len()));
        }
        if self.family.has_cm() && (labels.cm_action.is_none() || labels.cm_angle.is_none()) {
            return param("family requires the c.m. action J' and angle γ'");
        }
        Ok(())
    }

    /// Truncation tail of the family at these labels, with the per-index
    /// (action, cutoff) pairs it was summed from.
    pub fn tail(&self, labels: &SectorLabels) -> (f64, Vec<(f64, usize)>) {
        let mut per: Vec<(f64, usize)> = if self.family.degenerate {
            vec![(labels.action[0], self.n_max)]
        } else {
            labels.action.iter().copied().zip(self.boson_cutoffs.iter().copied()).collect()
        };
        if let (true, Some(j), Some(c)) = (self.family.has_cm(), labels.cm_action, self.cm_cutoff) {
            per.push((j, c));
        }
        (per.iter().map(|&(j, c)| tail_bound(j, c)).sum(), per)
    }

    /// Label-basis components without the tail check.
    pub fn components(&self, p: &GkParams) -> Result<Vec<Component>> {
        let labels = p.labels(self.sector)?;
        self.check_labels(labels, p.theta)?;
        let theta = p.theta.unwrap_or(0.0);
        let cm = if self.family.has_cm() {
            Some((labels.cm_action.unwrap_or(0.0), labels.cm_angle.unwrap_or(0.0), self.family.cm_phase_sign().unwrap_or(1.0)))
        } else {
            None
        };
        // √p(J, n) e^{i s n γ} per axis, so each site is a product of lookups.
        let table = |j: f64, g: f64, sign: f64, len: usize| -> Vec<C64> {
            (0..len).map(|n| C64::from_polar(poisson_weight(j, n).sqrt(), sign * n as f64 * g)).collect()
        };
        let mode_tables: Vec<Vec<C64>> = if self.family.degenerate {
            Vec::new()
        } else {
            labels
                .action
                .iter()
                .zip(&labels.angle)
                .zip(&self.boson_cutoffs)
                .map(|((&j, &g), &c)| table(j, g, -1.0, c + 1))
                .collect()
        };
        let (total_table, rank_table) = if self.family.degenerate {
            let mut t = table(labels.action[0], labels.angle[0], -1.0, self.n_max + 1);
            for (n, z) in t.iter_mut().enumerate() {
                *z /= (degeneracy(n, self.omega.len())? as f64).sqrt();
            }
            let ranks = self.sites.iter().map(|s| s.rank).max().unwrap_or(0);
            let r: Vec<C64> = (0..=ranks).map(|r| C64::from_polar(1.0, -(r as f64) * theta)).collect();
            (t, r)
        } else {
            (Vec::new(), Vec::new())
        };
        let cm_table = cm.map(|(jp, gp, sign)| table(jp, gp, sign, self.cm_cutoff.unwrap_or(0) + 1));
        let mut groups: Vec<Component> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        for s in &self.sites {
            let mut amp = if self.family.degenerate {
                if s.total > self.n_max {
                    continue;
                }
                total_table[s.total] * rank_table[s.rank]
            } else {
                s.n.iter().zip(&mode_tables).fold(C64::new(1.0, 0.0), |acc, (&nl, t)| acc * t[nl])
            };
            match &cm_table {
                Some(t) => amp *= t[s.m],
                None if s.m > 0 => continue,
                None => {}
            }
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let key = match self.family.tag {
                FamilyTag::TwoSectorN if self.family.degenerate => s.total,
                FamilyTag::TwoSectorN => s.boson_key,
                FamilyTag::TwoSectorM => s.m,
                _ => 0,
            };
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Component { key, entries: Vec::new() });
                groups.len() - 1
            });
            groups[g].entries.push((s.flat, amp));
        }
        Ok(groups)
    }

    /// The coherent state at these labels, refused when the truncation tail
    /// exceeds `tol`.
    pub fn build(&self, p: &GkParams, tol: f64) -> Result<CoherentState> {
        let labels = p.labels(self.sector)?;
        self.check_labels(labels, p.theta)?;
        let (tail, per) = self.tail(labels);
        if tail > tol {
            let share = tol / per.len() as f64;
            let required = per.iter().map(|&(j, _)| required_cutoff(j, share)).max().unwrap_or(0);
            return Err(Error::Tail { bound: tail, tolerance: tol, required });
        }
        Ok(CoherentState { family: self.family, frame: self.frame.clone(), components: self.components(p)?, tail })
    }

    /// Total quanta and composition rank of a label-basis index.
    pub fn site(&self, flat: usize) -> (Option<usize>, &[usize], usize) {
        let s = &self.sites[flat];
        (self.cm_cutoff.filter(|_| self.frame.cm_beta.is_some()).map(|_| s.m), &s.n, s.rank)
    }
}

/// Multimode state (product of single-mode Gazeau-Klauder series) on the
/// displaced eigenstates Φ^[k]_[n] of sector k.
pub fn gk_multimode(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    p: &GkParams,
    tol: f64,
) -> Result<CoherentState> {
    Generator::new(params, spec, k, FamilySpec::of(FamilyTag::Multimode))?.build(p, tol)
}

/// Single-mode state on mode `l` (0-based), every other mode in its
/// displaced ground state.
pub fn gk_single(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    l: usize,
    j: f64,
    gamma: f64,
    tol: f64,
) -> Result<CoherentState> {
    if l >= params.modes {
        return param(format!("mode {l} out of range"));
    }
    let mut action = vec![0.0; params.modes];
    let mut angle = vec![0.0; params.modes];
    action[l] = j;
    angle[l] = gamma;
    let p = GkParams::single(k, SectorLabels::new(action, angle));
    Generator::new(params, spec, k, FamilySpec::of(FamilyTag::SingleMode))?.build(&p, tol)
}

/// The 2^M-slot vector state: the multimode state of sector k in slot k.
pub fn vcs_vector(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    p: &GkParams,
    tol: f64,
) -> Result<CoherentState> {
    Generator::new(params, spec, k, FamilySpec::of(FamilyTag::VcsVector))?.build(p, tol)
}

/// Equal-frequency family with the extra angle θ.
pub fn gk_degenerate(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    p: &GkParams,
    tol: f64,
) -> Result<CoherentState> {
    Generator::new(params, spec, k, FamilySpec::of(FamilyTag::DegenerateTheta))?.build(p, tol)
}

/// Infinite-component families on ξ^[k]_{m,[n]} with the c.m. phase e^{+imγ'}.
/// `frame` selects the c.m.-diagonal or extradiagonal eigenvectors.
#[allow(clippy::too_many_arguments)]
pub fn vcs_two_sector(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    p: &GkParams,
    fixed: Fixed,
    frame: FrameKind,
    degenerate: bool,
    tol: f64,
) -> Result<CoherentState> {
    let tag = match fixed {
        Fixed::Bosons => FamilyTag::TwoSectorN,
        Fixed::CenterOfMass => FamilyTag::TwoSectorM,
    };
    let mut fam = FamilySpec::of(tag).on(frame);
    fam.degenerate = degenerate;
    Generator::new(params, spec, k, fam)?.build(p, tol)
}

/// Doubly summed state over (m, [n]) with the c.m. phase e^{−imγ'}.
pub fn vcs_multidim(
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    p: &GkParams,
    degenerate: bool,
    tol: f64,
) -> Result<CoherentState> {
    let mut fam = FamilySpec::of(FamilyTag::Multidim);
    fam.degenerate = degenerate;
    Generator::new(params, spec, k, fam)?.build(p, tol)
}

/// Amplitudes of slot `k` of a state on bosons ⊗ C^{2^M}.
pub fn sector_slot(psi: &StateVector, k: SectorId) -> Result<DVector<C64>> {
    let tag = psi.tag();
    let f = tag
        .fermion_factor()
        .ok_or_else(|| Error::Parameter("state has no fermionic factor".into()))?;
    let idx: Vec<usize> = (0..tag.dim()).filter(|&i| tag.digits(i)[f] == k.index()).collect();
    Ok(DVector::from_iterator(idx.len(), idx.iter().map(|&i| psi.amplitudes()[i])))
}
