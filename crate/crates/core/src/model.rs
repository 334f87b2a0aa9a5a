//! Physical parameters, fermionic sector arithmetic, degeneracy counting and
//! the closed-form energies of every Hamiltonian variant.
//!
//! Indices follow the physics convention in the public API where noted:
//! fermion levels `j` run over `1..=M`. Boson modes are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{param, Error, Result};

/// Which c.m. couplings the general Hamiltonian keeps: the diagonal one
/// (x = δ), the extradiagonal one (x = 1 − δ), or both.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XCoupling {
    Diagonal,
    Extradiagonal,
    #[default]
    Full,
}

impl XCoupling {
    pub fn keeps_diagonal(self) -> bool {
        matches!(self, XCoupling::Diagonal | XCoupling::Full)
    }
    pub fn keeps_extradiagonal(self) -> bool {
        matches!(self, XCoupling::Extradiagonal | XCoupling::Full)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterOfMass {
    /// Ω
    pub omega: f64,
    /// g'
    pub g_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// N
    pub modes: usize,
    /// M
    pub levels: usize,
    pub omega: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub g_diag: Vec<f64>,
    /// g_{iαα'} indexed `[i][α][α']`, 0-based. Only α ≠ α' entries are used.
    #[serde(default)]
    pub g_extra: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub cm: Option<CenterOfMass>,
    #[serde(default)]
    pub x_coupling: XCoupling,
}

pub const MAX_LEVELS: usize = 20;

impl ModelParams {
    /// Diagonal-coupling model without c.m. mode.
    pub fn diagonal(omega: Vec<f64>, epsilon: Vec<f64>, g_diag: Vec<f64>) -> Result<Self> {
        let p = ModelParams {
            modes: omega.len(),
            levels: epsilon.len(),
            omega,
            epsilon,
            g_diag,
            g_extra: None,
            cm: None,
            x_coupling: XCoupling::Full,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cm(mut self, omega: f64, g_prime: f64) -> Result<Self> {
        self.cm = Some(CenterOfMass { omega, g_prime });
        self.validate()?;
        Ok(self)
    }

    pub fn with_extra(mut self, g_extra: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        self.g_extra = Some(g_extra);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return param("model.modes must be >= 1");
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return param(format!("model.levels must be in 1..={MAX_LEVELS}"));
        }
        if self.omega.len() != self.modes {
            return param(format!(
                "model.omega has {} entries, expected {}",
                self.omega.len(),
                self.modes
            ));
        }
        if self.epsilon.len() != self.levels {
            return param(format!(
                "model.epsilon has {} entries, expected {}",
                self.epsilon.len(),
                self.levels
            ));
        }
        if self.g_diag.len() != self.levels {
            return param(format!(
                "model.g_diag has {} entries, expected {}",
                self.g_diag.len(),
                self.levels
            ));
        }
        for (l, w) in self.omega.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return param(format!("model.omega[{l}] must be finite and > 0"));
            }
        }
        let finite = |v: &[f64], name: &str| -> Result<()> {
            match v.iter().position(|x| !x.is_finite()) {
                Some(i) => param(format!("model.{name}[{i}] is not finite")),
                None => Ok(()),
            }
        };
        finite(&self.epsilon, "epsilon")?;
        finite(&self.g_diag, "g_diag")?;
        if let Some(cm) = &self.cm {
            if !(cm.omega.is_finite() && cm.omega > 0.0) {
                return param("model.cm.omega must be finite and > 0");
            }
            if !cm.g_prime.is_finite() {
                return param("model.cm.g_prime is not finite");
            }
        }
        if let Some(t) = &self.g_extra {
            if t.len() != self.modes {
                return param(format!("model.g_extra has {} mode blocks, expected {}", t.len(), self.modes));
            }
            for (i, block) in t.iter().enumerate() {
                if block.len() != self.levels || block.iter().any(|r| r.len() != self.levels) {
                    return param(format!(
                        "model.g_extra[{i}] must be a {0}x{0} table",
                        self.levels
                    ));
                }
                for a in 0..self.levels {
                    for b in 0..self.levels {
                        let v = block[a][b];
                        if !v.is_finite() {
                            return param(format!("model.g_extra[{i}][{a}][{b}] is not finite"));
                        }
                        if a == b && v != 0.0 {
                            return param(format!(
                                "model.g_extra[{i}][{a}][{a}] must be 0; diagonal couplings belong in g_diag"
                            ));
                        }
                        if v != block[b][a] {
                            return param(format!(
                                "model.g_extra[{i}] must be symmetric (entry [{a}][{b}] differs from [{b}][{a}])"
                            ));
                        }
                    }
                }
            }
            self.eps_nm()?;
        }
        Ok(())
    }

    /// g_{iαα'} with 0-based indices; zero when no table is given.
    pub fn g_extra(&self, i: usize, a: usize, b: usize) -> f64 {
        self.g_extra.as_ref().map_or(0.0, |t| t[i][a][b])
    }

    /// ε_{N,M}: number of nonzero g_{ijl} (j ≠ l) at fixed i. Rejects
    /// tables whose count depends on i.
    pub fn eps_nm(&self) -> Result<usize> {
        let Some(t) = &self.g_extra else { return Ok(0) };
        let counts: Vec<usize> = t
            .iter()
            .map(|block| {
                let mut c = 0;
                for (a, row) in block.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        if a != b && *v != 0.0 {
                            c += 1;
                        }
                    }
                }
                c
            })
            .collect();
        if counts.windows(2).any(|w| w[0] != w[1]) {
            return param(format!(
                "nonzero extradiagonal coupling count differs between modes: {counts:?}"
            ));
        }
        Ok(counts[0])
    }

    pub fn has_extra(&self) -> bool {
        self.eps_nm().map_or(false, |c| c > 0)
    }

    /// The common frequency when all ω_l agree exactly.
    pub fn equal_frequency(&self) -> Option<f64> {
        let w = self.omega[0];
        self.omega.iter().all(|&x| x == w).then_some(w)
    }

    pub fn cm_or_err(&self) -> Result<CenterOfMass> {
        self.cm
            .ok_or_else(|| Error::Parameter("variant requires the c.m. block (Ω, g')".into()))
    }
}

/// A fermionic multi-index [k] = k_1 … k_M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorId {
    levels: u8,
    /// Row-major index: k_1 is the most significant bit.
    index: u32,
}

impl SectorId {
    pub fn new(levels: usize, index: usize) -> Result<Self> {
        if levels == 0 || levels > MAX_LEVELS {
            return param(format!("sector level count {levels} out of range"));
        }
        if index >= 1 << levels {
            return param(format!("sector index {index} out of range for M={levels}"));
        }
        Ok(SectorId {
            levels: levels as u8,
            index: index as u32,
        })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return param("sector bits must be 0 or 1");
            }
            index = (index << 1) | b as usize;
        }
        SectorId::new(bits.len(), index)
    }

    pub fn all(levels: usize) -> Result<Vec<SectorId>> {
        SectorId::new(levels, 0)?;
        (0..1usize << levels).map(|i| SectorId::new(levels, i)).collect()
    }

    pub fn levels(&self) -> usize {
        self.levels as usize
    }

    /// Position of Ψ_[k] in the 2^M fermionic factor.
    pub fn index(&self) -> usize {
        self.index as usize
    }

    /// k_j for 1 ≤ j ≤ M.
    pub fn k(&self, j: usize) -> u8 {
        debug_assert!(j >= 1 && j <= self.levels());
        ((self.index >> (self.levels() - j)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.levels()).map(|j| self.k(j)).collect()
    }

    pub fn weight(&self) -> usize {
        self.index.count_ones() as usize
    }

    pub fn with_bit(&self, j: usize, value: u8) -> SectorId {
        let mask = 1u32 << (self.levels() - j);
        let index = if value == 1 { self.index | mask } else { self.index & !mask };
        SectorId { levels: self.levels, index }
    }
}

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for SectorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bits: Result<Vec<u8>> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => param(format!("sector mask {s:?} must contain only 0 and 1")),
            })
            .collect();
        SectorId::from_bits(&bits?)
    }
}

impl Serialize for SectorId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SectorId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorDerived {
    pub sector: SectorId,
    /// ε_[k]
    pub eps_k: f64,
    /// g_[k]
    pub g_k: f64,
    /// κ_[k]
    pub kappa_k: f64,
    /// α_[k]
    pub alpha_k: u8,
    /// Λ_[k]
    pub lambda_flag: u8,
    /// F_[k]
    pub f_flag: u8,
    /// g_{i[k]} per boson mode
    pub g_i_k: Vec<f64>,
    /// ε_{N,M}
    pub eps_nm: usize,
}

/// κ_[k] evaluated through the two-branch definition.
pub fn kappa(k: SectorId) -> f64 {
    let m = k.levels();
    if (1..=m).all(|j| k.k(j) == 1) {
        return m as f64;
    }
    let delta = |a: u8, b: u8| if a == b { 1.0 } else { 0.0 };
    0.5 * (1..=m)
        .map(|j| 1.0 - delta(k.k(j), 0) + delta(k.k(j), 1))
        .sum::<f64>()
}

/// κ_jl = (1 − δ_{k_j,1})(δ_{k_j,0} − δ_{k_l,0}) for 1 ≤ j, l ≤ M.
pub fn kappa_jl(k: SectorId, j: usize, l: usize) -> f64 {
    let d = |a: u8, b: u8| if a == b { 1.0 } else { 0.0 };
    (1.0 - d(k.k(j), 1)) * (d(k.k(j), 0) - d(k.k(l), 0))
}

/// Λ_[k] = Π_{j=1}^{M−1} δ_{k_j,k_{j+1}}.
pub fn lambda_flag(k: SectorId) -> u8 {
    (1..k.levels()).all(|j| k.k(j) == k.k(j + 1)) as u8
}

pub fn sector_scalars(params: &ModelParams, k: SectorId) -> Result<SectorDerived> {
    if k.levels() != params.levels {
        return param(format!(
            "sector {k} has {} levels, model has {}",
            k.levels(),
            params.levels
        ));
    }
    let m = params.levels;
    let eps_k = (1..=m).map(|j| k.k(j) as f64 * params.epsilon[j - 1]).sum();
    let g_k = (1..=m).map(|j| k.k(j) as f64 * params.g_diag[j - 1]).sum();
    let g_i_k = (0..params.modes)
        .map(|i| {
            let mut s = 0.0;
            for j in 1..=m {
                for l in 1..=m {
                    if j != l {
                        s += params.g_extra(i, j - 1, l - 1) * kappa_jl(k, j, l);
                    }
                }
            }
            s
        })
        .collect();
    let lam = lambda_flag(k);
    Ok(SectorDerived {
        sector: k,
        eps_k,
        g_k,
        kappa_k: kappa(k),
        alpha_k: 1 - lam,
        lambda_flag: lam,
        f_flag: 1 - lam,
        g_i_k,
        eps_nm: params.eps_nm()?,
    })
}

/// d(n) = C(n+N−1, n), the number of ways to place n quanta in N modes.
pub fn degeneracy(n: usize, modes: usize) -> Result<u64> {
    if modes == 0 {
        return param("degeneracy needs N >= 1");
    }
    let r = (modes - 1).min(n) as u128;
    let top = (n + modes - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=r {
        // acc * (top - r + i) / i stays exact: acc holds C(top-r+i-1, i-1).
        acc = acc
            .checked_mul(top - r + i)
            .ok_or_else(|| Error::Overflow(format!("d({n}) for N={modes}")))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(format!("d({n}) for N={modes} exceeds u64")))
}

/// Compositions of n into `modes` ordered parts, lexicographically ascending.
/// For N = 2 the j-th entry (1-based) is (j−1, n−j+1).
pub fn compositions(n: usize, modes: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=rest {
            prefix.push(first);
            rec(rest - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes > 0 {
        rec(n, modes, &mut Vec::with_capacity(modes), &mut out);
    }
    out
}

/// Occupations for the degenerate label (n, j), 1 ≤ j ≤ d(n).
pub fn degenerate_occupations(n: usize, j: usize, modes: usize) -> Result<Vec<usize>> {
    let d = degeneracy(n, modes)? as usize;
    if j == 0 || j > d {
        return param(format!("degenerate index j={j} outside 1..={d} for n={n}, N={modes}"));
    }
    if modes == 2 {
        return Ok(vec![j - 1, n + 1 - j]);
    }
    Ok(compositions(n, modes).swap_remove(j - 1))
}

/// The three explicit N = 3 label families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThreeModeFamily {
    /// (j−1, 0, n−j+1), 1 ≤ j ≤ n
    First,
    /// (0, j−1, n−j+1), 1 ≤ j ≤ n+1
    Second,
    /// (j−1, n−j+1, 0), 2 ≤ j ≤ n+1
    Third,
}

pub fn three_mode_occupations(family: ThreeModeFamily, n: usize, j: usize) -> Result<[usize; 3]> {
    let (lo, hi) = match family {
        ThreeModeFamily::First => (1, n),
        ThreeModeFamily::Second => (1, n + 1),
        ThreeModeFamily::Third => (2, n + 1),
    };
    if j < lo || j > hi {
        return param(format!("j={j} outside {lo}..={hi} for {family:?}, n={n}"));
    }
    Ok(match family {
        ThreeModeFamily::First => [j - 1, 0, n + 1 - j],
        ThreeModeFamily::Second => [0, j - 1, n + 1 - j],
        ThreeModeFamily::Third => [j - 1, n + 1 - j, 0],
    })
}

/// Ω_N = Σ ω_l n_l / Σ n_l.
pub fn average_frequency(n: &[usize], omega: &[f64]) -> Result<f64> {
    if n.len() != omega.len() {
        return param("occupation and frequency lists differ in length");
    }
    let total: usize = n.iter().sum();
    if total == 0 {
        return param("average frequency undefined when every occupation is zero");
    }
    let w: f64 = n.iter().zip(omega).map(|(&k, &w)| k as f64 * w).sum();
    Ok(w / total as f64)
}

fn check_occupations(params: &ModelParams, n: &[usize]) -> Result<()> {
    if n.len() != params.modes {
        return param(format!("expected {} occupations, got {}", params.modes, n.len()));
    }
    Ok(())
}

fn free_bosons(params: &ModelParams, n: &[usize]) -> f64 {
    n.iter().zip(&params.omega).map(|(&k, &w)| w * k as f64).sum()
}

/// E^[k]_{[n]} = Σ ω_l n_l + ε_[k] − g²_[k] Σ 1/ω_l.
pub fn energy_diag(params: &ModelParams, k: SectorId, n: &[usize]) -> Result<f64> {
    check_occupations(params, n)?;
    let s = sector_scalars(params, k)?;
    let inv: f64 = params.omega.iter().map(|w| 1.0 / w).sum();
    Ok(free_bosons(params, n) + s.eps_k - s.g_k * s.g_k * inv)
}

fn equal_omega(params: &ModelParams) -> Result<f64> {
    params.equal_frequency().ok_or_else(|| {
        Error::Contract("degenerate formulas need all boson frequencies equal".into())
    })
}

/// E^[k]_n = ωn + ε_[k] − N g²_[k]/ω for equal frequencies.
pub fn energy_diag_equal(params: &ModelParams, k: SectorId, n: usize) -> Result<f64> {
    let w = equal_omega(params)?;
    let s = sector_scalars(params, k)?;
    Ok(w * n as f64 + s.eps_k - params.modes as f64 * s.g_k * s.g_k / w)
}

fn cm_diag_part(params: &ModelParams, k: SectorId, m: usize) -> Result<f64> {
    let cm = params.cm_or_err()?;
    let gk = cm.g_prime * kappa(k);
    Ok(cm.omega * m as f64 - gk * gk / cm.omega)
}

/// (Ωm − g'²_κ/Ω) + E^[k]_{[n]}, with g'_κ = g'·κ_[k].
pub fn energy_cm_diag(params: &ModelParams, k: SectorId, m: usize, n: &[usize]) -> Result<f64> {
    Ok(cm_diag_part(params, k, m)? + energy_diag(params, k, n)?)
}

pub fn energy_cm_diag_degenerate(params: &ModelParams, k: SectorId, m: usize, n: usize) -> Result<f64> {
    Ok(cm_diag_part(params, k, m)? + energy_diag_equal(params, k, n)?)
}

/// Both printed forms of the extradiagonal energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtradiagEnergy {
    pub eig_form: f64,
    pub alpha_form: f64,
}

fn cm_pair(params: &ModelParams) -> (f64, f64) {
    params.cm.map_or((0.0, 0.0), |c| (c.omega, c.g_prime))
}

fn extradiag_fallback(
    params: &ModelParams,
    s: &SectorDerived,
    m: usize,
    bosons: f64,
    g_prime: f64,
) -> Result<Option<f64>> {
    if s.eps_nm > 0 {
        return Ok(None);
    }
    if g_prime != 0.0 {
        return param("extradiagonal c.m. coupling requested while ε_{N,M} = 0");
    }
    let (om, _) = cm_pair(params);
    Ok(Some(om * m as f64 + bosons + s.eps_k))
}

/// Extradiagonal closed forms. Where ε_{N,M} = 0 both forms fall back to the
/// decoupled energy Ωm + Σω n + ε_[k].
pub fn energy_extradiag(params: &ModelParams, k: SectorId, m: usize, n: &[usize]) -> Result<ExtradiagEnergy> {
    check_occupations(params, n)?;
    let s = sector_scalars(params, k)?;
    let (om, gp) = cm_pair(params);
    if m > 0 && params.cm.is_none() {
        return param("c.m. occupation given without c.m. mode");
    }
    let bosons = free_bosons(params, n);
    if let Some(e) = extradiag_fallback(params, &s, m, bosons, gp)? {
        return Ok(ExtradiagEnergy { eig_form: e, alpha_form: e });
    }
    let eps = s.eps_nm as f64;
    let cm_shift = if params.cm.is_some() { gp * gp / om } else { 0.0 };
    let mut eig = om * m as f64 - cm_shift;
    let mut lambda = -cm_shift;
    for i in 0..params.modes {
        let w = params.omega[i];
        let gi = s.g_i_k[i];
        eig += eps * w * n[i] as f64 - gi * gi / (eps * w);
        lambda += (eps - 1.0) * w * n[i] as f64 - gi * gi / (eps * w);
    }
    let alpha = om * m as f64 + bosons + s.eps_k + s.alpha_k as f64 * lambda;
    Ok(ExtradiagEnergy { eig_form: eig, alpha_form: alpha })
}

pub fn energy_extradiag_degenerate(params: &ModelParams, k: SectorId, m: usize, n: usize) -> Result<ExtradiagEnergy> {
    let w = equal_omega(params)?;
    let s = sector_scalars(params, k)?;
    let (om, gp) = cm_pair(params);
    let bosons = w * n as f64;
    if let Some(e) = extradiag_fallback(params, &s, m, bosons, gp)? {
        return Ok(ExtradiagEnergy { eig_form: e, alpha_form: e });
    }
    let eps = s.eps_nm as f64;
    let cm_shift = if params.cm.is_some() { gp * gp / om } else { 0.0 };
    let g2: f64 = s.g_i_k.iter().map(|g| g * g).sum();
    let eig = om * m as f64 - cm_shift + eps * w * n as f64 - g2 / (eps * w);
    let lambda = (eps - 1.0) * w * n as f64 - g2 / (w * eps) - cm_shift;
    let alpha = om * m as f64 + bosons + s.eps_k + s.alpha_k as f64 * lambda;
    Ok(ExtradiagEnergy { eig_form: eig, alpha_form: alpha })
}

/// Energies of the two halves of the general Hamiltonian and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneralEnergy {
    pub e1: f64,
    pub e2: f64,
    pub total: f64,
}

fn general_impl(params: &ModelParams, k: SectorId, m: usize, n: &[usize]) -> Result<GeneralEnergy> {
    let s = sector_scalars(params, k)?;
    let (om, gp) = cm_pair(params);
    if m > 0 && params.cm.is_none() {
        return param("c.m. occupation given without c.m. mode");
    }
    let g1 = if params.x_coupling.keeps_diagonal() { gp } else { 0.0 };
    let g2 = if params.x_coupling.keeps_extradiagonal() { gp } else { 0.0 };
    let gk = g1 * s.kappa_k;
    let mut e1 = om * m as f64 / 2.0 + s.eps_k / 2.0;
    if params.cm.is_some() {
        e1 -= 2.0 * gk * gk / om;
    }
    let mut e2 = om * m as f64 / 2.0 + s.eps_k / 2.0;
    for l in 0..params.modes {
        let w = params.omega[l];
        e1 += w * n[l] as f64 / 2.0 - 2.0 * s.g_k * s.g_k / w;
        e2 += w * n[l] as f64 / 2.0;
    }
    if s.alpha_k == 1 {
        if s.eps_nm == 0 {
            if g2 != 0.0 {
                return param("extradiagonal c.m. coupling requested while ε_{N,M} = 0");
            }
        } else {
            let eps = s.eps_nm as f64;
            let mut lambda = if params.cm.is_some() { -2.0 * g2 * g2 / om } else { 0.0 };
            for i in 0..params.modes {
                let w = params.omega[i];
                let gi = s.g_i_k[i];
                lambda += (eps - 1.0) * w * n[i] as f64 / 2.0 - 2.0 * gi * gi / (eps * w);
            }
            e2 += lambda;
        }
    }
    Ok(GeneralEnergy { e1, e2, total: e1 + e2 })
}

/// E = E₁ + E₂ for the general Hamiltonian (nondegenerate form).
pub fn energy_general(params: &ModelParams, k: SectorId, m: usize, n: &[usize]) -> Result<GeneralEnergy> {
    check_occupations(params, n)?;
    general_impl(params, k, m, n)
}

/// Equal-frequency form with n = Σ n_l. Only the total matters, so the quanta
/// are placed in the first mode.
pub fn energy_general_degenerate(params: &ModelParams, k: SectorId, m: usize, n: usize) -> Result<GeneralEnergy> {
    equal_omega(params)?;
    let mut occ = vec![0; params.modes];
    occ[0] = n;
    general_impl(params, k, m, &occ)
}

/// Formula families with closed-form spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaVariant {
    Diag,
    DiagEqualOmega,
    CmDiag,
    CmDiagDegenerate,
    Extradiag,
    ExtradiagDegenerate,
    General,
    GeneralDegenerate,
}

impl FormulaVariant {
    pub fn needs_cm(self) -> bool {
        !matches!(self, FormulaVariant::Diag | FormulaVariant::DiagEqualOmega)
            && !matches!(self, FormulaVariant::Extradiag | FormulaVariant::ExtradiagDegenerate)
    }
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            FormulaVariant::DiagEqualOmega
                | FormulaVariant::CmDiagDegenerate
                | FormulaVariant::ExtradiagDegenerate
                | FormulaVariant::GeneralDegenerate
        )
    }
    pub fn has_cm_label(self) -> bool {
        !matches!(self, FormulaVariant::Diag | FormulaVariant::DiagEqualOmega)
    }
}

/// Quantum numbers of one analytic level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LevelLabel {
    pub m: Option<usize>,
    pub n: Vec<usize>,
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = self.m {
            write!(f, "m={m};")?;
        }
        write!(f, "n=")?;
        for (i, x) in self.n.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub label: LevelLabel,
    pub energy: f64,
    /// Equivalent second closed form, where one exists (extradiagonal α-form).
    pub alt: Option<f64>,
}

/// Closed-form spectrum of one variant in one sector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumFormula {
    pub variant: FormulaVariant,
    pub sector: SectorId,
    pub ground_energy: f64,
}

impl SpectrumFormula {
    pub fn new(variant: FormulaVariant, params: &ModelParams, k: SectorId) -> Result<Self> {
        if variant.needs_cm() {
            params.cm_or_err()?;
        }
        if variant.is_degenerate() {
            equal_omega(params)?;
        }
        let zeros = vec![0; params.modes];
        let f = SpectrumFormula { variant, sector: k, ground_energy: 0.0 };
        let ground = f.energy(params, &LevelLabel { m: variant.has_cm_label().then_some(0), n: zeros })?;
        Ok(SpectrumFormula { ground_energy: ground.0, ..f })
    }

    /// Energy of a labelled level; degenerate variants use the total Σ n_l.
    pub fn energy(&self, params: &ModelParams, label: &LevelLabel) -> Result<(f64, Option<f64>)> {
        let k = self.sector;
        let m = label.m.unwrap_or(0);
        let n = &label.n;
        let total: usize = n.iter().sum();
        Ok(match self.variant {
            FormulaVariant::Diag => (energy_diag(params, k, n)?, None),
            FormulaVariant::DiagEqualOmega => (energy_diag_equal(params, k, total)?, None),
            FormulaVariant::CmDiag => (energy_cm_diag(params, k, m, n)?, None),
            FormulaVariant::CmDiagDegenerate => (energy_cm_diag_degenerate(params, k, m, total)?, None),
            FormulaVariant::Extradiag => {
                let e = energy_extradiag(params, k, m, n)?;
                (e.alpha_form, Some(e.eig_form))
            }
            FormulaVariant::ExtradiagDegenerate => {
                let e = energy_extradiag_degenerate(params, k, m, total)?;
                (e.alpha_form, Some(e.eig_form))
            }
            FormulaVariant::General => (energy_general(params, k, m, n)?.total, None),
            FormulaVariant::GeneralDegenerate => (energy_general_degenerate(params, k, m, total)?.total, None),
        })
    }

    /// All levels with m ≤ m_max and n_l ≤ n_max[l], ascending in energy.
    pub fn levels(&self, params: &ModelParams, m_max: usize, n_max: &[usize]) -> Result<Vec<Level>> {
        if n_max.len() != params.modes {
            return param("cutoff list length differs from mode count");
        }
        let ms: Vec<Option<usize>> = if self.variant.has_cm_label() && params.cm.is_some() {
            (0..=m_max).map(Some).collect()
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        let mut occ = vec![0usize; params.modes];
        loop {
            for &m in &ms {
                let label = LevelLabel { m, n: occ.clone() };
                let (energy, alt) = self.energy(params, &label)?;
                out.push(Level { label, energy, alt });
            }
            // odometer over occupations
            let mut i = 0;
            loop {
                if i == occ.len() {
                    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.label.cmp(&b.label)));
                    return Ok(out);
                }
                if occ[i] < n_max[i] {
                    occ[i] += 1;
                    break;
                }
                occ[i] = 0;
                i += 1;
            }
        }
    }
}
