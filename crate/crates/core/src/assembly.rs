//! Hamiltonian matrices for the four coupling variants, displaced
//! eigenvectors, and the numeric eigensolver used as an oracle.
//!
//! Sector-diagonal variants (`Diag`, `CmDiag`) are stored as one block per
//! fermionic sector on the bosonic (and c.m.) factors. The extradiagonal and
//! general variants mix sectors and are stored as one matrix on the full
//! space c.m. ⊗ bosons ⊗ C^{2^M}, fermionic factor last.

use crate::fock::{
    add_product, fermion_hop_local, ladder_local, BasisTag, Factor, OperatorMatrix, StateVector,
    TruncationSpec,
};
use crate::linalg;
use crate::model::{
    energy_cm_diag, energy_diag, energy_extradiag, kappa_jl, sector_scalars, ModelParams,
    SectorId,
};
use crate::{param, Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Diag,
    CmDiag,
    Extradiag,
    General,
}

impl Variant {
    pub fn is_sector_diagonal(self) -> bool {
        matches!(self, Variant::Diag | Variant::CmDiag)
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn number_local(cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |i, j| if i == j { c(i as f64) } else { c(0.0) })
}

fn quadrature_local(cutoff: usize) -> DMatrix<C64> {
    let a = ladder_local(cutoff);
    &a + a.adjoint()
}

/// Factor positions and local operators of a tag.
struct Locals {
    cm: Option<(usize, DMatrix<C64>, DMatrix<C64>)>,
    modes: Vec<(usize, DMatrix<C64>, DMatrix<C64>)>,
    fermion: Option<(usize, usize)>,
}

impl Locals {
    fn of(tag: &BasisTag) -> Locals {
        let mut l = Locals { cm: None, modes: Vec::new(), fermion: None };
        for (f, factor) in tag.factors().iter().enumerate() {
            match *factor {
                Factor::CenterOfMass { cutoff } => {
                    l.cm = Some((f, number_local(cutoff), quadrature_local(cutoff)))
                }
                Factor::Boson { cutoff, .. } => {
                    l.modes.push((f, number_local(cutoff), quadrature_local(cutoff)))
                }
                Factor::Fermion { levels } => l.fermion = Some((f, levels)),
                Factor::Aux { .. } => {}
            }
        }
        l
    }
}

/// In-place accumulation of product terms on a fixed basis.
struct Builder {
    tag: BasisTag,
    m: DMatrix<C64>,
}

impl Builder {
    fn new(tag: &BasisTag) -> Self {
        Builder { tag: tag.clone(), m: DMatrix::zeros(tag.dim(), tag.dim()) }
    }

    fn term(&mut self, terms: &[(usize, &DMatrix<C64>)], coeff: f64) {
        if coeff != 0.0 {
            add_product(&mut self.m, &self.tag, terms, c(coeff));
        }
    }

    fn constant(&mut self, coeff: f64) {
        for i in 0..self.m.nrows() {
            self.m[(i, i)] += c(coeff);
        }
    }

    fn finish(self) -> Result<OperatorMatrix> {
        OperatorMatrix::new(self.tag, self.m)
    }
}

fn check_modes(params: &ModelParams, spec: &TruncationSpec) -> Result<()> {
    params.validate()?;
    if spec.boson_cutoffs.len() != params.modes || spec.levels != params.levels {
        return param(format!(
            "truncation has {} modes and {} levels, model has {} and {}",
            spec.boson_cutoffs.len(),
            spec.levels,
            params.modes,
            params.levels
        ));
    }
    Ok(())
}

fn check_cm(params: &ModelParams, spec: &TruncationSpec, required: bool) -> Result<()> {
    match (params.cm.is_some(), spec.cm_cutoff.is_some()) {
        (true, false) => param("c.m. parameters given without a c.m. cutoff"),
        (false, true) => param("c.m. cutoff given without c.m. parameters"),
        (false, false) if required => param("variant requires the c.m. block (Ω, g')"),
        _ => Ok(()),
    }
}

/// One fermionic sector of a sector-diagonal variant.
#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub sector: SectorId,
    pub h: OperatorMatrix,
    /// Closed-form lowest energy E_[k]_0 subtracted by the shifted form.
    pub ground: f64,
}

impl SectorBlock {
    pub fn shifted(&self) -> OperatorMatrix {
        self.h.shift(-self.ground)
    }
}

/// Σ ω_l a†_l a_l + ε_[k] + g_[k] Σ_l (a_l + a_l†) on the listed boson factors.
fn add_diag_part(b: &mut Builder, locals: &Locals, params: &ModelParams, k: SectorId) -> Result<()> {
    let s = sector_scalars(params, k)?;
    for (l, (f, n, x)) in locals.modes.iter().enumerate() {
        b.term(&[(*f, n)], params.omega[l]);
        b.term(&[(*f, x)], s.g_k);
    }
    b.constant(s.eps_k);
    Ok(())
}

/// H_[k] of the diagonal variant on the bosonic factors.
///
/// The sector energy ε_[k] enters once, matching the closed-form spectrum.
pub fn diag_sector(params: &ModelParams, spec: &TruncationSpec, k: SectorId) -> Result<SectorBlock> {
    check_modes(params, spec)?;
    let tag = spec.boson_tag()?;
    let locals = Locals::of(&tag);
    let mut b = Builder::new(&tag);
    add_diag_part(&mut b, &locals, params, k)?;
    let zeros = vec![0; params.modes];
    Ok(SectorBlock { sector: k, h: b.finish()?, ground: energy_diag(params, k, &zeros)? })
}

/// The two commuting parts of a c.m.-diagonal sector block: H₁ acts on the
/// bosons, H₂ = Ωb†b − g'κ_[k](b + b†) on the c.m. factor.
#[derive(Clone, Debug)]
pub struct CmParts {
    pub h1: OperatorMatrix,
    pub h2: OperatorMatrix,
    pub ground1: f64,
    pub ground2: f64,
}

impl CmParts {
    pub fn shifted1(&self) -> OperatorMatrix {
        self.h1.shift(-self.ground1)
    }
    pub fn shifted2(&self) -> OperatorMatrix {
        self.h2.shift(-self.ground2)
    }
}

pub fn cm_diag_parts(params: &ModelParams, spec: &TruncationSpec, k: SectorId) -> Result<CmParts> {
    check_modes(params, spec)?;
    check_cm(params, spec, true)?;
    let cm = params.cm_or_err()?;
    let tag = spec.sector_tag()?;
    let locals = Locals::of(&tag);
    let s = sector_scalars(params, k)?;
    let mut b1 = Builder::new(&tag);
    add_diag_part(&mut b1, &locals, params, k)?;
    let mut b2 = Builder::new(&tag);
    let (f, n, x) = locals.cm.as_ref().expect("c.m. factor present");
    b2.term(&[(*f, n)], cm.omega);
    b2.term(&[(*f, x)], -cm.g_prime * s.kappa_k);
    let zeros = vec![0; params.modes];
    let gk = cm.g_prime * s.kappa_k;
    Ok(CmParts {
        h1: b1.finish()?,
        h2: b2.finish()?,
        ground1: energy_diag(params, k, &zeros)?,
        ground2: -gk * gk / cm.omega,
    })
}

/// H_[k] = H₁ + H₂ of the c.m.-diagonal variant on c.m. ⊗ bosons.
pub fn cm_diag_sector(params: &ModelParams, spec: &TruncationSpec, k: SectorId) -> Result<SectorBlock> {
    let parts = cm_diag_parts(params, spec, k)?;
    let zeros = vec![0; params.modes];
    Ok(SectorBlock {
        sector: k,
        h: parts.h1.add(&parts.h2)?,
        ground: energy_cm_diag(params, k, 0, &zeros)?,
    })
}

/// Matrices of one Hamiltonian variant with its shifted forms and named parts.
#[derive(Clone, Debug)]
pub struct HamiltonianBundle {
    pub variant: Variant,
    /// Per-sector blocks (sector-diagonal variants only).
    pub blocks: Vec<SectorBlock>,
    /// The matrix on the full space including the fermionic factor.
    pub full: OperatorMatrix,
    /// Lowest closed-form energy per sector, indexed by sector index.
    pub grounds: Vec<f64>,
    /// Named parts: "H1", "H2" (c.m.-diagonal); "H_bf", "H_cmf" (extradiagonal);
    /// "H1", "H2", "H_int", "H_bf", "H_cmf" (general), and their shifted
    /// forms with a trailing prime where defined.
    pub parts: Vec<(String, OperatorMatrix)>,
}

impl HamiltonianBundle {
    pub fn block(&self, k: SectorId) -> Option<&SectorBlock> {
        self.blocks.iter().find(|b| b.sector == k)
    }

    pub fn part(&self, name: &str) -> Option<&OperatorMatrix> {
        self.parts.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    /// H' = H − Σ_k E_[k]_0 ℙ_[k].
    pub fn shifted_full(&self) -> Result<OperatorMatrix> {
        subtract_sector_constants(&self.full, &self.grounds)
    }

    /// Largest Hermiticity defect over all stored matrices.
    pub fn max_hermitian_defect(&self) -> f64 {
        let mut d = self.full.hermitian_defect();
        for b in &self.blocks {
            d = d.max(b.h.hermitian_defect());
        }
        for (_, p) in &self.parts {
            d = d.max(p.hermitian_defect());
        }
        d
    }
}

/// Subtracts a constant per fermionic sector on a full-space operator.
pub fn subtract_sector_constants(h: &OperatorMatrix, constants: &[f64]) -> Result<OperatorMatrix> {
    let tag = h.tag();
    let f = tag
        .fermion_factor()
        .ok_or_else(|| Error::Parameter("operator has no fermionic factor".into()))?;
    let Factor::Fermion { levels } = tag.factors()[f] else { unreachable!() };
    if constants.len() != 1 << levels {
        return param("one constant per sector is required");
    }
    let mut m = h.matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= c(constants[tag.digits(i)[f]]);
    }
    OperatorMatrix::new(tag.clone(), m)
}

/// Block-diagonal assembly Σ_k H_[k] ⊗ |Ψ_[k]⟩⟨Ψ_[k]|, fermionic factor last.
fn block_diagonal(mats: &[&OperatorMatrix], levels: usize) -> Result<OperatorMatrix> {
    let base = mats[0].tag().clone();
    let tag = base.concat(&BasisTag::new(vec![Factor::Fermion { levels }])?)?;
    let s = 1usize << levels;
    let d = base.dim();
    let mut m = DMatrix::zeros(d * s, d * s);
    for (k, h) in mats.iter().enumerate() {
        for col in 0..d {
            for row in 0..d {
                m[(row * s + k, col * s + k)] = h.matrix()[(row, col)];
            }
        }
    }
    OperatorMatrix::new(tag, m)
}

pub fn build_diag(params: &ModelParams, spec: &TruncationSpec) -> Result<HamiltonianBundle> {
    check_modes(params, spec)?;
    let blocks = SectorId::all(params.levels)?
        .into_iter()
        .map(|k| diag_sector(params, spec, k))
        .collect::<Result<Vec<_>>>()?;
    let full = block_diagonal(&blocks.iter().map(|b| &b.h).collect::<Vec<_>>(), params.levels)?;
    let grounds = blocks.iter().map(|b| b.ground).collect();
    Ok(HamiltonianBundle { variant: Variant::Diag, blocks, full, grounds, parts: Vec::new() })
}

pub fn build_cm_diag(params: &ModelParams, spec: &TruncationSpec) -> Result<HamiltonianBundle> {
    check_modes(params, spec)?;
    check_cm(params, spec, true)?;
    let sectors = SectorId::all(params.levels)?;
    let mut blocks = Vec::new();
    let mut split = Vec::new();
    for &k in &sectors {
        let p = cm_diag_parts(params, spec, k)?;
        blocks.push(cm_diag_sector(params, spec, k)?);
        split.push(p);
    }
    let full = block_diagonal(&blocks.iter().map(|b| &b.h).collect::<Vec<_>>(), params.levels)?;
    let grounds = blocks.iter().map(|b| b.ground).collect();
    let h1 = block_diagonal(&split.iter().map(|p| &p.h1).collect::<Vec<_>>(), params.levels)?;
    let h2 = block_diagonal(&split.iter().map(|p| &p.h2).collect::<Vec<_>>(), params.levels)?;
    let g1: Vec<f64> = split.iter().map(|p| p.ground1).collect();
    let g2: Vec<f64> = split.iter().map(|p| p.ground2).collect();
    let parts = vec![
        ("H1'".to_string(), subtract_sector_constants(&h1, &g1)?),
        ("H2'".to_string(), subtract_sector_constants(&h2, &g2)?),
        ("H1".to_string(), h1),
        ("H2".to_string(), h2),
    ];
    Ok(HamiltonianBundle { variant: Variant::CmDiag, blocks, full, grounds, parts })
}

/// Local matrices c†_α c_α' on the fermionic factor, 0-based.
fn hop_locals(levels: usize) -> Result<Vec<Vec<DMatrix<C64>>>> {
    (1..=levels)
        .map(|a| (1..=levels).map(|b| fermion_hop_local(a, b, levels)).collect())
        .collect()
}

/// Σ_{α≠α'} c†_α c_α' on the fermionic factor.
fn off_diagonal_hops(levels: usize) -> Result<DMatrix<C64>> {
    let d = 1usize << levels;
    let mut s = DMatrix::zeros(d, d);
    for a in 1..=levels {
        for b in 1..=levels {
            if a != b {
                s += fermion_hop_local(a, b, levels)?;
            }
        }
    }
    Ok(s)
}

/// Σ_α c†_α c_α on the fermionic factor.
fn fermion_number(levels: usize) -> DMatrix<C64> {
    let d = 1usize << levels;
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c((i as u32).count_ones() as f64)
        } else {
            c(0.0)
        }
    })
}

/// Σ_α g_α c†_α c_α, i.e. g_[k] on sector [k].
fn fermion_gk(params: &ModelParams) -> Result<DMatrix<C64>> {
    let d = 1usize << params.levels;
    let mut m = DMatrix::zeros(d, d);
    for k in SectorId::all(params.levels)? {
        m[(k.index(), k.index())] = c(sector_scalars(params, k)?.g_k);
    }
    Ok(m)
}

/// Σ_α ε_α c†_α c_α.
fn fermion_eps(params: &ModelParams) -> Result<DMatrix<C64>> {
    let d = 1usize << params.levels;
    let mut m = DMatrix::zeros(d, d);
    for k in SectorId::all(params.levels)? {
        m[(k.index(), k.index())] = c(sector_scalars(params, k)?.eps_k);
    }
    Ok(m)
}

fn full_setup(params: &ModelParams, spec: &TruncationSpec) -> Result<(BasisTag, Locals, usize)> {
    check_modes(params, spec)?;
    check_cm(params, spec, false)?;
    let tag = spec.full_tag()?;
    let locals = Locals::of(&tag);
    let ff = locals.fermion.expect("full tag has a fermionic factor").0;
    Ok((tag, locals, ff))
}

/// Σ_i Σ_{α≠α'} g_{iαα'} (a_i + a_i†) c†_α c_α'.
fn add_extra_boson_coupling(
    b: &mut Builder,
    locals: &Locals,
    params: &ModelParams,
    hops: &[Vec<DMatrix<C64>>],
    ff: usize,
) {
    for (i, (f, _, x)) in locals.modes.iter().enumerate() {
        for a in 0..params.levels {
            for bb in 0..params.levels {
                if a != bb {
                    b.term(&[(*f, x), (ff, &hops[a][bb])], params.g_extra(i, a, bb));
                }
            }
        }
    }
}

/// Extradiagonal Hamiltonian
/// H = Ωb†b + Σω a†a + Σ ε_α n_α + Σ_{α≠α'} [Σ_i g_{iαα'}(a_i + a_i†) − g'(b + b†)] c†_α c_α'.
///
/// Parts: H^{b-f} and H^{cm-f} written with the κ_jl-weighted hops of the
/// rearranged form. As operators κ_jl c†_j c_l = c†_j c_l, so the two parts
/// add up to H plus (Σω a†a + Ωb†b) Σ_{j≠l} c†_j c_l.
pub fn build_extradiag(params: &ModelParams, spec: &TruncationSpec) -> Result<HamiltonianBundle> {
    let (tag, locals, ff) = full_setup(params, spec)?;
    let hops = hop_locals(params.levels)?;
    let off = off_diagonal_hops(params.levels)?;
    let eps = fermion_eps(params)?;

    let mut h = Builder::new(&tag);
    let mut bf = Builder::new(&tag);
    let mut cmf = Builder::new(&tag);
    for (l, (f, n, _)) in locals.modes.iter().enumerate() {
        h.term(&[(*f, n)], params.omega[l]);
        bf.term(&[(*f, n)], params.omega[l]);
        bf.term(&[(*f, n), (ff, &off)], params.omega[l]);
    }
    h.term(&[(ff, &eps)], 1.0);
    bf.term(&[(ff, &eps)], 1.0);
    add_extra_boson_coupling(&mut h, &locals, params, &hops, ff);
    add_extra_boson_coupling(&mut bf, &locals, params, &hops, ff);
    if let (Some(cm), Some((f, n, x))) = (params.cm, locals.cm.as_ref()) {
        h.term(&[(*f, n)], cm.omega);
        h.term(&[(*f, x), (ff, &off)], -cm.g_prime);
        cmf.term(&[(*f, n)], cm.omega);
        cmf.term(&[(*f, n), (ff, &off)], cm.omega);
        cmf.term(&[(*f, x), (ff, &off)], -cm.g_prime);
    }
    let zeros = vec![0; params.modes];
    let mut grounds = Vec::new();
    let mut g_bf = Vec::new();
    let mut g_cmf = Vec::new();
    let (om, gp) = params.cm.map_or((1.0, 0.0), |c| (c.omega, c.g_prime));
    for k in SectorId::all(params.levels)? {
        let s = sector_scalars(params, k)?;
        grounds.push(energy_extradiag(params, k, 0, &zeros)?.alpha_form);
        let alpha = s.alpha_k as f64;
        let lam: f64 = if s.eps_nm == 0 {
            0.0
        } else {
            let e = s.eps_nm as f64;
            (0..params.modes).map(|i| -s.g_i_k[i] * s.g_i_k[i] / (e * params.omega[i])).sum()
        };
        g_bf.push(s.eps_k + alpha * lam);
        g_cmf.push(if params.cm.is_some() && s.eps_nm > 0 { -alpha * gp * gp / om } else { 0.0 });
    }
    let bf = bf.finish()?;
    let cmf = cmf.finish()?;
    let parts = vec![
        ("H_bf'".to_string(), subtract_sector_constants(&bf, &g_bf)?),
        ("H_cmf'".to_string(), subtract_sector_constants(&cmf, &g_cmf)?),
        ("H_bf".to_string(), bf),
        ("H_cmf".to_string(), cmf),
    ];
    Ok(HamiltonianBundle { variant: Variant::Extradiag, blocks: Vec::new(), full: h.finish()?, grounds, parts })
}

/// General Hamiltonian H = H₁ + H₂ with the free terms halved in each part:
///
/// H₁ = (Ω/2)b†b + Σ(ω/2)a†a + ½Σε_α n_α + Σ_i Σ_α g_α n_α (a_i + a_i†) − g'N_f(b + b†),
/// H₂ = (Ω/2)b†b + Σ(ω/2)a†a + ½Σε_α n_α + Σ_{α≠α'}[Σ_i g_{iαα'}(a_i + a_i†) − g'(b + b†)] c†_α c_α'.
///
/// [`XCoupling`](crate::model::XCoupling) drops the c.m. coupling of H₁ or H₂.
pub fn build_general(params: &ModelParams, spec: &TruncationSpec) -> Result<HamiltonianBundle> {
    let (tag, locals, ff) = full_setup(params, spec)?;
    let hops = hop_locals(params.levels)?;
    let off = off_diagonal_hops(params.levels)?;
    let eps = fermion_eps(params)?;
    let gk = fermion_gk(params)?;
    let nf = fermion_number(params.levels);
    let (g1, g2) = params.cm.map_or((0.0, 0.0), |c| {
        (
            if params.x_coupling.keeps_diagonal() { c.g_prime } else { 0.0 },
            if params.x_coupling.keeps_extradiagonal() { c.g_prime } else { 0.0 },
        )
    });

    let mut h1 = Builder::new(&tag);
    let mut h2 = Builder::new(&tag);
    let mut int = Builder::new(&tag);
    let mut bf = Builder::new(&tag);
    let mut cmf = Builder::new(&tag);
    for (l, (f, n, x)) in locals.modes.iter().enumerate() {
        let w = params.omega[l];
        h1.term(&[(*f, n)], w / 2.0);
        h2.term(&[(*f, n)], w / 2.0);
        h1.term(&[(*f, x), (ff, &gk)], 1.0);
        bf.term(&[(*f, n)], w);
        bf.term(&[(*f, x), (ff, &gk)], 1.0);
        bf.term(&[(*f, n), (ff, &off)], w / 2.0);
        int.term(&[(*f, n), (ff, &off)], w / 2.0);
    }
    h1.term(&[(ff, &eps)], 0.5);
    h2.term(&[(ff, &eps)], 0.5);
    bf.term(&[(ff, &eps)], 1.0);
    add_extra_boson_coupling(&mut h2, &locals, params, &hops, ff);
    add_extra_boson_coupling(&mut int, &locals, params, &hops, ff);
    add_extra_boson_coupling(&mut bf, &locals, params, &hops, ff);
    if let (Some(cm), Some((f, n, x))) = (params.cm, locals.cm.as_ref()) {
        let om = cm.omega;
        h1.term(&[(*f, n)], om / 2.0);
        h1.term(&[(*f, x), (ff, &nf)], -g1);
        h2.term(&[(*f, n)], om / 2.0);
        h2.term(&[(*f, x), (ff, &off)], -g2);
        int.term(&[(*f, n), (ff, &off)], om / 2.0);
        int.term(&[(*f, x), (ff, &off)], -g2);
        cmf.term(&[(*f, n)], om);
        cmf.term(&[(*f, n), (ff, &off)], om / 2.0);
        cmf.term(&[(*f, x), (ff, &off)], -g2);
        cmf.term(&[(*f, x), (ff, &nf)], -g1);
    }
    let h1 = h1.finish()?;
    let h2 = h2.finish()?;
    let full = h1.add(&h2)?;

    let om = params.cm.map_or(1.0, |c| c.omega);
    let mut grounds = Vec::new();
    let mut g_bf = Vec::new();
    let mut g_cmf = Vec::new();
    let mut g1s = Vec::new();
    let mut g2s = Vec::new();
    let zeros = vec![0; params.modes];
    for k in SectorId::all(params.levels)? {
        let s = sector_scalars(params, k)?;
        let e = crate::model::energy_general(params, k, 0, &zeros)?;
        grounds.push(e.total);
        g1s.push(e.e1);
        g2s.push(e.e2);
        let alpha = s.alpha_k as f64;
        let lam: f64 = if s.eps_nm == 0 {
            0.0
        } else {
            let en = s.eps_nm as f64;
            (0..params.modes)
                .map(|i| -2.0 * s.g_i_k[i] * s.g_i_k[i] / (en * params.omega[i]))
                .sum()
        };
        g_bf.push(s.eps_k + alpha * lam);
        g_cmf.push(if params.cm.is_some() {
            -2.0 * (g1 * s.kappa_k).powi(2) / om - alpha * 2.0 * g2 * g2 / om
        } else {
            0.0
        });
    }
    let bf = bf.finish()?;
    let cmf = cmf.finish()?;
    let parts = vec![
        ("H1'".to_string(), subtract_sector_constants(&h1, &g1s)?),
        ("H2'".to_string(), subtract_sector_constants(&h2, &g2s)?),
        ("H_bf'".to_string(), subtract_sector_constants(&bf, &g_bf)?),
        ("H_cmf'".to_string(), subtract_sector_constants(&cmf, &g_cmf)?),
        ("H1".to_string(), h1),
        ("H2".to_string(), h2),
        ("H_int".to_string(), int.finish()?),
        ("H_bf".to_string(), bf),
        ("H_cmf".to_string(), cmf),
    ];
    Ok(HamiltonianBundle { variant: Variant::General, blocks: Vec::new(), full, grounds, parts })
}

/// Fermionic sectors reached from [k] by one hop c†_j c_l with κ_jl = 1,
/// preceded by [k] itself.
pub fn fermion_orbit(k: SectorId) -> Vec<SectorId> {
    let m = k.levels();
    let mut out = vec![k];
    for j in 1..=m {
        for l in 1..=m {
            if j != l && kappa_jl(k, j, l) == 1.0 {
                let img = k.with_bit(l, 0).with_bit(j, 1);
                if !out.contains(&img) {
                    out.push(img);
                }
            }
        }
    }
    out
}

/// Normalized equal-weight superposition over the orbit of [k].
pub fn orbit_state(k: SectorId) -> DVector<C64> {
    let orbit = fermion_orbit(k);
    let mut v = DVector::zeros(1 << k.levels());
    let a = 1.0 / (orbit.len() as f64).sqrt();
    for s in orbit {
        v[s.index()] = c(a);
    }
    v
}

/// How far the orbit state is from an eigenvector of Σ_{j≠l} c†_j c_l.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub sector: SectorId,
    pub orbit: Vec<SectorId>,
    pub rayleigh: f64,
    pub residual: f64,
}

pub fn orbit_report(k: SectorId) -> Result<OrbitReport> {
    let v = orbit_state(k);
    let o = off_diagonal_hops(k.levels())?;
    let ov = &o * &v;
    let rayleigh = v.dotc(&ov).re;
    let residual = (&ov - &v * c(rayleigh)).norm();
    Ok(OrbitReport { sector: k, orbit: fermion_orbit(k), rayleigh, residual })
}

/// Which eigenvector family a frame represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKind {
    /// Φ^[k]_[n] on the bosons.
    Diag,
    /// χ^[k]_m ⊗ Φ^[k]_[n] on c.m. ⊗ bosons.
    CmDiag,
    /// f(P)^F g(p)^F |m, [n]⟩ ⊗ Ψ on the full space.
    Extradiag,
    /// Eigenvectors of the general H₁ on the full space.
    GeneralFirst,
    /// Eigenvectors of the general H₂ on the full space.
    GeneralSecond,
}

/// Displacements per bosonic factor and a fixed fermionic vector. Eigenvectors
/// are D|m, [n]⟩ ⊗ ψ_f.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    pub kind: FrameKind,
    pub sector: SectorId,
    /// c.m. ⊗ bosons (c.m. only when present).
    pub base: BasisTag,
    pub tag: BasisTag,
    pub cm_beta: Option<f64>,
    pub mode_betas: Vec<f64>,
    pub fermion: Option<DVector<C64>>,
    displacements: Vec<DMatrix<C64>>,
}

impl EigenFrame {
    /// Applies the displacements to a coefficient vector on `base` and
    /// attaches the fermionic vector.
    pub fn materialize(&self, coeffs: &DVector<C64>) -> Result<StateVector> {
        let mut s = StateVector::new(self.base.clone(), coeffs.clone())?;
        for (f, d) in self.displacements.iter().enumerate() {
            s = s.apply_local(d, f)?;
        }
        match &self.fermion {
            None => Ok(s),
            Some(fv) => {
                let amps = s.amplitudes().kronecker(fv);
                StateVector::new(self.tag.clone(), amps)
            }
        }
    }

    /// Attaches Ψ_[k] as a fermionic factor to a frame that has none.
    pub fn with_sector_slot(mut self) -> Result<Self> {
        if self.fermion.is_some() {
            return Err(Error::Contract("frame already carries a fermionic vector".into()));
        }
        let levels = self.sector.levels();
        let mut e = DVector::zeros(1 << levels);
        e[self.sector.index()] = c(1.0);
        self.tag = self.base.concat(&BasisTag::new(vec![Factor::Fermion { levels }])?)?;
        self.fermion = Some(e);
        Ok(self)
    }

    /// Index on `base` of the number state |m, [n]⟩.
    pub fn base_index(&self, m: Option<usize>, n: &[usize]) -> Result<usize> {
        let mut digits = Vec::new();
        match (self.cm_beta.is_some(), m) {
            (true, Some(m)) => digits.push(m),
            (true, None) => digits.push(0),
            (false, None) => {}
            (false, Some(_)) => return param("c.m. label given for a frame without c.m. factor"),
        }
        if n.len() != self.mode_betas.len() {
            return param("occupation list length differs from mode count");
        }
        digits.extend_from_slice(n);
        self.base.flat_index(&digits)
    }

    pub fn state(&self, m: Option<usize>, n: &[usize]) -> Result<StateVector> {
        let idx = self.base_index(m, n)?;
        let mut v = DVector::zeros(self.base.dim());
        v[idx] = c(1.0);
        self.materialize(&v)
    }
}

pub fn eigen_frame(
    kind: FrameKind,
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
) -> Result<EigenFrame> {
    check_modes(params, spec)?;
    let s = sector_scalars(params, k)?;
    let needs_cm = !matches!(kind, FrameKind::Diag);
    if needs_cm {
        check_cm(params, spec, kind == FrameKind::CmDiag)?;
    }
    let base = if needs_cm { spec.sector_tag()? } else { spec.boson_tag()? };
    let has_cm = needs_cm && spec.cm_cutoff.is_some();
    let (om, gp) = params.cm.map_or((1.0, 0.0), |c| (c.omega, c.g_prime));
    let (g1, g2) = (
        if params.x_coupling.keeps_diagonal() { gp } else { 0.0 },
        if params.x_coupling.keeps_extradiagonal() { gp } else { 0.0 },
    );
    let f_on = s.f_flag == 1 && s.eps_nm > 0;
    let extra_betas = |scale: f64| -> Vec<f64> {
        (0..params.modes)
            .map(|i| {
                if f_on {
                    -scale * s.g_i_k[i] / (s.eps_nm as f64 * params.omega[i])
                } else {
                    0.0
                }
            })
            .collect()
    };
    let (cm_beta, mode_betas, fermion) = match kind {
        FrameKind::Diag => (None, params.omega.iter().map(|w| -s.g_k / w).collect(), None),
        FrameKind::CmDiag => (
            Some(gp * s.kappa_k / om),
            params.omega.iter().map(|w| -s.g_k / w).collect(),
            None,
        ),
        FrameKind::Extradiag => {
            (has_cm.then_some(if f_on { gp / om } else { 0.0 }), extra_betas(1.0), Some(orbit_state(k)))
        }
        FrameKind::GeneralFirst => {
            let mut e = DVector::zeros(1 << params.levels);
            e[k.index()] = c(1.0);
            (
                has_cm.then_some(2.0 * g1 * s.kappa_k / om),
                params.omega.iter().map(|w| -2.0 * s.g_k / w).collect(),
                Some(e),
            )
        }
        FrameKind::GeneralSecond => {
            let fermion = if f_on {
                orbit_state(k)
            } else {
                let mut e = DVector::zeros(1 << params.levels);
                e[k.index()] = c(1.0);
                e
            };
            (has_cm.then_some(if f_on { 2.0 * g2 / om } else { 0.0 }), extra_betas(2.0), Some(fermion))
        }
    };
    let tag = if fermion.is_some() { spec.full_tag()? } else { base.clone() };
    let mut displacements = Vec::new();
    if let Some(b) = cm_beta {
        displacements.push(crate::fock::displacement_local(b, spec.cm_cutoff.unwrap_or(0))?);
    }
    for (i, &b) in mode_betas.iter().enumerate() {
        displacements.push(crate::fock::displacement_local(b, spec.boson_cutoffs[i])?);
    }
    Ok(EigenFrame { kind, sector: k, base, tag, cm_beta, mode_betas, fermion, displacements })
}

/// Displaced eigenvector for explicit occupations.
pub fn displaced_eigenvector(
    kind: FrameKind,
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    m: Option<usize>,
    n: &[usize],
) -> Result<StateVector> {
    eigen_frame(kind, params, spec, k)?.state(m, n)
}

/// Displaced eigenvector for an equal-frequency label (n, j), 1 ≤ j ≤ d(n).
pub fn displaced_eigenvector_degenerate(
    kind: FrameKind,
    params: &ModelParams,
    spec: &TruncationSpec,
    k: SectorId,
    m: Option<usize>,
    n: usize,
    j: usize,
) -> Result<StateVector> {
    let occ = crate::model::degenerate_occupations(n, j, params.modes)?;
    displaced_eigenvector(kind, params, spec, k, m, &occ)
}

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub tag: BasisTag,
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigenpairs {
    pub fn vector(&self, i: usize) -> Result<StateVector> {
        if i >= self.values.len() {
            return param("eigenvector index out of range");
        }
        StateVector::new(self.tag.clone(), self.vectors.column(i).into_owned())
    }

    /// ‖H − VΛV†‖ in the Frobenius norm.
    pub fn reconstruction_error(&self, h: &OperatorMatrix) -> f64 {
        let mut vl = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            vl.column_mut(j).scale_mut(e);
        }
        (h.matrix() - vl * self.vectors.adjoint()).norm()
    }
}

pub fn numeric_spectrum(h: &OperatorMatrix) -> Result<Eigenpairs> {
    h.require_hermitian()?;
    let (values, vectors) = linalg::hermitian_eigen(h.matrix())?;
    Ok(Eigenpairs { tag: h.tag().clone(), values, vectors })
}

pub fn numeric_eigenvalues(h: &OperatorMatrix) -> Result<Vec<f64>> {
    h.require_hermitian()?;
    linalg::hermitian_eigenvalues(h.matrix())
}
