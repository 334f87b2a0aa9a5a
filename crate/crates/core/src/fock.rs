//! Truncated Fock spaces: labelled tensor bases, ladder operators, fermionic
//! hops between sectors, displacement operators and unitary evolution.
//!
//! Factor order is c.m. ⊗ bosons ⊗ fermion; flat indices are row-major, so the
//! fermionic factor (when materialized) varies fastest.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::model::{SectorId, MAX_LEVELS};
use crate::{param, Error, Result, C64};

/// Hermiticity tolerance for operator contracts.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Boson mode l, 0-based.
    Boson(usize),
    CenterOfMass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Factor {
    CenterOfMass { cutoff: usize },
    Boson { mode: usize, cutoff: usize },
    /// The full 2^M fermionic factor.
    Fermion { levels: usize },
    /// Unlabelled factor of a given dimension.
    Aux { dim: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::CenterOfMass { cutoff } | Factor::Boson { cutoff, .. } => cutoff + 1,
            Factor::Fermion { levels } => 1 << levels,
            Factor::Aux { dim } => dim,
        }
    }
}

/// Identifies the basis an operator or state lives on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BasisTag {
    factors: Vec<Factor>,
}

impl BasisTag {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut dim: usize = 1;
        for f in &factors {
            if let Factor::Fermion { levels } = f {
                if *levels == 0 || *levels > MAX_LEVELS {
                    return param(format!("fermion level count {levels} out of range"));
                }
            }
            if f.dim() == 0 {
                return param("basis factor of dimension 0");
            }
            dim = dim
                .checked_mul(f.dim())
                .ok_or_else(|| Error::Overflow("basis dimension".into()))?;
        }
        for (i, f) in factors.iter().enumerate() {
            let dup = factors[..i].iter().any(|g| match (f, g) {
                (Factor::CenterOfMass { .. }, Factor::CenterOfMass { .. }) => true,
                (Factor::Fermion { .. }, Factor::Fermion { .. }) => true,
                (Factor::Boson { mode: a, .. }, Factor::Boson { mode: b, .. }) => a == b,
                _ => false,
            });
            if dup {
                return param(format!("factor {f:?} appears twice"));
            }
        }
        Ok(BasisTag { factors })
    }

    pub fn aux(dim: usize) -> Result<Self> {
        BasisTag::new(vec![Factor::Aux { dim }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    /// Product of the dimensions after factor `f`.
    pub fn stride(&self, f: usize) -> usize {
        self.factors[f + 1..].iter().map(Factor::dim).product()
    }

    pub fn factor_of(&self, mode: Mode) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| match (mode, f) {
                (Mode::CenterOfMass, Factor::CenterOfMass { .. }) => true,
                (Mode::Boson(l), Factor::Boson { mode, .. }) => *mode == l,
                _ => false,
            })
            .ok_or_else(|| Error::Parameter(format!("mode {mode:?} not present in basis")))
    }

    pub fn fermion_factor(&self) -> Option<usize> {
        self.factors
            .iter()
            .position(|f| matches!(f, Factor::Fermion { .. }))
    }

    pub fn flat_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.factors.len() {
            return param("digit count differs from factor count");
        }
        let mut idx = 0;
        for (d, f) in digits.iter().zip(&self.factors) {
            if *d >= f.dim() {
                return param(format!("occupation {d} beyond factor {f:?}"));
            }
            idx = idx * f.dim() + d;
        }
        Ok(idx)
    }

    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            out[i] = flat % f.dim();
            flat /= f.dim();
        }
        out
    }

    pub fn concat(&self, other: &BasisTag) -> Result<BasisTag> {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        BasisTag::new(f)
    }

    pub(crate) fn check_same(&self, other: &BasisTag) -> Result<()> {
        if self != other {
            return param("basis tags differ");
        }
        Ok(())
    }
}

/// Per-mode cutoffs of the truncated space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub boson_cutoffs: Vec<usize>,
    #[serde(default)]
    pub cm_cutoff: Option<usize>,
    /// M
    pub levels: usize,
}

impl TruncationSpec {
    pub fn new(boson_cutoffs: Vec<usize>, cm_cutoff: Option<usize>, levels: usize) -> Result<Self> {
        let s = TruncationSpec {
            boson_cutoffs,
            cm_cutoff,
            levels,
        };
        s.full_tag()?;
        Ok(s)
    }

    pub fn uniform(modes: usize, cutoff: usize, cm_cutoff: Option<usize>, levels: usize) -> Result<Self> {
        TruncationSpec::new(vec![cutoff; modes], cm_cutoff, levels)
    }

    fn boson_factors(&self) -> impl Iterator<Item = Factor> + '_ {
        self.boson_cutoffs
            .iter()
            .enumerate()
            .map(|(mode, &cutoff)| Factor::Boson { mode, cutoff })
    }

    /// Bosons only.
    pub fn boson_tag(&self) -> Result<BasisTag> {
        BasisTag::new(self.boson_factors().collect())
    }

    /// c.m. (when present) ⊗ bosons; one fermionic sector implied.
    pub fn sector_tag(&self) -> Result<BasisTag> {
        let mut f: Vec<Factor> = self
            .cm_cutoff
            .map(|cutoff| Factor::CenterOfMass { cutoff })
            .into_iter()
            .collect();
        f.extend(self.boson_factors());
        BasisTag::new(f)
    }

    /// c.m. ⊗ bosons ⊗ 2^M fermionic factor.
    pub fn full_tag(&self) -> Result<BasisTag> {
        if self.boson_cutoffs.is_empty() {
            return param("at least one boson mode is required");
        }
        let mut f = self.sector_tag()?.factors;
        f.push(Factor::Fermion { levels: self.levels });
        BasisTag::new(f)
    }
}

/// Occupation labels of one basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub cm: Option<usize>,
    pub occupations: Vec<usize>,
    pub sector: Option<SectorId>,
}

impl BasisIndex {
    pub fn flat(&self, tag: &BasisTag) -> Result<usize> {
        let mut digits = Vec::with_capacity(tag.factors.len());
        let mut next_boson = 0;
        for f in &tag.factors {
            match f {
                Factor::CenterOfMass { .. } => digits.push(
                    self.cm
                        .ok_or_else(|| Error::Parameter("c.m. occupation missing".into()))?,
                ),
                Factor::Boson { .. } => {
                    let n = *self
                        .occupations
                        .get(next_boson)
                        .ok_or_else(|| Error::Parameter("too few boson occupations".into()))?;
                    digits.push(n);
                    next_boson += 1;
                }
                Factor::Fermion { levels } => {
                    let k = self
                        .sector
                        .ok_or_else(|| Error::Parameter("fermion sector missing".into()))?;
                    if k.levels() != *levels {
                        return param("sector level count differs from basis");
                    }
                    digits.push(k.index());
                }
                Factor::Aux { .. } => return param("auxiliary factors have no occupation labels"),
            }
        }
        if next_boson != self.occupations.len() {
            return param("too many boson occupations");
        }
        tag.flat_index(&digits)
    }

    pub fn from_flat(tag: &BasisTag, flat: usize) -> Result<Self> {
        let digits = tag.digits(flat);
        let mut out = BasisIndex {
            cm: None,
            occupations: Vec::new(),
            sector: None,
        };
        for (d, f) in digits.into_iter().zip(&tag.factors) {
            match f {
                Factor::CenterOfMass { .. } => out.cm = Some(d),
                Factor::Boson { .. } => out.occupations.push(d),
                Factor::Fermion { levels } => out.sector = Some(SectorId::new(*levels, d)?),
                Factor::Aux { .. } => return param("auxiliary factors have no occupation labels"),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    tag: BasisTag,
    data: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(tag: BasisTag, data: DMatrix<C64>) -> Result<Self> {
        let d = tag.dim();
        if data.nrows() != d || data.ncols() != d {
            return param(format!(
                "matrix is {}x{}, basis dimension is {d}",
                data.nrows(),
                data.ncols()
            ));
        }
        Ok(OperatorMatrix { tag, data })
    }

    pub fn identity(tag: &BasisTag) -> Self {
        let d = tag.dim();
        OperatorMatrix {
            tag: tag.clone(),
            data: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(tag: &BasisTag) -> Self {
        let d = tag.dim();
        OperatorMatrix {
            tag: tag.clone(),
            data: DMatrix::zeros(d, d),
        }
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }
    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            tag: self.tag.clone(),
            data: self.data.adjoint(),
        }
    }

    /// max |A − A†|
    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.data)
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        let tol = HERMITIAN_TOL * self.max_abs().max(1.0);
        if defect > tol {
            return Err(Error::Contract(format!(
                "operator is not Hermitian (max |A - A†| = {defect:.3e})"
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.tag.check_same(&other.tag)?;
        Ok(OperatorMatrix {
            tag: self.tag.clone(),
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.tag.check_same(&other.tag)?;
        Ok(OperatorMatrix {
            tag: self.tag.clone(),
            data: &self.data - &other.data,
        })
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.tag.check_same(&other.tag)?;
        Ok(OperatorMatrix {
            tag: self.tag.clone(),
            data: &self.data * &other.data,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        OperatorMatrix {
            tag: self.tag.clone(),
            data: &self.data * C64::new(s, 0.0),
        }
    }

    /// A + s·1
    pub fn shift(&self, s: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)] += s;
        }
        OperatorMatrix {
            tag: self.tag.clone(),
            data,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.tag.check_same(&psi.tag)?;
        Ok(StateVector {
            tag: self.tag.clone(),
            amps: &self.data * &psi.amps,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    tag: BasisTag,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(tag: BasisTag, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != tag.dim() {
            return param(format!(
                "state has {} amplitudes, basis dimension is {}",
                amps.len(),
                tag.dim()
            ));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return param("state has non-finite amplitudes");
        }
        Ok(StateVector { tag, amps })
    }

    pub fn basis(tag: &BasisTag, flat: usize) -> Result<Self> {
        if flat >= tag.dim() {
            return param("basis index out of range");
        }
        let mut amps = DVector::zeros(tag.dim());
        amps[flat] = C64::new(1.0, 0.0);
        Ok(StateVector {
            tag: tag.clone(),
            amps,
        })
    }

    pub fn zeros(tag: &BasisTag) -> Self {
        StateVector {
            tag: tag.clone(),
            amps: DVector::zeros(tag.dim()),
        }
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }
    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }
    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn scaled(&self, s: C64) -> Self {
        StateVector {
            tag: self.tag.clone(),
            amps: &self.amps * s,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Contract("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.tag.check_same(&other.tag)?;
        Ok(StateVector {
            tag: self.tag.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.tag.check_same(&other.tag)?;
        Ok(StateVector {
            tag: self.tag.clone(),
            amps: &self.amps - &other.amps,
        })
    }

    /// Applies `local` to one tensor factor, leaving the others untouched.
    pub fn apply_local(&self, local: &DMatrix<C64>, factor: usize) -> Result<Self> {
        let d = self
            .tag
            .factors
            .get(factor)
            .ok_or_else(|| Error::Parameter("factor index out of range".into()))?
            .dim();
        if local.nrows() != d || local.ncols() != d {
            return param("local operator dimension differs from factor");
        }
        let right = self.tag.stride(factor);
        let left = self.tag.dim() / (d * right);
        let mut out = DVector::zeros(self.amps.len());
        let mut fiber = DVector::<C64>::zeros(d);
        for a in 0..left {
            for c in 0..right {
                let base = a * d * right + c;
                for i in 0..d {
                    fiber[i] = self.amps[base + i * right];
                }
                let img = local * &fiber;
                for i in 0..d {
                    out[base + i * right] = img[i];
                }
            }
        }
        Ok(StateVector {
            tag: self.tag.clone(),
            amps: out,
        })
    }
}

/// ⟨u|v⟩, conjugate-linear in `u`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.tag.check_same(&v.tag)?;
    Ok(u.amps.dotc(&v.amps))
}

/// A ⊗ B with the factors of A first.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let tag = a.tag.concat(&b.tag)?;
    OperatorMatrix::new(tag, a.data.kronecker(&b.data))
}

pub fn tensor_states(u: &StateVector, v: &StateVector) -> Result<StateVector> {
    let tag = u.tag.concat(&v.tag)?;
    StateVector::new(tag, u.amps.kronecker(&v.amps))
}

/// ⟨ψ|H|ψ⟩ for Hermitian H.
pub fn expectation(h: &OperatorMatrix, psi: &StateVector) -> Result<f64> {
    h.require_hermitian()?;
    let z = inner(psi, &h.apply(psi)?)?;
    let scale = h.max_abs().max(1.0) * psi.norm_sqr().max(1.0);
    if z.im.abs() > 1e-10 * scale {
        return Err(Error::Contract(format!(
            "expectation has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// The annihilation matrix on a single factor of the given cutoff.
pub fn ladder_local(cutoff: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Places a single-factor matrix on factor `factor`, identity elsewhere.
pub fn embed(local: &DMatrix<C64>, factor: usize, tag: &BasisTag) -> Result<OperatorMatrix> {
    let d = tag
        .factors
        .get(factor)
        .ok_or_else(|| Error::Parameter("factor index out of range".into()))?
        .dim();
    if local.nrows() != d || local.ncols() != d {
        return param("local operator dimension differs from factor");
    }
    let right = tag.stride(factor);
    let left = tag.dim() / (d * right);
    let n = tag.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            let v = local[(i, j)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..left {
                let base = a * d * right;
                for c in 0..right {
                    m[(base + i * right + c, base + j * right + c)] = v;
                }
            }
        }
    }
    Ok(OperatorMatrix {
        tag: tag.clone(),
        data: m,
    })
}

/// Adds coeff · (⊗ listed locals) to `m`, identity on the unlisted factors.
pub(crate) fn add_product(
    m: &mut DMatrix<C64>,
    tag: &BasisTag,
    terms: &[(usize, &DMatrix<C64>)],
    coeff: C64,
) {
    let strides: Vec<usize> = (0..tag.factors.len()).map(|f| tag.stride(f)).collect();
    let n = tag.dim();
    let mut rows: Vec<(usize, C64)> = Vec::new();
    let mut next: Vec<(usize, C64)> = Vec::new();
    for col in 0..n {
        let digits = tag.digits(col);
        rows.clear();
        rows.push((col, coeff));
        for &(f, local) in terms {
            next.clear();
            let d = digits[f];
            for (row, amp) in &rows {
                for i in 0..local.nrows() {
                    let v = local[(i, d)];
                    if v != C64::new(0.0, 0.0) {
                        let r = row - d * strides[f] + i * strides[f];
                        next.push((r, amp * v));
                    }
                }
            }
            std::mem::swap(&mut rows, &mut next);
        }
        for &(r, v) in &rows {
            m[(r, col)] += v;
        }
    }
}

fn mode_cutoff(tag: &BasisTag, mode: Mode) -> Result<(usize, usize)> {
    let f = tag.factor_of(mode)?;
    Ok((f, tag.factors[f].dim() - 1))
}

pub fn annihilate(mode: Mode, tag: &BasisTag) -> Result<OperatorMatrix> {
    let (f, cutoff) = mode_cutoff(tag, mode)?;
    embed(&ladder_local(cutoff), f, tag)
}

pub fn create(mode: Mode, tag: &BasisTag) -> Result<OperatorMatrix> {
    let (f, cutoff) = mode_cutoff(tag, mode)?;
    embed(&ladder_local(cutoff).adjoint(), f, tag)
}

pub fn number(mode: Mode, tag: &BasisTag) -> Result<OperatorMatrix> {
    let (f, cutoff) = mode_cutoff(tag, mode)?;
    let local = DMatrix::from_diagonal(&DVector::from_fn(cutoff + 1, |n, _| C64::new(n as f64, 0.0)));
    embed(&local, f, tag)
}

/// a + a† on one mode.
pub fn quadrature(mode: Mode, tag: &BasisTag) -> Result<OperatorMatrix> {
    let (f, cutoff) = mode_cutoff(tag, mode)?;
    let a = ladder_local(cutoff);
    embed(&(&a + a.adjoint()), f, tag)
}

/// e^{β(a† − a)} on a single factor, from the truncated generator.
pub fn displacement_local(beta: f64, cutoff: usize) -> Result<DMatrix<C64>> {
    if !beta.is_finite() {
        return param("displacement amplitude must be finite");
    }
    let n = cutoff + 1;
    let mut g = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let s = beta * (k as f64).sqrt();
        g[(k, k - 1)] = s;
        g[(k - 1, k)] = -s;
    }
    let d = linalg::expm_real(&g);
    Ok(d.map(|x| C64::new(x, 0.0)))
}

pub fn displacement(mode: Mode, beta: f64, tag: &BasisTag) -> Result<OperatorMatrix> {
    let (f, cutoff) = mode_cutoff(tag, mode)?;
    embed(&displacement_local(beta, cutoff)?, f, tag)
}

/// Image of Ψ_[k] under c†_j c_l.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HopImage {
    Annihilated,
    Mapped { sector: SectorId, sign: f64 },
}

fn occupied_before(k: SectorId, j: usize) -> usize {
    (1..j).filter(|&i| k.k(i) == 1).count()
}

/// c†_j c_l (1 ≤ j, l ≤ M) on every Ψ_[k] = (c†_1)^{k_1} … (c†_M)^{k_M} |0⟩,
/// listed by sector index.
pub fn fermion_hop(j: usize, l: usize, levels: usize) -> Result<Vec<HopImage>> {
    if j == 0 || l == 0 || j > levels || l > levels {
        return param(format!("fermion levels ({j}, {l}) outside 1..={levels}"));
    }
    SectorId::all(levels)?
        .into_iter()
        .map(|k| {
            if k.k(l) == 0 {
                return Ok(HopImage::Annihilated);
            }
            let mut sign = if occupied_before(k, l) % 2 == 0 { 1.0 } else { -1.0 };
            let mid = k.with_bit(l, 0);
            if mid.k(j) == 1 {
                return Ok(HopImage::Annihilated);
            }
            if occupied_before(mid, j) % 2 == 1 {
                sign = -sign;
            }
            Ok(HopImage::Mapped {
                sector: mid.with_bit(j, 1),
                sign,
            })
        })
        .collect()
}

/// c†_j c_l as a 2^M × 2^M matrix on the fermionic factor.
pub fn fermion_hop_local(j: usize, l: usize, levels: usize) -> Result<DMatrix<C64>> {
    let map = fermion_hop(j, l, levels)?;
    let d = 1 << levels;
    let mut m = DMatrix::zeros(d, d);
    for (src, img) in map.into_iter().enumerate() {
        if let HopImage::Mapped { sector, sign } = img {
            m[(sector.index(), src)] = C64::new(sign, 0.0);
        }
    }
    Ok(m)
}

/// c†_j c_l embedded on a basis with a fermionic factor.
pub fn fermion_hop_operator(j: usize, l: usize, tag: &BasisTag) -> Result<OperatorMatrix> {
    let f = tag
        .fermion_factor()
        .ok_or_else(|| Error::Parameter("basis has no fermionic factor".into()))?;
    let Factor::Fermion { levels } = tag.factors[f] else { unreachable!() };
    embed(&fermion_hop_local(j, l, levels)?, f, tag)
}

/// Cached eigendecomposition of a Hermitian generator for repeated evolution.
#[derive(Clone, Debug)]
pub struct Propagator {
    tag: BasisTag,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        h.require_hermitian()?;
        let (values, vectors) = linalg::hermitian_eigen(&h.data)?;
        Ok(Propagator {
            tag: h.tag.clone(),
            values,
            vectors,
        })
    }

    /// e^{−iHt}ψ
    pub fn apply(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        self.tag.check_same(&psi.tag)?;
        let mut c = self.vectors.ad_mul(&psi.amps);
        for (ci, e) in c.iter_mut().zip(&self.values) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        Ok(StateVector {
            tag: self.tag.clone(),
            amps: &self.vectors * c,
        })
    }
}

/// e^{−iHt}ψ via eigendecomposition.
pub fn evolve(h: &OperatorMatrix, t: f64, psi: &StateVector) -> Result<StateVector> {
    h.tag.check_same(&psi.tag)?;
    Propagator::new(h)?.apply(t, psi)
}
