//! Dense kernels shared by the public modules: Hermitian eigensolver and the
//! matrix exponential of small real generators.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Largest |A_ij - conj(A_ji)|.
pub(crate) fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
/// Real symmetric input takes the cheaper real path.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if is_real(m) {
        let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let values = (0..n).map(|i| s[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0));
        Ok((values, vectors))
    } else {
        let a = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let values = (0..n).map(|i| s[i].re).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
        Ok((values, vectors))
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let solver_err = |e: faer::linalg::evd::EvdError| Error::Solver(format!("{e:?}"));
    if is_real(m) {
        let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        a.self_adjoint_eigenvalues(Side::Lower).map_err(solver_err)
    } else {
        let a = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
        a.self_adjoint_eigenvalues(Side::Lower).map_err(solver_err)
    }
}

/// e^G by scaling and squaring with a Taylor kernel.
pub(crate) fn expm_real(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let norm1 = (0..n)
        .map(|j| g.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = g * scale;
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &a / k as f64;
        result += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_accumulator_matches_outer_products() {
        let dim = 6;
        let mut gram = GramAccumulator::new(dim);
        let mut naive = DMatrix::<C64>::zeros(dim, dim);
        // 300 vectors cross a batch boundary; every third one is sparse.
        for t in 0..300 {
            let entries: Vec<(usize, C64)> = if t % 3 == 0 {
                vec![(t % dim, C64::new(0.3, -0.1 * t as f64)), ((t + 2) % dim, C64::new(-0.7, 0.2))]
            } else {
                (0..dim).map(|i| (i, C64::from_polar(1.0 / (1.0 + i as f64), 0.37 * (t * i) as f64))).collect()
            };
            let w = if t % 7 == 0 { -0.5 } else { 1.0 + t as f64 * 1e-3 };
            let mut v = nalgebra::DVector::<C64>::zeros(dim);
            for &(i, z) in &entries {
                v[i] += z;
            }
            naive += &v * v.adjoint() * C64::new(w, 0.0);
            gram.push(&entries, w);
        }
        let rel = max_abs(&(gram.finish() - &naive)) / max_abs(&naive);
        assert!(rel < 1e-13, "{rel}");
    }

    #[test]
    fn rotation_generator_exponentiates_to_rotation() {
        let th = 0.9;
        let g = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let r = expm_real(&g);
        assert!((r[(0, 0)] - th.cos()).abs() < 1e-15);
        assert!((r[(1, 0)] - th.sin()).abs() < 1e-15);
    }

    #[test]
    fn complex_hermitian_path() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert!(vals[0].abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        let rec = &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&v| C64::new(v, 0.0)))) * vecs.adjoint();
        assert!((rec - m).camax() < 1e-14);
    }
}

/// Accumulates Σ w |v⟩⟨v| over many sparse vectors, batching them into
/// dense blocks. With v = a + ib the sum splits into real products,
/// Re = Σ w (a aᵀ + b bᵀ) and Im = Σ w (b aᵀ − a bᵀ).
pub(crate) struct GramAccumulator {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    aw: DMatrix<f64>,
    bw: DMatrix<f64>,
    touched: Vec<Vec<usize>>,
    filled: usize,
}

impl GramAccumulator {
    const BATCH: usize = 256;

    pub(crate) fn new(dim: usize) -> Self {
        let block = || DMatrix::zeros(dim, Self::BATCH);
        GramAccumulator {
            re: DMatrix::zeros(dim, dim),
            im: DMatrix::zeros(dim, dim),
            a: block(),
            b: block(),
            aw: block(),
            bw: block(),
            touched: vec![Vec::new(); Self::BATCH],
            filled: 0,
        }
    }

    /// Vectors with at most half their entries nonzero go straight into the
    /// sums; denser ones are batched.
    pub(crate) fn push(&mut self, entries: &[(usize, C64)], w: f64) {
        if 2 * entries.len() <= self.re.nrows() {
            for &(i, x) in entries {
                let wx = x * w;
                for &(j, y) in entries {
                    let z = wx * y.conj();
                    self.re[(i, j)] += z.re;
                    self.im[(i, j)] += z.im;
                }
            }
            return;
        }
        let c = self.filled;
        for &(i, z) in entries {
            self.a[(i, c)] += z.re;
            self.b[(i, c)] += z.im;
            self.aw[(i, c)] += w * z.re;
            self.bw[(i, c)] += w * z.im;
            self.touched[c].push(i);
        }
        self.filled += 1;
        if self.filled == Self::BATCH {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.filled == 0 {
            return;
        }
        let at = self.a.transpose();
        let bt = self.b.transpose();
        self.re.gemm(1.0, &self.aw, &at, 1.0);
        self.re.gemm(1.0, &self.bw, &bt, 1.0);
        self.im.gemm(1.0, &self.bw, &at, 1.0);
        self.im.gemm(-1.0, &self.aw, &bt, 1.0);
        for c in 0..self.filled {
            for i in self.touched[c].drain(..) {
                self.a[(i, c)] = 0.0;
                self.b[(i, c)] = 0.0;
                self.aw[(i, c)] = 0.0;
                self.bw[(i, c)] = 0.0;
            }
        }
        self.filled = 0;
    }

    pub(crate) fn finish(mut self) -> DMatrix<C64> {
        self.flush();
        self.re.zip_map(&self.im, C64::new)
    }
}
