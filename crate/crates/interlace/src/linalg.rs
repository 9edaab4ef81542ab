//! Dense hermitian matrices, spectral helpers and the ensemble constructions
//! used by the partition code (positive/negative parts, rank-one completion,
//! block-diagonal lifting).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for conjugate symmetry of input entries.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative slack on the smallest eigenvalue in PSD checks.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on the largest eigenvalue when testing `sum <= I`.
pub const IDENTITY_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates conjugate symmetry within `tol * (1 + max|entry|)` and stores
    /// the symmetrized matrix `(M + M*) / 2`.
    pub fn make_hermitian(entries: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let d = entries.len();
        if d == 0 {
            return Err(Error::EmptyMatrix);
        }
        for row in entries {
            if row.len() != d {
                return Err(Error::NotSquare { rows: d, cols: row.len() });
            }
        }
        let m = DMatrix::from_fn(d, d, |j, k| entries[j][k]);
        Self::from_matrix(m, tol)
    }

    pub fn from_matrix(m: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let allowed = tol * (1.0 + scale);
        let mut deviation: f64 = 0.0;
        for j in 0..rows {
            for k in j..rows {
                deviation = deviation.max((m[(j, k)] - m[(k, j)].conj()).norm());
            }
        }
        if !(deviation <= allowed) {
            return Err(Error::NotHermitian { deviation, tolerance: allowed });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation. Used for matrices that are hermitian
    /// by construction and only carry rounding asymmetry.
    pub(crate) fn symmetrized(m: DMatrix<Complex64>) -> Self {
        let adj = m.adjoint();
        HermitianMatrix { data: (m + adj).scale(0.5) }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let entries: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::make_hermitian(&entries, HERMITIAN_TOL)
    }

    pub fn diag(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "diag of an empty list");
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        HermitianMatrix { data: DMatrix::from_diagonal(&v) }
    }

    pub fn identity(d: usize) -> Self {
        HermitianMatrix { data: DMatrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        HermitianMatrix { data: DMatrix::zeros(d, d) }
    }

    /// `scale * v v*`.
    pub fn outer(v: &DVector<Complex64>, scale: f64) -> Self {
        Self::symmetrized((v * v.adjoint()).scale(scale))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.data[(j, k)]
    }

    pub fn entries(&self) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        (0..d).map(|j| (0..d).map(|k| self.data[(j, k)]).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|j| self.data[(j, j)].re).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix { data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix { data: &self.data - &other.data }
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix { data: self.data.scale(s) }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum_i coeffs[i] * mats[i]`; an empty list gives the zero matrix of `dim`.
    pub fn linear_combination(dim: usize, mats: &[&HermitianMatrix], coeffs: &[f64]) -> Self {
        debug_assert_eq!(mats.len(), coeffs.len());
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for (m, &c) in mats.iter().zip(coeffs) {
            if c != 0.0 {
                acc += m.data.scale(c);
            }
        }
        HermitianMatrix { data: acc }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.0)
    }

    /// Eigenvalues (ascending) and matching unit eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let d = self.dim();
        let eig = SymmetricEigen::try_new(self.data.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::NumericalFailure("hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
        }
        let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.first().unwrap().abs().max(ev.last().unwrap().abs()))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().unwrap())
    }

    pub fn is_psd(&self) -> Result<bool> {
        let ev = self.eigenvalues()?;
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        Ok(ev[0] >= -PSD_TOL * (1.0 + norm))
    }

    /// `(H+, H-)` with `H = H+ - H-`, both PSD and with orthogonal ranges.
    pub fn positive_negative_parts(&self) -> Result<(Self, Self)> {
        let (vals, vecs) = self.eigh()?;
        let plus: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
        let minus: Vec<f64> = vals.iter().map(|&l| (-l).max(0.0)).collect();
        Ok((spectral(&vecs, &plus), spectral(&vecs, &minus)))
    }

    /// `H+ + H-`.
    pub fn abs(&self) -> Result<Self> {
        let (vals, vecs) = self.eigh()?;
        let a: Vec<f64> = vals.iter().map(|l| l.abs()).collect();
        Ok(spectral(&vecs, &a))
    }

    /// Splits `I - A` into rank-one PSD pieces of trace at most `epsilon`.
    /// An eigenvalue `lambda` becomes `ceil(lambda / epsilon)` equal copies of its
    /// eigenprojector scaled by `lambda / ceil(lambda / epsilon)`.
    pub fn rank_one_completion(&self, epsilon: f64) -> Result<Vec<Self>> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        let (vals, vecs) = self.eigh()?;
        let d = self.dim();
        let norm = vals[0].abs().max(vals[d - 1].abs());
        if vals[0] < -PSD_TOL * (1.0 + norm) {
            return Err(Error::NotPsd { index: 0, min_eigenvalue: vals[0] });
        }
        if vals[d - 1] > 1.0 + IDENTITY_TOL {
            return Err(Error::NotContraction { max_eigenvalue: vals[d - 1] });
        }
        let mut out = Vec::new();
        for (j, &a) in vals.iter().enumerate() {
            let lambda = (1.0 - a).max(0.0);
            if lambda <= 1e-13 {
                continue;
            }
            let copies = (lambda / epsilon).ceil().max(1.0);
            // guard against lambda/epsilon landing a hair above an integer
            let copies = if lambda / (copies - 1.0) <= epsilon * (1.0 + 1e-12) && copies > 1.0 {
                copies - 1.0
            } else {
                copies
            };
            let piece = HermitianMatrix::outer(&vecs.column(j).into_owned(), lambda / copies);
            for _ in 0..copies as usize {
                out.push(piece.clone());
            }
        }
        Ok(out)
    }

    /// Places `scale * A` in diagonal block `slot` (1-based) of an `r`-block matrix.
    pub fn block_diagonal_lift(&self, r: usize, slot: usize, scale: f64) -> Result<Self> {
        if r == 0 || slot == 0 || slot > r {
            return Err(Error::BadSlot { slot, blocks: r });
        }
        let d = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(d * r, d * r);
        let off = (slot - 1) * d;
        m.view_mut((off, off), (d, d)).copy_from(&self.data.scale(scale));
        Ok(HermitianMatrix { data: m })
    }

    /// Block diagonal matrix with the given blocks in order.
    pub fn block_diagonal(blocks: &[&HermitianMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let d = b.dim();
            m.view_mut((off, off), (d, d)).copy_from(&b.data);
            off += d;
        }
        HermitianMatrix { data: m }
    }
}

fn spectral(vecs: &DMatrix<Complex64>, vals: &[f64]) -> HermitianMatrix {
    let d = vals.len();
    let scaled = DMatrix::from_fn(d, d, |r, c| vecs[(r, c)] * vals[c]);
    HermitianMatrix::symmetrized(scaled * vecs.adjoint())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEnsemble {
    dim: usize,
    matrices: Vec<HermitianMatrix>,
}

impl MatrixEnsemble {
    pub fn new(matrices: Vec<HermitianMatrix>) -> Result<Self> {
        let first = matrices.first().ok_or(Error::EmptyEnsemble)?;
        let dim = first.dim();
        for m in &matrices {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
        }
        Ok(MatrixEnsemble { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn get(&self, i: usize) -> &HermitianMatrix {
        &self.matrices[i]
    }

    pub fn sum(&self) -> HermitianMatrix {
        self.weighted_sum(&vec![1.0; self.len()])
    }

    pub fn weighted_sum(&self, coeffs: &[f64]) -> HermitianMatrix {
        let refs: Vec<&HermitianMatrix> = self.matrices.iter().collect();
        HermitianMatrix::linear_combination(self.dim, &refs, coeffs)
    }

    /// Sum over the selected indices.
    pub fn subset_sum(&self, indices: &[usize]) -> HermitianMatrix {
        let mut c = vec![0.0; self.len()];
        for &i in indices {
            c[i] = 1.0;
        }
        self.weighted_sum(&c)
    }

    /// Index of the first member that fails the PSD check, if any.
    pub fn first_non_psd(&self) -> Result<Option<(usize, f64)>> {
        for (i, m) in self.matrices.iter().enumerate() {
            if !m.is_psd()? {
                return Ok(Some((i, m.min_eigenvalue()?)));
            }
        }
        Ok(None)
    }

    pub fn require_psd(&self) -> Result<()> {
        match self.first_non_psd()? {
            Some((index, min_eigenvalue)) => Err(Error::NotPsd { index, min_eigenvalue }),
            None => Ok(()),
        }
    }

    pub fn stats(&self) -> Result<EnsembleStats> {
        ensemble_stats(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub epsilon: f64,
    pub sum_norm: f64,
    pub sum_max_eigenvalue: f64,
    pub sum_leq_identity: bool,
    pub all_psd: bool,
}

pub fn ensemble_stats(e: &MatrixEnsemble) -> Result<EnsembleStats> {
    let epsilon = e.matrices.iter().map(|m| m.trace()).fold(f64::NEG_INFINITY, f64::max);
    let ev = e.sum().eigenvalues()?;
    let max_ev = ev[ev.len() - 1];
    Ok(EnsembleStats {
        epsilon,
        sum_norm: ev[0].abs().max(max_ev.abs()),
        sum_max_eigenvalue: max_ev,
        sum_leq_identity: max_ev <= 1.0 + IDENTITY_TOL,
        all_psd: e.first_non_psd()?.is_none(),
    })
}
