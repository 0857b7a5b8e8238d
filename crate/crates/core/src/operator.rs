//! Dense symmetric operator algebra.
//!
//! Everything downstream works on [`SymPosOperator`] values: validated,
//! exactly symmetric, positive semidefinite matrices. A [`SubspaceSplit`]
//! describes the orthogonal decomposition `H = H1 ⊕ H2` as a basis rotation
//! followed by a dimension cut; [`partition`] turns the pair into blocks.
//!
//! Matrix sizes written `‖·‖∞` in this crate are the entrywise sup norm
//! ([`sup_norm`]). Operator and trace norms go through singular values.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub const DEFAULT_TOL_SYM: f64 = 1e-10;
pub const DEFAULT_TOL_PSD: f64 = 1e-10;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Orthogonality tolerance for split bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Slack used when validating operators that were computed from a validated
/// source (shorts, blocks). Measured relative to the source scale.
pub(crate) const DERIVED_PSD_SLACK: f64 = 1e-8;

/// Largest absolute entry.
pub fn sup_norm(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn vec_sup_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Sum of singular values.
pub fn trace_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values.sum()
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values.max()
}

/// Dense symmetric positive semidefinite operator with the tolerances it was
/// validated against.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPosOperator {
    entries: Matrix,
    tol_sym: f64,
    tol_psd: f64,
}

impl SymPosOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn tol_sym(&self) -> f64 {
        self.tol_sym
    }

    pub fn tol_psd(&self) -> f64 {
        self.tol_psd
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.entries)
    }

    pub fn spectral(&self, rank_tol: f64) -> SpectralDecomposition {
        SpectralDecomposition::of_symmetric(&self.entries, rank_tol)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_symmetric_unchecked(Matrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_symmetric_unchecked(Matrix::zeros(dim, dim))
    }

    /// Wraps a matrix already known to be symmetric PSD (diagonal with
    /// nonnegative entries, embeddings of validated blocks).
    pub(crate) fn from_symmetric_unchecked(entries: Matrix) -> Self {
        Self {
            entries,
            tol_sym: DEFAULT_TOL_SYM,
            tol_psd: DEFAULT_TOL_PSD,
        }
    }

    /// Validates a matrix computed from an operator of spectral scale `scale`.
    /// Roundoff in the computation is absorbed by a slack relative to
    /// `1 + scale` rather than to the (possibly tiny) result itself.
    pub(crate) fn from_derived(m: Matrix, scale: f64, tol_sym: f64, tol_psd: f64) -> Result<Self> {
        let sym = symmetrize(&m);
        if sym.nrows() > 0 {
            let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
            let min = eig.min();
            let bound = -DERIVED_PSD_SLACK.max(tol_psd) * (1.0 + scale.abs());
            if min < bound {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                    bound,
                });
            }
        }
        Ok(Self {
            entries: sym,
            tol_sym,
            tol_psd,
        })
    }
}

fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

fn check_square_finite(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Checks symmetry and positivity and stores the symmetrized matrix.
pub fn validate_psd(m: &Matrix, tol_sym: f64, tol_psd: f64) -> Result<SymPosOperator> {
    check_square_finite(m)?;
    let defect = sup_norm(&(m - m.transpose()));
    if defect > tol_sym {
        return Err(Error::AsymmetricInput {
            defect,
            tol: tol_sym,
        });
    }
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
    let (min, max) = (eig.min(), eig.max());
    let bound = -tol_psd * (1.0 + max);
    if min < bound {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
            bound,
        });
    }
    Ok(SymPosOperator {
        entries: sym,
        tol_sym,
        tol_psd,
    })
}

/// [`validate_psd`] with the default tolerances.
pub fn psd(m: &Matrix) -> Result<SymPosOperator> {
    validate_psd(m, DEFAULT_TOL_SYM, DEFAULT_TOL_PSD)
}

/// Orthogonal split `H = H1 ⊕ H2`. Columns of the basis are the new basis
/// vectors; H1 is spanned by the first `n1` of them.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceSplit {
    dim: usize,
    n1: usize,
    basis: Option<Matrix>,
}

impl SubspaceSplit {
    /// Coordinate split in the standard basis.
    pub fn new(dim: usize, n1: usize) -> Result<Self> {
        if n1 == 0 || n1 >= dim {
            return Err(Error::InvalidSplit(format!(
                "need 1 <= n1 < dim, got n1 = {n1}, dim = {dim}"
            )));
        }
        Ok(Self {
            dim,
            n1,
            basis: None,
        })
    }

    pub fn with_basis(n1: usize, basis: Matrix) -> Result<Self> {
        check_square_finite(&basis)?;
        let dim = basis.nrows();
        let mut split = Self::new(dim, n1)?;
        let defect = sup_norm(&(basis.transpose() * &basis - Matrix::identity(dim, dim)));
        if defect > BASIS_TOL {
            return Err(Error::InvalidSplit(format!(
                "basis is not orthogonal (defect {defect:e})"
            )));
        }
        split.basis = Some(basis);
        Ok(split)
    }

    /// Split whose H1 is spanned by the given coordinate axes (in the given
    /// order); the remaining axes follow in increasing order.
    pub fn coordinates(dim: usize, h1: &[usize]) -> Result<Self> {
        let mut seen = vec![false; dim];
        for &i in h1 {
            if i >= dim || seen[i] {
                return Err(Error::InvalidSplit(format!(
                    "coordinate {i} out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        let order: Vec<usize> = h1
            .iter()
            .copied()
            .chain((0..dim).filter(|i| !seen[*i]))
            .collect();
        let mut basis = Matrix::zeros(dim, dim);
        for (col, &row) in order.iter().enumerate() {
            basis[(row, col)] = 1.0;
        }
        Self::with_basis(h1.len(), basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.dim - self.n1
    }

    pub fn basis(&self) -> Option<&Matrix> {
        self.basis.as_ref()
    }

    pub fn basis_matrix(&self) -> Matrix {
        self.basis
            .clone()
            .unwrap_or_else(|| Matrix::identity(self.dim, self.dim))
    }

    /// `Bᵀ M B`: expresses an operator in split coordinates.
    pub fn rotate(&self, m: &Matrix) -> Matrix {
        match &self.basis {
            Some(b) => b.transpose() * m * b,
            None => m.clone(),
        }
    }

    /// `B M Bᵀ`: brings an operator back to the original coordinates.
    pub fn unrotate(&self, m: &Matrix) -> Matrix {
        match &self.basis {
            Some(b) => b * m * b.transpose(),
            None => m.clone(),
        }
    }

    pub fn rotate_vec(&self, v: &Vector) -> Vector {
        match &self.basis {
            Some(b) => b.transpose() * v,
            None => v.clone(),
        }
    }

    pub fn unrotate_vec(&self, v: &Vector) -> Vector {
        match &self.basis {
            Some(b) => b * v,
            None => v.clone(),
        }
    }

    /// Orthogonal projector onto H1 in original coordinates.
    pub fn h1_projector(&self) -> Matrix {
        let b = self.basis_matrix();
        let cols = b.columns(0, self.n1);
        cols * cols.transpose()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }
}

/// `A = (A11 A12; A21 A22)` in split coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition {
    pub a11: Matrix,
    pub a12: Matrix,
    pub a21: Matrix,
    pub a22: Matrix,
}

impl BlockPartition {
    pub fn n1(&self) -> usize {
        self.a11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.a22.nrows()
    }

    pub fn reassemble(&self) -> Matrix {
        let (n1, n2) = (self.n1(), self.n2());
        let mut m = Matrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(&self.a11);
        m.view_mut((0, n1), (n1, n2)).copy_from(&self.a12);
        m.view_mut((n1, 0), (n2, n1)).copy_from(&self.a21);
        m.view_mut((n1, n1), (n2, n2)).copy_from(&self.a22);
        m
    }
}

pub(crate) fn split_blocks(rotated: &Matrix, n1: usize) -> BlockPartition {
    let dim = rotated.nrows();
    let n2 = dim - n1;
    BlockPartition {
        a11: rotated.view((0, 0), (n1, n1)).into_owned(),
        a12: rotated.view((0, n1), (n1, n2)).into_owned(),
        a21: rotated.view((n1, 0), (n2, n1)).into_owned(),
        a22: rotated.view((n1, n1), (n2, n2)).into_owned(),
    }
}

pub fn partition(a: &SymPosOperator, split: &SubspaceSplit) -> Result<BlockPartition> {
    split.check_dim(a.dim())?;
    Ok(split_blocks(&split.rotate(a.entries()), split.n1()))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vector,
    pub eigenvectors: Matrix,
    pub numerical_rank: usize,
    pub rank_tol: f64,
}

impl SpectralDecomposition {
    pub fn of_symmetric(m: &Matrix, rank_tol: f64) -> Self {
        Self::of_block(m, rank_tol, 0.0)
    }

    /// Eigenvalues at or below `rank_tol · max(λmax, floor)` count as zero.
    /// With `floor` set to the size of an enclosing operator, a block made
    /// of roundoff has rank 0.
    pub fn of_block(m: &Matrix, rank_tol: f64, floor: f64) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                eigenvalues: Vector::zeros(0),
                eigenvectors: Matrix::zeros(0, 0),
                numerical_rank: 0,
                rank_tol,
            };
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let eigenvalues = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = Matrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        let max = eigenvalues[0].max(floor);
        let numerical_rank = if max > 0.0 {
            eigenvalues.iter().filter(|&&l| l > rank_tol * max).count()
        } else {
            0
        };
        Self {
            eigenvalues,
            eigenvectors,
            numerical_rank,
            rank_tol,
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.get(0).copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().next_back().copied().unwrap_or(0.0)
    }

    /// Ratio of the largest to the smallest retained eigenvalue; 0 when
    /// nothing is retained.
    pub fn effective_condition(&self) -> f64 {
        if self.numerical_rank == 0 {
            return 0.0;
        }
        self.eigenvalues[0] / self.eigenvalues[self.numerical_rank - 1]
    }

    /// Condition number over the full spectrum (infinite when singular).
    pub fn condition(&self) -> f64 {
        let min = self.min_eigenvalue();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            self.max_eigenvalue() / min
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        let v = &self.eigenvectors;
        v * Matrix::from_diagonal(&self.eigenvalues) * v.transpose()
    }

    /// `V Λ⁺ Vᵀ` with eigenvalues at or below `rank_tol · λmax` dropped.
    pub fn pseudoinverse(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let mut inv = Matrix::zeros(n, n);
        for k in 0..self.numerical_rank {
            let v = self.eigenvectors.column(k);
            inv += (v * v.transpose()) / self.eigenvalues[k];
        }
        inv
    }

    /// `V Λ^{1/2}` with negative roundoff eigenvalues clamped to zero.
    pub fn sqrt_factor(&self) -> Matrix {
        let mut f = self.eigenvectors.clone();
        for (k, mut col) in f.column_iter_mut().enumerate() {
            col *= self.eigenvalues[k].max(0.0).sqrt();
        }
        f
    }
}

pub fn pseudoinverse(a: &SymPosOperator, rank_tol: f64) -> Matrix {
    a.spectral(rank_tol).pseudoinverse()
}

/// `A ≤ B` in the Löwner order: the smallest eigenvalue of `B − A` is at
/// least `−tol · (1 + ‖B‖∞)`.
pub fn loewner_leq(a: &SymPosOperator, b: &SymPosOperator, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(min_eigenvalue(&(b.entries() - a.entries())) >= -tol * (1.0 + b.sup_norm()))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        let n = rows.len();
        Matrix::from_fn(n, rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn validate_identity() {
        let a = validate_psd(&Matrix::identity(3, 3), 1e-10, 1e-10).unwrap();
        assert_eq!(a.dim(), 3);
    }

    #[test]
    fn validate_rejects_indefinite() {
        let err = psd(&m(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap_err();
        match err {
            Error::NotPositive { min_eigenvalue, .. } => {
                assert_abs_diff_eq!(min_eigenvalue, -1.0, epsilon = 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_accepts_two_by_two() {
        // eigenvalues (3 ± √5)/2, both positive
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let spec = a.spectral(DEFAULT_RANK_TOL);
        assert_abs_diff_eq!(
            spec.eigenvalues[0],
            (3.0 + 5f64.sqrt()) / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            spec.eigenvalues[1],
            (3.0 - 5f64.sqrt()) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn validate_rejects_asymmetric_and_stores_symmetrized() {
        assert!(matches!(
            psd(&m(&[&[1.0, 0.5], &[0.0, 1.0]])),
            Err(Error::AsymmetricInput { .. })
        ));
        let a = validate_psd(&m(&[&[1.0, 0.1], &[0.3, 1.0]]), 0.5, 1e-10).unwrap();
        assert_eq!(a.entries()[(0, 1)], 0.2);
        assert_eq!(a.entries()[(1, 0)], 0.2);
    }

    #[test]
    fn validate_rejects_non_finite_and_non_square() {
        assert!(matches!(psd(&m(&[&[f64::NAN]])), Err(Error::NonFinite)));
        assert!(matches!(
            psd(&Matrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn partition_diagonal() {
        let a = psd(&Matrix::from_diagonal(&Vector::from_vec(vec![
            1.0, 2.0, 3.0,
        ])))
        .unwrap();
        let p = partition(&a, &SubspaceSplit::new(3, 1).unwrap()).unwrap();
        assert_eq!(p.a11, m(&[&[1.0]]));
        assert_eq!(p.a22, m(&[&[2.0, 0.0], &[0.0, 3.0]]));
        assert_eq!(p.a12, Matrix::zeros(1, 2));
        assert_eq!(p.a21, Matrix::zeros(2, 1));
    }

    #[test]
    fn partition_slices() {
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let p = partition(&a, &SubspaceSplit::new(2, 1).unwrap()).unwrap();
        assert_eq!(
            (p.a11[0], p.a12[0], p.a21[0], p.a22[0]),
            (2.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn partition_rotated_identity() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let basis = m(&[&[c, -c], &[c, c]]);
        let split = SubspaceSplit::with_basis(1, basis).unwrap();
        let p = partition(&SymPosOperator::identity(2), &split).unwrap();
        assert_abs_diff_eq!(p.a11[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.a22[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.a12[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partition_dimension_mismatch() {
        let split = SubspaceSplit::new(3, 1).unwrap();
        assert!(matches!(
            partition(&SymPosOperator::identity(2), &split),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn split_rejects_bad_sizes_and_bases() {
        assert!(SubspaceSplit::new(3, 0).is_err());
        assert!(SubspaceSplit::new(3, 3).is_err());
        assert!(SubspaceSplit::with_basis(1, m(&[&[1.0, 1.0], &[0.0, 1.0]])).is_err());
        assert!(SubspaceSplit::coordinates(3, &[0, 0]).is_err());
    }

    #[test]
    fn coordinate_split_orders_h1_first() {
        let s = SubspaceSplit::coordinates(4, &[2, 0]).unwrap();
        let v = s.rotate_vec(&Vector::from_vec(vec![10.0, 11.0, 12.0, 13.0]));
        assert_eq!(v.as_slice(), &[12.0, 10.0, 11.0, 13.0]);
    }

    #[test]
    fn loewner_examples() {
        let z = SymPosOperator::zeros(2);
        let i = SymPosOperator::identity(2);
        assert!(loewner_leq(&z, &i, 1e-12).unwrap());
        assert!(!loewner_leq(&i, &z, 1e-12).unwrap());
        let a = psd(&m(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap();
        let b = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!(loewner_leq(&a, &b, 1e-12).unwrap());
    }

    #[test]
    fn pseudoinverse_examples() {
        let d = psd(&m(&[&[2.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(
            pseudoinverse(&d, 1e-10),
            m(&[&[0.5, 0.0], &[0.0, 0.0]]),
            epsilon = 1e-15
        );
        let i = SymPosOperator::identity(3);
        assert_abs_diff_eq!(
            pseudoinverse(&i, 1e-10),
            Matrix::identity(3, 3),
            epsilon = 1e-15
        );
        let r = psd(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_abs_diff_eq!(
            pseudoinverse(&r, 1e-10),
            m(&[&[0.25, 0.25], &[0.25, 0.25]]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn norm_examples() {
        let d = m(&[&[1.0, 0.0], &[0.0, -2.0]]);
        assert_abs_diff_eq!(trace_norm(&d), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(operator_norm(&d), 2.0, epsilon = 1e-14);
        let i = Matrix::identity(5, 5);
        assert_abs_diff_eq!(trace_norm(&i), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(operator_norm(&i), 1.0, epsilon = 1e-14);
        let n = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_abs_diff_eq!(trace_norm(&n), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(operator_norm(&n), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn spectral_sorted_and_rank() {
        let a = psd(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        let s = a.spectral(1e-10);
        assert!(s.eigenvalues[0] >= s.eigenvalues[1]);
        assert_eq!(s.numerical_rank, 1);
        assert_abs_diff_eq!(s.reconstruct(), a.entries().clone(), epsilon = 1e-14);
        assert_eq!(s.condition(), f64::INFINITY);
    }
}
