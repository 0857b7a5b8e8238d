//! A-symmetric oblique projections onto H2.
//!
//! A projection `Q` with range H2 has the block form `(0 0; Q̂ 1)` in split
//! coordinates. It is A-symmetric (`AQ = QᵀA`) exactly when
//! `A22 Q̂ = A21`. The special element takes the minimum-norm solution
//! `Q̂ = A22⁺ A21`, which vanishes on `ker A21` and maps into the closure of
//! the range of `A22`. With `E = 1 − Q` the short is `AE = EᵀAE`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    operator_norm, partition, sup_norm, Matrix, SubspaceSplit, SymPosOperator, DEFAULT_RANK_TOL,
};
use crate::shorting::{a22_spectrum, ShortDiagnostics, ShortMethod, ShortedResult};
use nalgebra::SVD;

/// Solve residual above which a projection is not built.
pub const SOLVE_RESIDUAL_LIMIT: f64 = 1e-6;

/// Relative tolerance for the A-symmetry and `AE = EᵀAE` checks.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub idempotency_defect: f64,
    /// `‖AQ − QᵀA‖∞` in split coordinates (absolute).
    pub a_symmetry_defect: f64,
    /// `‖A22 Q̂ − A21‖∞ / (1 + ‖A21‖∞)`.
    pub solve_residual: f64,
    /// Operator norm of `Q̂`.
    pub q_hat_norm: f64,
    /// Largest `‖Q̂v‖` over an orthonormal basis of `ker A21`.
    pub kernel_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObliqueProjection {
    /// `Q̂ : H1 → H2`, an `n2 × n1` matrix.
    pub q_hat: Matrix,
    /// `(0 0; Q̂ 1)` in split coordinates.
    pub q_full: Matrix,
    pub split: SubspaceSplit,
    pub certificates: Certificates,
    /// `‖A‖∞` of the operator the projection was built for.
    pub source_norm: f64,
}

impl ObliqueProjection {
    pub fn n1(&self) -> usize {
        self.split.n1()
    }

    /// `Q` in the original coordinates.
    pub fn to_original(&self) -> Matrix {
        self.split.unrotate(&self.q_full)
    }

    /// `E = 1 − Q` in split coordinates.
    pub fn complement(&self) -> Matrix {
        let d = self.q_full.nrows();
        Matrix::identity(d, d) - &self.q_full
    }

    /// `P1` in split coordinates.
    pub fn p1(&self) -> Matrix {
        let d = self.q_full.nrows();
        let mut p = Matrix::zeros(d, d);
        p.view_mut((0, 0), (self.n1(), self.n1()))
            .fill_with_identity();
        p
    }
}

fn assemble_q(q_hat: &Matrix, n1: usize) -> Matrix {
    let n2 = q_hat.nrows();
    let mut q = Matrix::zeros(n1 + n2, n1 + n2);
    q.view_mut((n1, 0), (n2, n1)).copy_from(q_hat);
    q.view_mut((n1, n1), (n2, n2)).fill_with_identity();
    q
}

/// `‖Q̂ P_ker‖` where `P_ker` projects onto `ker A21` (singular values at or
/// below `rank_tol · σmax` count as zero).
fn kernel_defect(a21: &Matrix, q_hat: &Matrix) -> f64 {
    let n1 = a21.ncols();
    if a21.nrows() == 0 {
        return operator_norm(q_hat);
    }
    let svd = SVD::new(a21.clone(), false, true);
    let v_t = svd.v_t.expect("V requested");
    let cutoff = DEFAULT_RANK_TOL * svd.singular_values.max();
    let mut kernel = Matrix::identity(n1, n1);
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > cutoff {
            let v = v_t.row(k).transpose();
            kernel -= &v * v.transpose();
        }
    }
    operator_norm(&(q_hat * kernel))
}

fn a_symmetry_defect(rotated: &Matrix, q_full: &Matrix) -> f64 {
    sup_norm(&(rotated * q_full - q_full.transpose() * rotated))
}

pub fn build_special_projection(
    a: &SymPosOperator,
    split: &SubspaceSplit,
) -> Result<ObliqueProjection> {
    build_special_projection_with(a, split, DEFAULT_RANK_TOL)
}

/// The special element `Q̂ = A22⁺ A21` with all certificates.
pub fn build_special_projection_with(
    a: &SymPosOperator,
    split: &SubspaceSplit,
    rank_tol: f64,
) -> Result<ObliqueProjection> {
    let p = partition(a, split)?;
    let spec = a22_spectrum(a, &p, rank_tol);
    let q_hat = spec.pseudoinverse() * &p.a21;
    let solve_residual = sup_norm(&(&p.a22 * &q_hat - &p.a21)) / (1.0 + sup_norm(&p.a21));
    if solve_residual > SOLVE_RESIDUAL_LIMIT {
        return Err(Error::CompatibilitySolveFailed {
            residual: solve_residual,
            limit: SOLVE_RESIDUAL_LIMIT,
        });
    }
    let q_full = assemble_q(&q_hat, split.n1());
    let rotated = split.rotate(a.entries());
    let certificates = Certificates {
        idempotency_defect: sup_norm(&(&q_full * &q_full - &q_full)),
        a_symmetry_defect: a_symmetry_defect(&rotated, &q_full),
        solve_residual,
        q_hat_norm: operator_norm(&q_hat),
        kernel_defect: kernel_defect(&p.a21, &q_hat),
    };
    Ok(ObliqueProjection {
        q_hat,
        q_full,
        split: split.clone(),
        certificates,
        source_norm: a.sup_norm(),
    })
}

fn check_bound(a: &SymPosOperator, q: &ObliqueProjection) -> Result<Matrix> {
    q.split.check_dim(a.dim())?;
    let norm = a.sup_norm();
    if (norm - q.source_norm).abs() > 1e-12 * (1.0 + norm) {
        return Err(Error::CertificateMismatch(format!(
            "projection was built for an operator with ‖A‖∞ = {:e}, got {:e}",
            q.source_norm, norm
        )));
    }
    let rotated = q.split.rotate(a.entries());
    let defect = a_symmetry_defect(&rotated, &q.q_full);
    if defect > IDENTITY_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::CertificateMismatch(format!(
            "A-symmetry defect {defect:e} against this operator"
        )));
    }
    Ok(rotated)
}

/// `‖AE − EᵀAE‖∞` in split coordinates.
pub fn projection_identity_defect(a: &SymPosOperator, q: &ObliqueProjection) -> Result<f64> {
    q.split.check_dim(a.dim())?;
    let rotated = q.split.rotate(a.entries());
    let e = q.complement();
    let ae = &rotated * &e;
    Ok(sup_norm(&(&ae - e.transpose() * &ae)))
}

/// `S(A) = EᵀAE` with `E = 1 − Q`.
pub fn short_via_projection(a: &SymPosOperator, q: &ObliqueProjection) -> Result<ShortedResult> {
    let rotated = check_bound(a, q)?;
    let e = q.complement();
    let ae = &rotated * &e;
    let eae = e.transpose() * &ae;
    let defect = sup_norm(&(&ae - &eae));
    if defect > IDENTITY_TOL * a.sup_norm() {
        return Err(Error::CertificateMismatch(format!(
            "AE and EᵀAE differ by {defect:e}"
        )));
    }
    let n1 = q.n1();
    let block = eae.view((0, 0), (n1, n1)).into_owned();
    let rank = a22_spectrum(a, &partition(a, &q.split)?, DEFAULT_RANK_TOL).numerical_rank;
    let diagnostics = ShortDiagnostics {
        a22_rank: rank,
        range_residual: q.certificates.solve_residual,
        ..Default::default()
    };
    ShortedResult::assemble(a, &q.split, block, ShortMethod::Oblique, diagnostics)
}

/// `‖(P1 + Q)(2 − P1 − Q) − I‖∞`.
pub fn verify_inverse_identity(q: &ObliqueProjection) -> f64 {
    let d = q.q_full.nrows();
    let id = Matrix::identity(d, d);
    let p1q = q.p1() + &q.q_full;
    let inv = &id * 2.0 - &p1q;
    sup_norm(&(p1q * inv - id))
}

/// `‖(P1 + Q)ᵀ (S(A) ⊕ A22) (P1 + Q) − A‖∞` in split coordinates, with the
/// short taken from `short`.
pub fn congruence_defect(
    a: &SymPosOperator,
    q: &ObliqueProjection,
    short: &ShortedResult,
) -> Result<f64> {
    q.split.check_dim(a.dim())?;
    let rotated = q.split.rotate(a.entries());
    let (n1, d) = (q.n1(), a.dim());
    let mut c_hat = Matrix::zeros(d, d);
    c_hat.view_mut((0, 0), (n1, n1)).copy_from(&short.block);
    c_hat
        .view_mut((n1, n1), (d - n1, d - n1))
        .copy_from(&rotated.view((n1, n1), (d - n1, d - n1)));
    let t = q.p1() + &q.q_full;
    Ok(sup_norm(&(t.transpose() * c_hat * &t - rotated)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub solve_residual: f64,
    pub a22_rank: usize,
    pub a22_condition_effective: f64,
    pub q_hat_norm: f64,
}

/// Minimum-norm solve diagnostics. Finite-dimensional PSD input is always
/// compatible in exact arithmetic; the conditioning and `‖Q̂‖` are the
/// quantities to watch across truncations.
pub fn compatibility_report(
    a: &SymPosOperator,
    split: &SubspaceSplit,
) -> Result<CompatibilityReport> {
    let p = partition(a, split)?;
    let spec = a22_spectrum(a, &p, DEFAULT_RANK_TOL);
    let q_hat = spec.pseudoinverse() * &p.a21;
    let solve_residual = sup_norm(&(&p.a22 * &q_hat - &p.a21)) / (1.0 + sup_norm(&p.a21));
    Ok(CompatibilityReport {
        compatible: solve_residual <= SOLVE_RESIDUAL_LIMIT,
        solve_residual,
        a22_rank: spec.numerical_rank,
        a22_condition_effective: spec.effective_condition(),
        q_hat_norm: operator_norm(&q_hat),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::psd;
    use crate::shorting::{short_pseudo, short_schur};
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn split(dim: usize, n1: usize) -> SubspaceSplit {
        SubspaceSplit::new(dim, n1).unwrap()
    }

    #[test]
    fn special_projection_two_by_two() {
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(2, 1)).unwrap();
        assert_abs_diff_eq!(q.q_hat[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            q.q_full.clone(),
            m(&[&[0.0, 0.0], &[1.0, 1.0]]),
            epsilon = 1e-15
        );
        let aq = a.entries() * &q.q_full;
        let qta = q.q_full.transpose() * a.entries();
        assert_abs_diff_eq!(aq, qta, epsilon = 1e-15);
        assert_eq!(q.certificates.idempotency_defect, 0.0);
    }

    #[test]
    fn special_projection_block_diagonal_is_p2() {
        let a = psd(&m(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.5], &[0.0, 0.5, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(3, 1)).unwrap();
        assert_eq!(q.q_hat, Matrix::zeros(2, 1));
        assert_eq!(
            q.q_full,
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0]))
        );
        assert_eq!(q.certificates.kernel_defect, 0.0);
    }

    #[test]
    fn special_projection_singular_a22() {
        let a = psd(&m(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]])).unwrap();
        let q = build_special_projection(&a, &split(3, 1)).unwrap();
        assert_abs_diff_eq!(q.q_hat.clone(), m(&[&[1.0], &[0.0]]), epsilon = 1e-15);
    }

    #[test]
    fn short_via_projection_examples() {
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(2, 1)).unwrap();
        assert_abs_diff_eq!(
            q.complement(),
            m(&[&[1.0, 0.0], &[-1.0, 0.0]]),
            epsilon = 1e-15
        );
        let r = short_via_projection(&a, &q).unwrap();
        assert_abs_diff_eq!(
            r.shorted.entries().clone(),
            m(&[&[1.0, 0.0], &[0.0, 0.0]]),
            epsilon = 1e-15
        );
        let schur = short_schur(&a, &split(2, 1)).unwrap();
        assert_abs_diff_eq!(r.block.clone(), schur.block, epsilon = 1e-15);

        let i = SymPosOperator::identity(3);
        let q = build_special_projection(&i, &split(3, 1)).unwrap();
        let r = short_via_projection(&i, &q).unwrap();
        assert_eq!(r.block, m(&[&[1.0]]));

        let d = psd(&m(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 0.0, 4.0]])).unwrap();
        let q = build_special_projection(&d, &split(3, 2)).unwrap();
        assert_eq!(
            short_via_projection(&d, &q).unwrap().block,
            m(&[&[2.0, 1.0], &[1.0, 2.0]])
        );
    }

    #[test]
    fn projection_bound_to_its_operator() {
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let b = psd(&m(&[&[2.0, 0.5], &[0.5, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(2, 1)).unwrap();
        assert!(matches!(
            short_via_projection(&b, &q),
            Err(Error::CertificateMismatch(_))
        ));
    }

    #[test]
    fn inverse_identity_examples() {
        let i = SymPosOperator::identity(3);
        let p2 = build_special_projection(&i, &split(3, 1)).unwrap();
        assert_eq!(verify_inverse_identity(&p2), 0.0);
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(2, 1)).unwrap();
        assert!(verify_inverse_identity(&q) <= 1e-15);
    }

    #[test]
    fn congruence_two_by_two() {
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let q = build_special_projection(&a, &split(2, 1)).unwrap();
        let s = short_pseudo(&a, &split(2, 1)).unwrap();
        assert!(congruence_defect(&a, &q, &s).unwrap() <= 1e-15);
    }

    #[test]
    fn compatibility_examples() {
        let a = psd(&m(&[&[2.0, 0.0], &[0.0, 1.0]])).unwrap();
        let r = compatibility_report(&a, &split(2, 1)).unwrap();
        assert!(r.compatible);
        assert_eq!(r.q_hat_norm, 0.0);
        let a = psd(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        let r = compatibility_report(&a, &split(2, 1)).unwrap();
        assert!(r.compatible);
        assert_abs_diff_eq!(r.q_hat_norm, 1.0, epsilon = 1e-15);
        assert_eq!(r.a22_rank, 1);
    }

    #[test]
    fn kernel_condition_wide_a21() {
        // n1 = 3, n2 = 1: A21 is 1×3 with a two-dimensional kernel.
        let a = psd(&m(&[
            &[2.0, 0.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
        ]))
        .unwrap();
        let q = build_special_projection(&a, &split(4, 3)).unwrap();
        assert!(q.certificates.kernel_defect <= 1e-15);
        assert_abs_diff_eq!(q.q_hat.clone(), m(&[&[1.0, 0.0, 0.0]]), epsilon = 1e-15);
    }
}
