//! Shorted operators.
//!
//! The short `S(A)` of a positive operator to H1 is the largest positive `X`
//! with `X ≤ A` and range inside H1. In block form it is the generalized
//! Schur complement `A11 − A12 A22⁺ A21`, and for every `s ∈ H1`
//!
//! ```text
//! ⟨S(A)s, s⟩ = inf_t ⟨A(s; t), (s; t)⟩.
//! ```
//!
//! Three routes are provided (LU-based Schur complement, spectral
//! pseudoinverse, and the `ε ↓ 0` regularization `A22 + εI`) plus the
//! variational quadratic minimization as an oracle. A fourth route through
//! oblique projections lives in [`crate::oblique`].

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    min_eigenvalue, operator_norm, partition, sup_norm, BlockPartition, Matrix,
    SpectralDecomposition, SubspaceSplit, SymPosOperator, Vector, DEFAULT_RANK_TOL,
};

/// Condition-number gate for the Schur route and for default dispatch.
pub const SCHUR_CONDITION_LIMIT: f64 = 1e12;

/// Range residual above which the pseudoinverse route reports ill-conditioning.
pub const RANGE_RESIDUAL_LIMIT: f64 = 1e-6;

/// Geometric schedule `1e-2, 1e-4, …, 1e-10`.
pub fn default_eps_schedule() -> Vec<f64> {
    vec![1e-2, 1e-4, 1e-6, 1e-8, 1e-10]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShortMethod {
    Schur,
    Pseudo,
    Regularized,
    Oblique,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShortDiagnostics {
    pub a22_rank: usize,
    /// Values of ε actually visited (regularized route only).
    pub epsilon_schedule: Vec<f64>,
    pub range_residual: f64,
    /// Smallest eigenvalue of `A − S(A)`.
    pub loewner_gap_eig: f64,
}

/// A short embedded in the full space. Off-H1 blocks are exactly zero in
/// split coordinates; `shorted` is expressed in the original coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortedResult {
    pub shorted: SymPosOperator,
    /// The H1 block in split coordinates.
    pub block: Matrix,
    pub split: SubspaceSplit,
    pub method: ShortMethod,
    pub diagnostics: ShortDiagnostics,
}

impl ShortedResult {
    pub(crate) fn assemble(
        a: &SymPosOperator,
        split: &SubspaceSplit,
        block: Matrix,
        method: ShortMethod,
        mut diagnostics: ShortDiagnostics,
    ) -> Result<Self> {
        let scale = a.sup_norm() * a.dim() as f64;
        let block =
            SymPosOperator::from_derived(block, scale, a.tol_sym(), a.tol_psd())?.into_matrix();
        let n1 = split.n1();
        let mut embedded = Matrix::zeros(split.dim(), split.dim());
        embedded.view_mut((0, 0), (n1, n1)).copy_from(&block);
        let full = split.unrotate(&embedded);
        let full = (&full + full.transpose()) * 0.5;
        diagnostics.loewner_gap_eig = min_eigenvalue(&(a.entries() - &full));
        Ok(Self {
            shorted: SymPosOperator::from_symmetric_unchecked(full),
            block,
            split: split.clone(),
            method,
            diagnostics,
        })
    }

    pub fn dim(&self) -> usize {
        self.shorted.dim()
    }
}

fn range_residual(a22: &Matrix, a21: &Matrix, x: &Matrix) -> f64 {
    sup_norm(&(a22 * x - a21)) / (1.0 + sup_norm(a21))
}

/// Generalized Schur complement `A11 − A12 X` given a solution `X` of
/// `A22 X = A21`, symmetrized.
fn complement(a11: &Matrix, a12: &Matrix, x: &Matrix) -> Matrix {
    let s = a11 - a12 * x;
    (&s + s.transpose()) * 0.5
}

/// Spectrum of A22 with the rank cutoff floored at `rank_tol · ‖A‖∞`.
pub fn a22_spectrum(
    a: &SymPosOperator,
    p: &BlockPartition,
    rank_tol: f64,
) -> SpectralDecomposition {
    SpectralDecomposition::of_block(&p.a22, rank_tol, a.sup_norm())
}

/// `A11 − A12 A22⁻¹ A21`, solving with LU. Requires `cond(A22)` below
/// [`SCHUR_CONDITION_LIMIT`].
pub fn short_schur(a: &SymPosOperator, split: &SubspaceSplit) -> Result<ShortedResult> {
    let p = partition(a, split)?;
    let spec = a22_spectrum(a, &p, DEFAULT_RANK_TOL);
    let condition = if spec.numerical_rank == 0 {
        f64::INFINITY
    } else {
        spec.condition()
    };
    if condition.is_nan() || condition >= SCHUR_CONDITION_LIMIT {
        return Err(Error::SingularA22 {
            condition,
            limit: SCHUR_CONDITION_LIMIT,
        });
    }
    let x = p.a22.clone().lu().solve(&p.a21).ok_or(Error::SingularA22 {
        condition: f64::INFINITY,
        limit: SCHUR_CONDITION_LIMIT,
    })?;
    let diagnostics = ShortDiagnostics {
        a22_rank: split.n2(),
        range_residual: range_residual(&p.a22, &p.a21, &x),
        ..Default::default()
    };
    ShortedResult::assemble(
        a,
        split,
        complement(&p.a11, &p.a12, &x),
        ShortMethod::Schur,
        diagnostics,
    )
}

pub fn short_pseudo(a: &SymPosOperator, split: &SubspaceSplit) -> Result<ShortedResult> {
    short_pseudo_with(a, split, DEFAULT_RANK_TOL)
}

/// `A11 − A12 A22⁺ A21` with the spectral pseudoinverse.
pub fn short_pseudo_with(
    a: &SymPosOperator,
    split: &SubspaceSplit,
    rank_tol: f64,
) -> Result<ShortedResult> {
    let p = partition(a, split)?;
    let spec = a22_spectrum(a, &p, rank_tol);
    let x = spec.pseudoinverse() * &p.a21;
    let residual = range_residual(&p.a22, &p.a21, &x);
    if residual > RANGE_RESIDUAL_LIMIT {
        return Err(Error::RangeConditionViolated {
            residual,
            limit: RANGE_RESIDUAL_LIMIT,
        });
    }
    let diagnostics = ShortDiagnostics {
        a22_rank: spec.numerical_rank,
        range_residual: residual,
        ..Default::default()
    };
    ShortedResult::assemble(
        a,
        split,
        complement(&p.a11, &p.a12, &x),
        ShortMethod::Pseudo,
        diagnostics,
    )
}

pub(crate) fn check_eps_schedule(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::InvalidArgument(
            "epsilon schedule needs at least 3 values".into(),
        ));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidArgument(
            "epsilon values must be positive".into(),
        ));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "epsilon schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// `S_ε = A11 − A12 (A22 + εI)⁻¹ A21` along a decreasing schedule.
pub(crate) fn regularized_block(
    a11: &Matrix,
    a12: &Matrix,
    a21: &Matrix,
    a22: &Matrix,
    eps: f64,
) -> Matrix {
    let n2 = a22.nrows();
    let shifted = a22 + Matrix::identity(n2, n2) * eps;
    let x = shifted
        .lu()
        .solve(a21)
        .expect("A22 + εI is positive definite");
    complement(a11, a12, &x)
}

/// Regularized short at the smallest ε of the schedule.
///
/// Iteration stops early once the operator-norm gap between successive
/// iterates reaches the roundoff floor. Otherwise the gap must shrink across
/// the final three ε values, or `NoConvergence` is returned.
pub fn short_regularized(
    a: &SymPosOperator,
    split: &SubspaceSplit,
    eps_schedule: &[f64],
) -> Result<ShortedResult> {
    check_eps_schedule(eps_schedule)?;
    let p = partition(a, split)?;
    let floor = 1e-14 * (1.0 + a.sup_norm());
    let mut visited = Vec::with_capacity(eps_schedule.len());
    let mut gaps: Vec<f64> = Vec::new();
    let mut current: Option<Matrix> = None;
    let mut stalled = false;
    for &eps in eps_schedule {
        let next = regularized_block(&p.a11, &p.a12, &p.a21, &p.a22, eps);
        visited.push(eps);
        if let Some(prev) = &current {
            let gap = operator_norm(&(&next - prev));
            gaps.push(gap);
            if gap <= floor {
                current = Some(next);
                stalled = true;
                break;
            }
        }
        current = Some(next);
    }
    if !stalled {
        let k = gaps.len();
        if gaps[k - 1] >= gaps[k - 2] {
            return Err(Error::NoConvergence { gaps });
        }
    }
    let rank = a22_spectrum(a, &p, DEFAULT_RANK_TOL).numerical_rank;
    let diagnostics = ShortDiagnostics {
        a22_rank: rank,
        epsilon_schedule: visited,
        ..Default::default()
    };
    ShortedResult::assemble(
        a,
        split,
        current.expect("schedule is nonempty"),
        ShortMethod::Regularized,
        diagnostics,
    )
}

/// Default dispatch: Schur complement when `cond(A22)` is below
/// [`SCHUR_CONDITION_LIMIT`], pseudoinverse otherwise.
pub fn short(a: &SymPosOperator, split: &SubspaceSplit) -> Result<ShortedResult> {
    let p = partition(a, split)?;
    let spec = a22_spectrum(a, &p, DEFAULT_RANK_TOL);
    if spec.numerical_rank > 0 && spec.condition() < SCHUR_CONDITION_LIMIT {
        short_schur(a, split)
    } else {
        short_pseudo(a, split)
    }
}

/// `inf_t ⟨A(s; t), (s; t)⟩` for `s ∈ H1` given in split coordinates.
///
/// The minimizer solves `A22 t = −A21 s` in the least-squares sense (SVD);
/// the quadratic is then evaluated directly.
pub fn variational_value(a: &SymPosOperator, split: &SubspaceSplit, s: &Vector) -> Result<f64> {
    let p = partition(a, split)?;
    if s.len() != split.n1() {
        return Err(Error::DimensionMismatch {
            expected: split.n1(),
            found: s.len(),
        });
    }
    if s.norm() == 0.0 {
        return Err(Error::InvalidArgument("s must be nonzero".into()));
    }
    let rhs = -(&p.a21 * s);
    let svd = SVD::new(p.a22.clone(), true, true);
    let cutoff = svd.singular_values.max().max(a.sup_norm()) * DEFAULT_RANK_TOL;
    let t = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let value = s.dot(&(&p.a11 * s)) + 2.0 * s.dot(&(&p.a12 * &t)) + t.dot(&(&p.a22 * &t));
    Ok(value)
}

/// Short to `S ∩ T`, computed directly and as `S(T(A))`.
///
/// The intersection is read off the eigenvalue-2 eigenspace of
/// `P_S + P_T`. The two results must agree within `1e-8 · ‖A‖∞`.
pub fn short_nested(
    a: &SymPosOperator,
    s: &SubspaceSplit,
    t: &SubspaceSplit,
) -> Result<ShortedResult> {
    s.check_dim(a.dim())?;
    t.check_dim(a.dim())?;
    let intersection = intersect(s, t)?;
    let direct = short(a, &intersection)?;
    let inner = short(a, t)?;
    let iterated = short(&inner.shorted, s)?;
    let defect = sup_norm(&(direct.shorted.entries() - iterated.shorted.entries()));
    if defect > 1e-8 * a.sup_norm() {
        return Err(Error::NestingMismatch { defect });
    }
    Ok(direct)
}

/// Split whose H1 is the intersection of the H1 spaces of `s` and `t`.
pub fn intersect(s: &SubspaceSplit, t: &SubspaceSplit) -> Result<SubspaceSplit> {
    let sum = s.h1_projector() + t.h1_projector();
    let spec = SpectralDecomposition::of_symmetric(&sum, DEFAULT_RANK_TOL);
    let k = spec.eigenvalues.iter().filter(|&&l| l > 2.0 - 1e-8).count();
    if k == 0 {
        return Err(Error::EmptyIntersection);
    }
    SubspaceSplit::with_basis(k, spec.eigenvectors)
}
