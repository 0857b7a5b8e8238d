//! Shorted operators on finite-dimensional Hilbert spaces and their use for
//! Gaussian conditioning.
//!
//! Given a positive semidefinite `A` on `H = H1 ⊕ H2`, the short of `A` to
//! H1 is
//!
//! ```text
//! S(A) = A11 − A12 A22⁺ A21
//! ```
//!
//! the largest positive operator below `A` with range in H1. The crate
//! computes it by several independent routes ([`shorting`]), through the
//! special `A`-self-adjoint projection onto H2 ([`oblique`]), along
//! finite truncations of infinite models ([`truncation`]), and uses it as the
//! conditional covariance of a Gaussian vector ([`gaussian`]).
//!
//! ```
//! use shorted_ops::{psd, short, Matrix, SubspaceSplit};
//!
//! let a = psd(&Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])).unwrap();
//! let split = SubspaceSplit::new(2, 1).unwrap();
//! let s = short(&a, &split).unwrap();
//! assert!((s.block[(0, 0)] - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod oblique;
pub mod operator;
pub mod random;
pub mod selftest;
pub mod serde_matrix;
pub mod shorting;
pub mod truncation;

pub use error::{Error, Result};
pub use gaussian::{
    condition, condition_truncated, mc_verify, sample, ConditionalLaw, GaussianMeasure, McReport,
    SampleBatch, TruncatedConditioning,
};
pub use oblique::{
    build_special_projection, compatibility_report, congruence_defect, short_via_projection,
    verify_inverse_identity, CompatibilityReport, ObliqueProjection,
};
pub use operator::{
    loewner_leq, operator_norm, partition, psd, pseudoinverse, sup_norm, trace_norm, validate_psd,
    BlockPartition, Matrix, SpectralDecomposition, SubspaceSplit, SymPosOperator, Vector,
};
pub use shorting::{
    default_eps_schedule, intersect, short, short_nested, short_pseudo, short_regularized,
    short_schur, variational_value, ShortMethod, ShortedResult,
};
pub use truncation::{
    convergence_study, convergence_study_with_reference, decreasing_approximation_study,
    make_coupled_family, truncate, ConvergenceReport, ModelSpec, OperatorModel, TruncationSchedule,
    Verdict,
};
