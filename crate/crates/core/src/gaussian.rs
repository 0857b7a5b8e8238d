//! Gaussian measures on `H1 ⊕ H2` and their conditional laws.
//!
//! For `X ~ N(m, C)` the conditional law of the H1 component given that the
//! H2 component equals `t` is Gaussian with
//!
//! ```text
//! mean  m1 + Q̂ᵀ (t − m2)       Q̂ = C22⁺ C21
//! cov   S(C)                   the short of C to H1
//! ```
//!
//! The covariance does not depend on `t`, so a [`GaussianMeasure`] computes
//! its [`ConditionalLaw`] once and hands out the same `Arc` on every call.
//!
//! Sampling uses `x = m + V Λ^{1/2} z` from the eigendecomposition of `C`,
//! which works for singular covariances. Draws are produced in chunks of
//! [`SAMPLE_CHUNK`]; chunk `k` uses `ChaCha8Rng::seed_from_u64(seed)` with
//! stream `k`, so results depend only on `(seed, count)`.

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oblique::build_special_projection;
use crate::operator::{
    sup_norm, vec_sup_norm, Matrix, SpectralDecomposition, SubspaceSplit, SymPosOperator, Vector,
    DEFAULT_RANK_TOL,
};
use crate::random::gaussian_vector;
use crate::shorting::{short, ShortedResult};
use crate::truncation::{
    convergence_study_with_reference, truncate, ConvergenceReport, OperatorModel,
    TruncationSchedule,
};

/// Draws per RNG stream.
pub const SAMPLE_CHUNK: usize = 16_384;

/// Smallest sample count accepted by [`mc_verify`].
pub const MC_MIN_COUNT: usize = 10_000;

/// Number of held-out conditioning values used for `mean_formula_error`.
pub const HELD_OUT_POINTS: usize = 8;

/// Cauchy tolerance for truncated conditional means, relative to
/// `1 + ‖reference mean‖∞`.
pub const MEAN_CAUCHY_TOL: f64 = 1e-6;

/// The H1-conditional law of a Gaussian measure.
#[derive(Clone, Debug)]
pub struct ConditionalLaw {
    /// Short of the covariance to H1.
    pub cond_cov: ShortedResult,
    /// `Q̂ᵀ`, an `n1 × n2` matrix in split coordinates.
    pub q_hat_adj: Matrix,
    /// `(m1, m2)` in split coordinates.
    pub base_mean: (Vector, Vector),
}

impl ConditionalLaw {
    /// `m1 + Q̂ᵀ (t − m2)` in H1 split coordinates.
    pub fn mean_h1(&self, t: &Vector) -> Result<Vector> {
        let (m1, m2) = &self.base_mean;
        if t.len() != m2.len() {
            return Err(Error::DimensionMismatch {
                expected: m2.len(),
                found: t.len(),
            });
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m1 + &self.q_hat_adj * (t - m2))
    }

    pub fn covariance_block(&self) -> &Matrix {
        &self.cond_cov.block
    }
}

#[derive(Debug)]
pub struct GaussianMeasure {
    mean: Vector,
    cov: SymPosOperator,
    split: SubspaceSplit,
    law: OnceLock<Arc<ConditionalLaw>>,
    factor: OnceLock<Matrix>,
}

impl Clone for GaussianMeasure {
    fn clone(&self) -> Self {
        Self {
            mean: self.mean.clone(),
            cov: self.cov.clone(),
            split: self.split.clone(),
            law: self.law.clone(),
            factor: self.factor.clone(),
        }
    }
}

impl GaussianMeasure {
    pub fn new(mean: Vector, cov: SymPosOperator, split: SubspaceSplit) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        split.check_dim(cov.dim())?;
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            mean,
            cov,
            split,
            law: OnceLock::new(),
            factor: OnceLock::new(),
        })
    }

    pub fn centered(cov: SymPosOperator, split: SubspaceSplit) -> Result<Self> {
        Self::new(Vector::zeros(cov.dim()), cov, split)
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &SymPosOperator {
        &self.cov
    }

    pub fn split(&self) -> &SubspaceSplit {
        &self.split
    }

    /// The same measure with its mean shifted by `v`.
    pub fn translated(&self, v: &Vector) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Self::new(&self.mean + v, self.cov.clone(), self.split.clone())
    }

    /// The conditional law, computed on first use.
    pub fn law(&self) -> Result<Arc<ConditionalLaw>> {
        if let Some(law) = self.law.get() {
            return Ok(Arc::clone(law));
        }
        let law = Arc::new(self.build_law()?);
        Ok(Arc::clone(self.law.get_or_init(|| law)))
    }

    fn build_law(&self) -> Result<ConditionalLaw> {
        let q = build_special_projection(&self.cov, &self.split)?;
        let cond_cov = short(&self.cov, &self.split)?;
        let y = self.split.rotate_vec(&self.mean);
        let n1 = self.split.n1();
        let m1 = y.rows(0, n1).into_owned();
        let m2 = y.rows(n1, self.split.n2()).into_owned();
        Ok(ConditionalLaw {
            cond_cov,
            q_hat_adj: q.q_hat.transpose(),
            base_mean: (m1, m2),
        })
    }

    /// Factor `F` with `F Fᵀ = C`, cached.
    fn factor(&self) -> &Matrix {
        self.factor.get_or_init(|| {
            SpectralDecomposition::of_symmetric(self.cov.entries(), DEFAULT_RANK_TOL).sqrt_factor()
        })
    }
}

/// Conditions on the H2 component equal to `t` (split coordinates).
///
/// Returns the conditional mean as a full vector in original coordinates,
/// whose H2 part is `t`, and the shared conditional law.
pub fn condition(mu: &GaussianMeasure, t: &Vector) -> Result<(Vector, Arc<ConditionalLaw>)> {
    let law = mu.law()?;
    let h1 = law.mean_h1(t)?;
    let n1 = mu.split.n1();
    let mut y = Vector::zeros(mu.dim());
    y.rows_mut(0, n1).copy_from(&h1);
    y.rows_mut(n1, t.len()).copy_from(t);
    Ok((mu.split.unrotate_vec(&y), law))
}

/// `dim × count` matrix of draws, one per column.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub samples: Matrix,
    pub seed: u64,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.samples.ncols()
    }

    pub fn empirical_mean(&self) -> Vector {
        self.samples.column_mean()
    }

    /// Unbiased sample covariance.
    pub fn empirical_cov(&self) -> Matrix {
        let n = self.count();
        let mean = self.empirical_mean();
        let mut centered = self.samples.clone();
        for mut col in centered.column_iter_mut() {
            col -= &mean;
        }
        (&centered * centered.transpose()) / ((n.max(2) - 1) as f64)
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_bounds(count: usize) -> Vec<(usize, usize)> {
    (0..count.div_ceil(SAMPLE_CHUNK))
        .map(|k| {
            let start = k * SAMPLE_CHUNK;
            (start, (start + SAMPLE_CHUNK).min(count) - start)
        })
        .collect()
}

pub fn sample(mu: &GaussianMeasure, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let dim = mu.dim();
    let factor = mu.factor();
    let mut samples = Matrix::zeros(dim, count);
    let chunks: Vec<Matrix> = chunk_bounds(count)
        .par_iter()
        .enumerate()
        .map(|(k, &(_, len))| {
            let mut rng = chunk_rng(seed, k);
            let mut block = Matrix::zeros(dim, len);
            for mut col in block.column_iter_mut() {
                let z = gaussian_vector(&mut rng, dim);
                col.copy_from(&(factor * z + &mu.mean));
            }
            block
        })
        .collect();
    for ((start, len), block) in chunk_bounds(count).into_iter().zip(chunks) {
        samples.columns_mut(start, len).copy_from(&block);
    }
    Ok(SampleBatch { samples, seed })
}

/// Monte Carlo check of the conditional structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_samples: usize,
    /// `‖Ĉov(ζ, X2)‖∞` with `ζ = X1 − m1 − Q̂ᵀ(X2 − m2)`.
    pub residual_cross_cov_norm: f64,
    /// `‖Ĉov(ζ) − S(C)‖∞`.
    pub residual_cov_error: f64,
    /// Largest `‖·‖∞` gap between the sample-regression conditional mean
    /// and `m_t` over the held-out values of `t`.
    pub mean_formula_error: f64,
    pub seed: u64,
}

#[derive(Clone)]
struct Moments {
    n: usize,
    sum: Vector,
    outer: Matrix,
}

impl Moments {
    fn zeros(d: usize) -> Self {
        Self {
            n: 0,
            sum: Vector::zeros(d),
            outer: Matrix::zeros(d, d),
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        self.n += other.n;
        self.sum += &other.sum;
        self.outer += &other.outer;
        self
    }

    fn cov(&self) -> Matrix {
        let n = self.n as f64;
        let mean = &self.sum / n;
        (&self.outer - &mean * mean.transpose() * n) / (n - 1.0)
    }
}

/// Samples `count` draws and checks the decomposition `X1 = E[X1|X2] + ζ`
/// with `ζ` independent of `X2` and `Cov(ζ) = S(C)`. Nothing is stored per
/// draw: second moments of `(ζ, X2 − m2)` are accumulated chunk by chunk.
pub fn mc_verify(mu: &GaussianMeasure, count: usize, seed: u64) -> Result<McReport> {
    if count < MC_MIN_COUNT {
        return Err(Error::InvalidArgument(format!(
            "mc_verify needs at least {MC_MIN_COUNT} samples, got {count}"
        )));
    }
    let law = mu.law()?;
    let dim = mu.dim();
    let n1 = mu.split.n1();
    let n2 = mu.split.n2();
    // Factor in split coordinates: y − (m1, m2) = Bᵀ F z.
    let factor = mu.split.basis_matrix().transpose() * mu.factor();
    let mut whiten = Matrix::identity(dim, dim);
    whiten
        .view_mut((0, n1), (n1, n2))
        .copy_from(&(-&law.q_hat_adj));
    // w = (ζ, y2 − m2) = L (y − m)
    let w_factor = &whiten * &factor;

    let parts: Vec<Moments> = chunk_bounds(count)
        .par_iter()
        .enumerate()
        .map(|(k, &(_, len))| {
            let mut rng = chunk_rng(seed, k);
            let mut m = Moments::zeros(dim);
            m.n = len;
            for _ in 0..len {
                let w = &w_factor * gaussian_vector(&mut rng, dim);
                m.sum += &w;
                m.outer.ger(1.0, &w, &w, 1.0);
            }
            m
        })
        .collect();
    let moments = parts
        .iter()
        .fold(Moments::zeros(dim), |acc, m| acc.merge(m));
    let cov_w = moments.cov();

    let cross = cov_w.view((0, n1), (n1, n2)).into_owned();
    let zeta = cov_w.view((0, 0), (n1, n1)).into_owned();
    let residual_cross_cov_norm = sup_norm(&cross);
    let residual_cov_error = sup_norm(&(zeta - &law.cond_cov.block));

    // Sample covariance of y is T Ĉov(w) Tᵀ with T = L⁻¹ = [I, Q̂ᵀ; 0, I].
    let mut t_mat = Matrix::identity(dim, dim);
    t_mat.view_mut((0, n1), (n1, n2)).copy_from(&law.q_hat_adj);
    let cov_y = &t_mat * &cov_w * t_mat.transpose();
    let mean_w = &moments.sum / moments.n as f64;
    let mean_y = &t_mat * mean_w;
    let c12 = cov_y.view((0, n1), (n1, n2)).into_owned();
    let c22 = cov_y.view((n1, n1), (n2, n2)).into_owned();
    let regression =
        c12 * SpectralDecomposition::of_symmetric(&c22, DEFAULT_RANK_TOL).pseudoinverse();

    let (m1, m2) = &law.base_mean;
    let h2_factor = factor.rows(n1, n2).into_owned();
    let mut rng = chunk_rng(seed, usize::MAX);
    let mut mean_formula_error: f64 = 0.0;
    for _ in 0..HELD_OUT_POINTS {
        let t = m2 + &h2_factor * gaussian_vector(&mut rng, dim);
        let shift = &t - m2 - mean_y.rows(n1, n2);
        let predicted = m1 + mean_y.rows(0, n1) + &regression * shift;
        let exact = law.mean_h1(&t)?;
        mean_formula_error = mean_formula_error.max(vec_sup_norm(&(predicted - exact)));
    }

    Ok(McReport {
        n_samples: count,
        residual_cross_cov_norm,
        residual_cov_error,
        mean_formula_error,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMeanRecord {
    pub n: usize,
    /// `m1 + Q̂ₙᵀ (t − m2)` restricted to the first `n` H2 coordinates.
    pub mean_h1: Vec<f64>,
    /// `‖·‖∞` distance to the reference mean.
    pub gap_to_ref: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedConditioning {
    pub records: Vec<TruncatedMeanRecord>,
    pub reference_mean_h1: Vec<f64>,
    /// Gaps to the reference do not grow over the last three sizes and the
    /// final gap is below `MEAN_CAUCHY_TOL · (1 + ‖reference‖∞)`.
    pub cauchy: bool,
    pub study: ConvergenceReport,
}

fn padded(v: &[f64], len: usize) -> Vector {
    let mut out = Vector::zeros(len);
    let k = v.len().min(len);
    out.rows_mut(0, k).copy_from_slice(&v[..k]);
    out
}

fn truncated_mean(model: &OperatorModel, mean: &[f64], t: &[f64], n: usize) -> Result<Vector> {
    let (cov, split) = truncate(model, n)?;
    let mu = GaussianMeasure::new(padded(mean, cov.dim()), cov, split)?;
    let law = mu.law()?;
    law.mean_h1(&padded(t, n))
}

/// Conditional means of the truncations `Cⁿ` of a lazily modeled covariance.
///
/// `mean` covers H1 followed by leading H2 coordinates and is zero-padded;
/// `t` lives on the first `t.len()` coordinates of H2.
pub fn condition_truncated(
    model: &OperatorModel,
    mean: &[f64],
    t: &[f64],
    schedule: &TruncationSchedule,
    reference_n: Option<usize>,
) -> Result<TruncatedConditioning> {
    let reference_n = reference_n.unwrap_or_else(|| schedule.max_size());
    if t.len() > reference_n || mean.len() > model.n1() + reference_n {
        return Err(Error::InvalidArgument(format!(
            "t and the mean must fit in the reference truncation (n = {reference_n})"
        )));
    }
    if !model.trace_class() {
        return Err(Error::InvalidArgument(
            "conditioning needs a trace-class model".into(),
        ));
    }
    let study = convergence_study_with_reference(model, schedule, Some(reference_n))?;
    let mut sizes = schedule.sizes.clone();
    if reference_n != schedule.max_size() {
        sizes.push(reference_n);
    }
    let means: Vec<Vector> = sizes
        .par_iter()
        .map(|&n| truncated_mean(model, mean, t, n))
        .collect::<Result<_>>()?;
    let reference = means.last().expect("schedule is nonempty").clone();
    let records: Vec<TruncatedMeanRecord> = schedule
        .sizes
        .iter()
        .zip(&means)
        .map(|(&n, m)| TruncatedMeanRecord {
            n,
            mean_h1: m.as_slice().to_vec(),
            gap_to_ref: vec_sup_norm(&(m - &reference)),
        })
        .collect();
    let tol = MEAN_CAUCHY_TOL * (1.0 + vec_sup_norm(&reference));
    let gaps: Vec<f64> = records.iter().map(|r| r.gap_to_ref).collect();
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let cauchy = tail.windows(2).all(|w| w[1] <= w[0] || w[1] <= tol)
        && gaps.last().is_some_and(|&g| g <= tol);
    Ok(TruncatedConditioning {
        records,
        reference_mean_h1: reference.as_slice().to_vec(),
        cauchy,
        study,
    })
}
