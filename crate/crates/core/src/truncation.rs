//! Truncation studies for countably indexed positive operators.
//!
//! An [`OperatorModel`] is a pure entry oracle over `(i, j)`: indices below
//! `n1` address H1, the rest address an ordered orthonormal basis of H2. The
//! truncation `Aⁿ = PⁿAPⁿ` keeps H1 plus the first `n` basis vectors of H2.
//! Every truncation is compatible with H2, and the shorts `S(Aⁿ)` approach
//! `S(A)` weakly (in trace norm for trace-class `A`). The limit is not
//! computable, so the studies here compare against a high-`n` reference.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oblique::{build_special_projection, SOLVE_RESIDUAL_LIMIT};
use crate::operator::{
    min_eigenvalue, operator_norm, partition, psd, sup_norm, trace_norm, Matrix, SubspaceSplit,
    SymPosOperator, Vector, DEFAULT_RANK_TOL,
};
use crate::random::gaussian_vector;
use crate::serde_matrix;
use crate::shorting::{a22_spectrum, check_eps_schedule, short, ShortMethod};

/// Largest truncation size accepted by the studies.
pub const MAX_STUDY_SIZE: usize = 4096;

/// `q_hat_norm` growth factor across the schedule that flags divergence.
pub const DIVERGENCE_GROWTH_FACTOR: f64 = 2.0;

/// Number of trailing schedule entries inspected by the weak-probe rule.
pub const WEAK_WINDOW: usize = 3;

pub type EntryFn = dyn Fn(usize, usize) -> f64 + Send + Sync;

/// Lazily evaluated symmetric operator on `H1 ⊕ H2` with `dim H1 = n1`.
#[derive(Clone)]
pub struct OperatorModel {
    name: String,
    n1: usize,
    entry: Arc<EntryFn>,
    trace_class: bool,
    decay_hint: Option<f64>,
}

impl fmt::Debug for OperatorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorModel")
            .field("name", &self.name)
            .field("n1", &self.n1)
            .field("trace_class", &self.trace_class)
            .field("decay_hint", &self.decay_hint)
            .finish()
    }
}

impl OperatorModel {
    pub fn new<F>(name: impl Into<String>, n1: usize, trace_class: bool, entry: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            n1,
            entry: Arc::new(entry),
            trace_class,
            decay_hint: None,
        }
    }

    pub fn with_decay_hint(mut self, hint: f64) -> Self {
        self.decay_hint = Some(hint);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn trace_class(&self) -> bool {
        self.trace_class
    }

    pub fn decay_hint(&self) -> Option<f64> {
        self.decay_hint
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.entry)(i, j)
    }

    /// Leading `(n1 + n) × (n1 + n)` block, unvalidated.
    pub fn window(&self, n: usize) -> Matrix {
        let d = self.n1 + n;
        Matrix::from_fn(d, d, |i, j| self.entry(i, j))
    }

    /// Partial diagonal sums at each size are Cauchy-like: the increments
    /// between successive sizes do not grow.
    pub fn diagonal_sums_settle(&self, sizes: &[usize]) -> bool {
        let sums: Vec<f64> = sizes
            .iter()
            .map(|&n| (0..self.n1 + n).map(|k| self.entry(k, k)).sum())
            .collect();
        let incs: Vec<f64> = sums.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        incs.windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
    }
}

/// Named model families that can be written to and read from files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// See [`make_coupled_family`]; `cap` defaults to [`MAX_STUDY_SIZE`].
    CoupledFamily {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    /// `entry(0,0) = c0`, `entry(k,k) = k^(−beta)`, no coupling.
    BlockDiagonal { c0: f64, beta: f64 },
    /// `entry(i,i) = ratio^i`.
    Diagonal { n1: usize, ratio: f64 },
    /// The fixed Toeplitz instance of [`non_monotone_witness`].
    NonMonotoneWitness,
}

impl ModelSpec {
    pub fn build(&self) -> Result<OperatorModel> {
        match *self {
            ModelSpec::CoupledFamily { alpha, beta, cap } => {
                coupled_family_capped(alpha, beta, cap.unwrap_or(MAX_STUDY_SIZE))
            }
            ModelSpec::BlockDiagonal { c0, beta } => block_diagonal(c0, beta),
            ModelSpec::Diagonal { n1, ratio } => {
                if n1 == 0 || !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "diagonal model needs n1 >= 1 and 0 < ratio < 1, got {n1}, {ratio}"
                    )));
                }
                Ok(OperatorModel::new("diagonal", n1, true, move |i, j| {
                    if i == j {
                        ratio.powi(i as i32)
                    } else {
                        0.0
                    }
                })
                .with_decay_hint(ratio))
            }
            ModelSpec::NonMonotoneWitness => Ok(non_monotone_witness()),
        }
    }
}

pub fn make_coupled_family(alpha: f64, beta: f64) -> Result<OperatorModel> {
    coupled_family_capped(alpha, beta, MAX_STUDY_SIZE)
}

/// `n1 = 1`, `entry(0,k) = k^(−alpha)`, `entry(k,k) = k^(−beta)` for `k ≥ 1`.
///
/// `entry(0,0) = 1 + Σ_{k ≤ cap} k^(β−2α)`, plus the integral tail bound
/// `cap^(β−2α+1) / (2α−β−1)` when the series converges. The Schur
/// complement of every truncation up to `cap` is then at least 1. When
/// `2α − β ≤ 1` the series diverges and truncations well beyond `cap` stop
/// being positive.
pub fn coupled_family_capped(alpha: f64, beta: f64, cap: usize) -> Result<OperatorModel> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "beta must exceed 1, got {beta}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.5) {
        return Err(Error::ParameterOutOfRange(format!(
            "alpha must exceed 1/2, got {alpha}"
        )));
    }
    if cap == 0 {
        return Err(Error::ParameterOutOfRange("cap must be positive".into()));
    }
    let p = beta - 2.0 * alpha;
    let partial: f64 = (1..=cap).map(|k| (k as f64).powf(p)).sum();
    let tail = if p < -1.0 {
        (cap as f64).powf(p + 1.0) / (-p - 1.0)
    } else {
        0.0
    };
    let c0 = 1.0 + partial + tail;
    let name = format!("coupled-family(alpha={alpha}, beta={beta})");
    Ok(OperatorModel::new(name, 1, true, move |i, j| match (i, j) {
        (0, 0) => c0,
        (0, k) | (k, 0) => (k as f64).powf(-alpha),
        (j, k) if j == k => (k as f64).powf(-beta),
        _ => 0.0,
    })
    .with_decay_hint(beta))
}

pub fn block_diagonal(c0: f64, beta: f64) -> Result<OperatorModel> {
    if !(c0.is_finite() && c0 >= 0.0 && beta.is_finite() && beta > 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "block-diagonal model needs c0 >= 0 and beta > 1, got {c0}, {beta}"
        )));
    }
    Ok(
        OperatorModel::new("block-diagonal", 1, true, move |i, j| match (i, j) {
            (0, 0) => c0,
            (j, k) if j == k => (k as f64).powf(-beta),
            _ => 0.0,
        })
        .with_decay_hint(beta),
    )
}

/// Toeplitz operator `entry(i,j) = 1/(1 + |i − j|)` with `n1 = 1` (positive
/// definite by Pólya's criterion). Its truncations are not Löwner increasing
/// and neither are their shorts.
pub fn non_monotone_witness() -> OperatorModel {
    OperatorModel::new("non-monotone-witness", 1, false, |i, j| {
        1.0 / (1.0 + i.abs_diff(j) as f64)
    })
}

/// `Aⁿ` together with the split `n1 | n`.
pub fn truncate(model: &OperatorModel, n: usize) -> Result<(SymPosOperator, SubspaceSplit)> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "truncation size must be at least 1".into(),
        ));
    }
    let op = psd(&model.window(n)).map_err(|e| Error::NotPsd {
        n,
        source: Box::new(e),
    })?;
    let split = SubspaceSplit::new(model.n1 + n, model.n1)?;
    Ok((op, split))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub sizes: Vec<usize>,
    pub probes: Vec<Probe>,
}

impl TruncationSchedule {
    pub fn new(sizes: Vec<usize>, probes: Vec<Probe>) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::InvalidArgument(
                "schedule needs at least 3 sizes".into(),
            ));
        }
        if sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "schedule sizes must be positive and strictly increasing".into(),
            ));
        }
        for p in &probes {
            let zero = |v: &[f64]| v.iter().all(|x| *x == 0.0);
            if zero(&p.c) || zero(&p.d) {
                return Err(Error::InvalidArgument(
                    "probe vectors must be nonzero".into(),
                ));
            }
        }
        Ok(Self { sizes, probes })
    }

    /// H1 basis vectors plus two seeded random pairs supported on H1 and the
    /// first `sizes[0]` coordinates of H2.
    pub fn with_default_probes(sizes: Vec<usize>, n1: usize, seed: u64) -> Result<Self> {
        let width = n1 + sizes.first().copied().unwrap_or(0);
        let mut probes: Vec<Probe> = (0..n1)
            .map(|i| {
                let mut e = vec![0.0; n1];
                e[i] = 1.0;
                Probe { c: e.clone(), d: e }
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2 {
            let c = gaussian_vector(&mut rng, width).as_slice().to_vec();
            let d = gaussian_vector(&mut rng, width).as_slice().to_vec();
            probes.push(Probe { c, d });
        }
        Self::new(sizes, probes)
    }

    /// `from, 2·from, …` up to and including `to`.
    pub fn doubling(from: usize, to: usize, n1: usize, seed: u64) -> Result<Self> {
        let mut sizes = Vec::new();
        let mut n = from.max(1);
        while n <= to {
            sizes.push(n);
            n *= 2;
        }
        Self::with_default_probes(sizes, n1, seed)
    }

    pub fn max_size(&self) -> usize {
        *self.sizes.last().expect("validated schedule is nonempty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WeakConverging,
    TraceConverging,
    QHatDiverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub weak_probe_values: Vec<f64>,
    pub op_norm_dist_to_ref: f64,
    pub trace_norm_dist_to_ref: f64,
    pub q_hat_norm: f64,
    pub a22_effective_cond: f64,
    pub solve_residual: f64,
    pub compatible: bool,
    pub method: ShortMethod,
    #[serde(with = "serde_matrix")]
    pub shorted_block: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRules {
    pub divergence_growth_factor: f64,
    pub weak_window: usize,
}

impl Default for VerdictRules {
    fn default() -> Self {
        Self {
            divergence_growth_factor: DIVERGENCE_GROWTH_FACTOR,
            weak_window: WEAK_WINDOW,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub reference_n: usize,
    pub records: Vec<ConvergenceRecord>,
    pub verdict: Verdict,
    pub weak_converging: bool,
    pub trace_converging: bool,
    pub q_hat_diverging: bool,
    /// Diagonal partial sums settle on the schedule (trace-class models).
    pub trace_class_consistent: bool,
    pub rules: VerdictRules,
}

/// One row of the flat plot-data table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub n: usize,
    pub probe_id: usize,
    pub probe_value: f64,
    pub op_dist: f64,
    pub trace_dist: f64,
    pub q_hat_norm: f64,
}

impl ConvergenceReport {
    pub fn plot_rows(&self) -> Vec<PlotRow> {
        self.records
            .iter()
            .flat_map(|r| {
                r.weak_probe_values
                    .iter()
                    .enumerate()
                    .map(move |(id, &v)| PlotRow {
                        n: r.n,
                        probe_id: id,
                        probe_value: v,
                        op_dist: r.op_norm_dist_to_ref,
                        trace_dist: r.trace_norm_dist_to_ref,
                        q_hat_norm: r.q_hat_norm,
                    })
            })
            .collect()
    }

    pub fn q_hat_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.q_hat_norm).collect()
    }

    pub fn trace_distances(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.trace_norm_dist_to_ref)
            .collect()
    }

    /// Successive gaps `|v_{i+1} − v_i|` for one probe.
    pub fn probe_gaps(&self, probe: usize) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|w| (w[1].weak_probe_values[probe] - w[0].weak_probe_values[probe]).abs())
            .collect()
    }
}

struct Step {
    n: usize,
    block: Matrix,
    probes: Vec<f64>,
    q_hat_norm: f64,
    cond: f64,
    solve_residual: f64,
    compatible: bool,
    method: ShortMethod,
}

fn pad(v: &[f64], dim: usize) -> Vector {
    let mut out = Vector::zeros(dim);
    out.rows_mut(0, v.len()).copy_from_slice(v);
    out
}

fn study_step(model: &OperatorModel, n: usize, probes: &[Probe]) -> Result<Step> {
    let (op, split) = truncate(model, n)?;
    let shorted = short(&op, &split)?;
    let q = build_special_projection(&op, &split)?;
    let cond = a22_spectrum(&op, &partition(&op, &split)?, DEFAULT_RANK_TOL).effective_condition();
    let dim = op.dim();
    let probes = probes
        .iter()
        .map(|p| {
            let c = pad(&p.c, dim);
            let d = pad(&p.d, dim);
            d.dot(&(shorted.shorted.entries() * c))
        })
        .collect();
    Ok(Step {
        n,
        block: shorted.block,
        probes,
        q_hat_norm: q.certificates.q_hat_norm,
        cond,
        solve_residual: q.certificates.solve_residual,
        compatible: q.certificates.solve_residual <= SOLVE_RESIDUAL_LIMIT,
        method: shorted.method,
    })
}

fn check_probes(model: &OperatorModel, schedule: &TruncationSchedule) -> Result<()> {
    let width = model.n1 + schedule.sizes[0];
    if schedule
        .probes
        .iter()
        .any(|p| p.c.len() > width || p.d.len() > width)
    {
        return Err(Error::InvalidArgument(format!(
            "probes must fit in the smallest truncation (length <= {width})"
        )));
    }
    Ok(())
}

pub fn convergence_study(
    model: &OperatorModel,
    schedule: &TruncationSchedule,
) -> Result<ConvergenceReport> {
    convergence_study_with_reference(model, schedule, None)
}

/// Runs the study against the short at `reference_n` (default: the largest
/// scheduled size). Per-size work runs in parallel; records are ordered by
/// `n`.
pub fn convergence_study_with_reference(
    model: &OperatorModel,
    schedule: &TruncationSchedule,
    reference_n: Option<usize>,
) -> Result<ConvergenceReport> {
    let reference_n = reference_n.unwrap_or_else(|| schedule.max_size());
    if schedule.max_size() > MAX_STUDY_SIZE || reference_n > MAX_STUDY_SIZE {
        return Err(Error::InvalidArgument(format!(
            "truncation sizes are limited to {MAX_STUDY_SIZE}"
        )));
    }
    if reference_n < schedule.max_size() {
        return Err(Error::InvalidArgument(
            "reference size must not be below the schedule".into(),
        ));
    }
    check_probes(model, schedule)?;

    let mut sizes = schedule.sizes.clone();
    if reference_n != schedule.max_size() {
        sizes.push(reference_n);
    }
    let steps: Vec<Step> = sizes
        .par_iter()
        .map(|&n| study_step(model, n, &schedule.probes))
        .collect::<Result<_>>()?;
    let reference = &steps
        .iter()
        .find(|s| s.n == reference_n)
        .expect("reference is computed")
        .block;

    let records: Vec<ConvergenceRecord> = steps
        .iter()
        .filter(|s| schedule.sizes.contains(&s.n))
        .map(|s| {
            let diff = &s.block - reference;
            ConvergenceRecord {
                n: s.n,
                weak_probe_values: s.probes.clone(),
                op_norm_dist_to_ref: operator_norm(&diff),
                trace_norm_dist_to_ref: trace_norm(&diff),
                q_hat_norm: s.q_hat_norm,
                a22_effective_cond: s.cond,
                solve_residual: s.solve_residual,
                compatible: s.compatible,
                method: s.method,
                shorted_block: s.block.clone(),
            }
        })
        .collect();

    let rules = VerdictRules::default();
    let weak = weak_rule(&records, schedule.probes.len(), rules.weak_window);
    let trace = trace_rule(&records);
    let diverging = divergence_rule(&records, rules.divergence_growth_factor);
    let verdict = if diverging {
        Verdict::QHatDiverging
    } else if weak && trace {
        Verdict::TraceConverging
    } else if weak {
        Verdict::WeakConverging
    } else {
        Verdict::Inconclusive
    };
    let trace_class_consistent =
        !model.trace_class() || model.diagonal_sums_settle(&schedule.sizes);
    Ok(ConvergenceReport {
        model: model.name().to_string(),
        reference_n,
        records,
        verdict,
        weak_converging: weak,
        trace_converging: weak && trace,
        q_hat_diverging: diverging,
        trace_class_consistent,
        rules,
    })
}

fn settled(gap: f64, value: f64) -> bool {
    gap <= 1e-13 * (1.0 + value.abs())
}

/// Every probe's successive gaps shrink over the trailing `window` entries.
fn weak_rule(records: &[ConvergenceRecord], probes: usize, window: usize) -> bool {
    if records.len() < window {
        return false;
    }
    let tail = &records[records.len() - window..];
    (0..probes).all(|p| {
        let gaps: Vec<(f64, f64)> = tail
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].weak_probe_values[p], w[1].weak_probe_values[p]);
                ((b - a).abs(), b)
            })
            .collect();
        gaps.windows(2)
            .all(|g| g[1].0 < g[0].0 || (settled(g[0].0, g[0].1) && settled(g[1].0, g[1].1)))
    })
}

/// Trace-norm distances to the reference never increase.
fn trace_rule(records: &[ConvergenceRecord]) -> bool {
    records.windows(2).all(|w| {
        let (a, b) = (w[0].trace_norm_dist_to_ref, w[1].trace_norm_dist_to_ref);
        b <= a || settled(b, sup_norm(&w[1].shorted_block))
    })
}

fn divergence_rule(records: &[ConvergenceRecord], factor: f64) -> bool {
    let first = records.first().map(|r| r.q_hat_norm).unwrap_or(0.0);
    let last = records.last().map(|r| r.q_hat_norm).unwrap_or(0.0);
    last > factor * first && first > 0.0
}

/// Smallest eigenvalues that witness failures of Löwner monotonicity along
/// the truncation sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityWitness {
    pub sizes: Vec<usize>,
    /// `min λ(S(Aᵐ) − S(Aⁿ))` over recorded `m > n`.
    pub min_short_increment_eig: f64,
    /// The `(m, n)` pair attaining it.
    pub short_pair: (usize, usize),
    /// `min λ(Aᵐ − Aⁿ ⊕ 0)` over recorded `m > n`.
    pub min_truncation_increment_eig: f64,
}

pub fn truncation_monotonicity(
    model: &OperatorModel,
    sizes: &[usize],
) -> Result<MonotonicityWitness> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "need at least two increasing sizes".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut ops = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (op, split) = truncate(model, n)?;
        blocks.push(short(&op, &split)?.block);
        ops.push(op);
    }
    let mut min_short = f64::INFINITY;
    let mut pair = (sizes[1], sizes[0]);
    let mut min_trunc = f64::INFINITY;
    for i in 0..sizes.len() {
        for j in i + 1..sizes.len() {
            let e = min_eigenvalue(&(&blocks[j] - &blocks[i]));
            if e < min_short {
                min_short = e;
                pair = (sizes[j], sizes[i]);
            }
            let big = ops[j].entries();
            let mut small = Matrix::zeros(big.nrows(), big.ncols());
            let d = ops[i].dim();
            small.view_mut((0, 0), (d, d)).copy_from(ops[i].entries());
            min_trunc = min_trunc.min(min_eigenvalue(&(big - small)));
        }
    }
    Ok(MonotonicityWitness {
        sizes: sizes.to_vec(),
        min_short_increment_eig: min_short,
        short_pair: pair,
        min_truncation_increment_eig: min_trunc,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRecord {
    pub eps: f64,
    #[serde(with = "serde_matrix")]
    pub shorted_block: Matrix,
    pub op_dist_to_limit: f64,
    pub trace_dist_to_limit: f64,
    /// `min λ(S(A + ε_prev I) − S(A + εI))`; zero for the first entry.
    pub step_min_eig: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecreasingApproximationReport {
    pub records: Vec<ApproximationRecord>,
    #[serde(with = "serde_matrix")]
    pub limit_block: Matrix,
    /// Löwner nonincreasing within `LOEWNER_SLACK · (1 + ‖·‖∞)` at every step.
    pub monotone: bool,
    pub final_op_gap: f64,
}

/// Löwner slack for the decreasing-approximation monotonicity check.
pub const LOEWNER_SLACK: f64 = 1e-9;

/// Shorts of `A + εI` along a decreasing schedule, compared with `S(A)`.
pub fn decreasing_approximation_study(
    a: &SymPosOperator,
    split: &SubspaceSplit,
    eps_schedule: &[f64],
) -> Result<DecreasingApproximationReport> {
    check_eps_schedule(eps_schedule)?;
    let limit = short(a, split)?.block;
    let dim = a.dim();
    let mut records: Vec<ApproximationRecord> = Vec::with_capacity(eps_schedule.len());
    let mut monotone = true;
    for &eps in eps_schedule {
        let shifted = psd(&(a.entries() + Matrix::identity(dim, dim) * eps))?;
        let block = short(&shifted, split)?.block;
        let step_min_eig = match records.last() {
            Some(prev) => {
                let e = min_eigenvalue(&(&prev.shorted_block - &block));
                if e < -LOEWNER_SLACK * (1.0 + sup_norm(&prev.shorted_block)) {
                    monotone = false;
                }
                e
            }
            None => 0.0,
        };
        let diff = &block - &limit;
        records.push(ApproximationRecord {
            eps,
            op_dist_to_limit: operator_norm(&diff),
            trace_dist_to_limit: trace_norm(&diff),
            shorted_block: block,
            step_min_eig,
        });
    }
    let final_op_gap = records.last().map(|r| r.op_dist_to_limit).unwrap_or(0.0);
    Ok(DecreasingApproximationReport {
        records,
        limit_block: limit,
        monotone,
        final_op_gap,
    })
}
