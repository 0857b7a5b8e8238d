//! Seeded generators for random test instances.
//!
//! Used by the self-test, the acceptance suite and the examples. All draws go
//! through a caller-supplied RNG so fixed seeds give fixed instances.

use nalgebra::QR;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{psd, Matrix, SubspaceSplit, SymPosOperator, Vector};

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign
/// correction).
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let qr = QR::new(gaussian_matrix(rng, n, n));
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

/// Random PSD matrix of the given rank (`G Gᵀ`, `G` Gaussian `dim × rank`).
pub fn psd_of_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Matrix {
    let g = gaussian_matrix(rng, dim, rank);
    let m = &g * g.transpose();
    (&m + m.transpose()) * 0.5
}

/// PSD matrix `U diag(λ) Uᵀ` with `rank` eigenvalues drawn from
/// `[lo, hi]` and the rest exactly zero.
pub fn psd_with_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    rank: usize,
    lo: f64,
    hi: f64,
) -> Matrix {
    let u = orthogonal(rng, dim);
    let mut m = Matrix::zeros(dim, dim);
    for k in 0..rank.min(dim) {
        let l = rng.random_range(lo..=hi);
        let v = u.column(k);
        m += (v * v.transpose()) * l;
    }
    (&m + m.transpose()) * 0.5
}

/// A random PSD operator together with its split, built in block form
///
/// ```text
/// A = [Kᵀ A22 K + M   Kᵀ A22]
///     [A22 K          A22   ]
/// ```
///
/// with `rank(A22) = a22_rank` (nonzero spectrum in `[0.2, 2]`), `K`
/// Gaussian and `M` PSD of rank `short_rank`. The short of `A` to H1 is `M`
/// exactly, which gives an independent known answer.
#[derive(Clone, Debug)]
pub struct ShortInstance {
    pub operator: SymPosOperator,
    pub split: SubspaceSplit,
    pub expected_short: Matrix,
}

pub fn short_instance<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n1: usize,
    a22_rank: usize,
    short_rank: usize,
    scale: f64,
) -> ShortInstance {
    let n2 = dim - n1;
    let a22 = psd_with_spectrum(rng, n2, a22_rank, 0.2, 2.0) * scale;
    let k = gaussian_matrix(rng, n2, n1) / (n2 as f64).sqrt();
    let m = psd_of_rank(rng, n1, short_rank) * (scale / n1 as f64);
    let a12 = k.transpose() * &a22;
    let a11 = &a12 * &k + &m;
    let mut a = Matrix::zeros(dim, dim);
    a.view_mut((0, 0), (n1, n1)).copy_from(&a11);
    a.view_mut((0, n1), (n1, n2)).copy_from(&a12);
    a.view_mut((n1, 0), (n2, n1)).copy_from(&a12.transpose());
    a.view_mut((n1, n1), (n2, n2)).copy_from(&a22);
    let a = (&a + a.transpose()) * 0.5;
    ShortInstance {
        operator: psd(&a).expect("block construction is PSD"),
        split: SubspaceSplit::new(dim, n1).expect("1 <= n1 < dim"),
        expected_short: m,
    }
}

/// Draws dimension, split and ranks, then calls [`short_instance`]. Ranks of
/// A22 cover the full range `0..=n2`; the scale spans four decades.
pub fn mixed_short_instance<R: Rng + ?Sized>(
    rng: &mut R,
    min_dim: usize,
    max_dim: usize,
) -> ShortInstance {
    let dim = rng.random_range(min_dim.max(2)..=max_dim);
    let n1 = rng.random_range(1..dim);
    let n2 = dim - n1;
    let a22_rank = rng.random_range(0..=n2);
    let short_rank = rng.random_range(0..=n1);
    let scale = 10f64.powf(rng.random_range(-2.0..=2.0));
    short_instance(rng, dim, n1, a22_rank, short_rank, scale)
}
