//! Samples a Gaussian and checks the conditioning formulas empirically.

use shorted_ops::gaussian::{mc_verify, sample, GaussianMeasure};
use shorted_ops::operator::{psd, Matrix, SubspaceSplit};

fn main() -> shorted_ops::Result<()> {
    let cov = psd(&Matrix::from_row_slice(
        3,
        3,
        &[2.0, 0.6, 0.3, 0.6, 1.0, 0.2, 0.3, 0.2, 0.5],
    ))?;
    let mu = GaussianMeasure::centered(cov, SubspaceSplit::new(3, 1)?)?;

    let batch = sample(&mu, 50_000, 3)?;
    println!("empirical covariance {}", batch.empirical_cov());

    for count in [10_000, 100_000, 1_000_000] {
        let r = mc_verify(&mu, count, 42)?;
        println!(
            "{count:>8} samples  cross cov {:.2e}  cov error {:.2e}  mean error {:.2e}",
            r.residual_cross_cov_norm, r.residual_cov_error, r.mean_formula_error
        );
    }
    Ok(())
}
