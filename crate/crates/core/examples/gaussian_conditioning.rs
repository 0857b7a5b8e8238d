//! Conditional law of X1 given X2 = t for a Gaussian with singular
//! covariance.

use shorted_ops::gaussian::{condition, GaussianMeasure};
use shorted_ops::operator::{psd, Matrix, SubspaceSplit, Vector};

fn main() -> shorted_ops::Result<()> {
    let cov = psd(&Matrix::from_row_slice(
        3,
        3,
        &[2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    ))?;
    let mu = GaussianMeasure::new(
        Vector::from_vec(vec![1.0, 0.0, 0.0]),
        cov,
        SubspaceSplit::new(3, 1)?,
    )?;
    for t in [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]] {
        let (mean, law) = condition(&mu, &Vector::from_row_slice(&t))?;
        println!(
            "t = {t:?}  mean {:?}  cov {}",
            mean.as_slice(),
            law.covariance_block()[(0, 0)]
        );
    }
    Ok(())
}
